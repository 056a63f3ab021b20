/*
 * Copyright 2026 The secagg-dp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Secure aggregation of 2 <= Kc < U private linear combinations.
//
// Round 1 is plain additive masking X_i = W_i + Z_i with keys replicated at
// every user. The server then needs sum_{i in u1} a_{n,i} Z_i for each n,
// which it fetches with one symmetric private computation per (n, block),
// where a block is L' = U - 1 consecutive key symbols:
//
//   rho_j(x, a) = phi_j(x) prod_l (a - b_l)/(a_1 - b_l)
//               + phi^n(x) prod_{l != j} (a - b_l)/(b_j - b_l) (a - a_1)/(b_j - a_1)
//   psi(a)      = s prod_l (a - b_l)/(a_1 - b_l)
//   zeta(a)     = sum_j rho_j(Z^{(j)}, a) + psi(a)
//
// with phi_j uniform random functionals, a_i the user points, b_l the
// retrieval points and s a fresh shared mask. User i answers zeta(a_i), one
// symbol; any U answers determine zeta (degree L') and zeta(b_l) is the
// l-th symbol of the demanded key combination.

#ifndef SECAGG_SCHEME_MULTI_HPP_
#define SECAGG_SCHEME_MULTI_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/matrix.hpp"
#include "secagg/model.hpp"
#include "secagg/random.hpp"

namespace secagg::multi {

// Shared mask symbols, one per retrieval. Each user holds a copy and may
// spend each symbol once.
class MaskPool {
 public:
  explicit MaskPool(Vector values, bool allow_reuse = false)
      : values_(std::move(values)),
        used_(values_.size(), false),
        allow_reuse_(allow_reuse) {}

  std::size_t size() const { return values_.size(); }

  FieldElement take(std::size_t index) {
    if (index >= values_.size()) {
      fail(ErrorCode::kStaleMask,
           "mask " + std::to_string(index) + " was never provisioned");
    }
    if (!allow_reuse_ && used_[index]) {
      fail(ErrorCode::kStaleMask,
           "mask " + std::to_string(index) + " already spent");
    }
    used_[index] = true;
    return values_[index];
  }

 private:
  Vector values_;
  std::vector<bool> used_;
  bool allow_reuse_;
};

// Identical at every user: all K keys plus the mask symbols.
struct KeyMaterial {
  std::vector<Vector> keys;
  Vector masks;

  friend bool operator==(const KeyMaterial&, const KeyMaterial&) = default;
};

inline std::size_t blocks_per_key(std::size_t l_padded, std::size_t u) {
  return l_padded / (u - 1);
}

// Retrieval r covers combination r / blocks and key block r % blocks.
inline std::size_t retrieval_count(std::size_t kc, std::size_t l_padded,
                                   std::size_t u) {
  return kc * blocks_per_key(l_padded, u);
}

inline KeyMaterial gen_keys(const ProblemParams& p, std::size_t l_padded,
                            Rng& rng) {
  require(p.kc >= 2 && p.kc < p.u, ErrorCode::kInvalidParams,
          "multi scheme requires 2 <= Kc < U");
  require(l_padded % (p.u - 1) == 0, ErrorCode::kInvalidParams,
          "L must be a multiple of U - 1");
  const FieldConfig field(p.q);
  KeyMaterial km;
  for (std::size_t i = 0; i < p.k; ++i) {
    km.keys.push_back(field.uniform_vector(l_padded, rng));
  }
  km.masks = field.uniform_vector(retrieval_count(p.kc, l_padded, p.u), rng);
  return km;
}

// X_i = W_i + Z_i
inline Vector round1_message(std::span<const FieldElement> w,
                             std::span<const FieldElement> z) {
  return add(w, z);
}

// prod_l (a - b_l) / (a_1 - b_l): 1 at a_1, 0 at every b_l.
inline FieldElement blind_weight(FieldElement a, const EvaluationPoints& pts) {
  FieldElement num{1, a.modulus()};
  FieldElement den{1, a.modulus()};
  const FieldElement a1 = pts.alphas.at(0);
  for (const auto& b : pts.betas) {
    num *= a - b;
    den *= a1 - b;
  }
  return num / den;
}

// prod_{l != j} (a - b_l)/(b_j - b_l) * (a - a_1)/(b_j - a_1): 1 at b_j, 0 at
// the other b_l and at a_1.
inline FieldElement demand_weight(FieldElement a, std::size_t j,
                                  const EvaluationPoints& pts) {
  const FieldElement bj = pts.betas.at(j);
  const FieldElement a1 = pts.alphas.at(0);
  FieldElement num = a - a1;
  FieldElement den = bj - a1;
  for (std::size_t l = 0; l < pts.betas.size(); ++l) {
    if (l != j) {
      num *= a - pts.betas[l];
      den *= bj - pts.betas[l];
    }
  }
  return num / den;
}

// Both weight families at one evaluation point; they depend only on the
// point, so a run computes them once per user.
struct PointWeights {
  FieldElement blind;
  Vector demand;
};

inline PointWeights point_weights(FieldElement a, const EvaluationPoints& pts) {
  PointWeights w{blind_weight(a, pts), {}};
  for (std::size_t j = 0; j < pts.betas.size(); ++j) {
    w.demand.push_back(demand_weight(a, j, pts));
  }
  return w;
}

// psi(a) = s * blind_weight(a)
inline FieldElement mask_value(FieldElement s, FieldElement a,
                               const EvaluationPoints& pts) {
  return s * blind_weight(a, pts);
}

// What user i receives for one retrieval: rho_j(., a_i) for j = 1..L', each a
// coefficient vector over the K keys.
struct RetrievalQuery {
  std::vector<Vector> components;

  friend bool operator==(const RetrievalQuery&,
                         const RetrievalQuery&) = default;
};

// The random functionals phi_1..phi_L' of one retrieval.
using Blinds = std::vector<Vector>;

inline Blinds draw_blinds(std::size_t k, std::size_t lprime,
                          const FieldConfig& field, Rng& rng) {
  Blinds b(lprime);
  for (auto& phi : b) phi = field.uniform_vector(k, rng);
  return b;
}

// Demand row n with coefficients of users outside u1 zeroed.
inline Vector restricted_row(const DemandMatrix& f, std::size_t n,
                             std::span<const std::size_t> u1) {
  Vector row(f.k(), FieldElement{0, f.matrix().modulus()});
  for (auto i : u1) row[i] = f.coefficient(n, i);
  return row;
}

inline RetrievalQuery query_for_point(std::span<const FieldElement> demand_row,
                                      const Blinds& blinds,
                                      const PointWeights& w) {
  require(blinds.size() == w.demand.size(), ErrorCode::kDimensionMismatch,
          "need one blind per retrieval point");
  RetrievalQuery q;
  for (std::size_t j = 0; j < blinds.size(); ++j) {
    Vector c = scale(w.blind, blinds[j]);
    axpy(c, w.demand[j], demand_row);
    q.components.push_back(std::move(c));
  }
  return q;
}

inline RetrievalQuery query_for_point(std::span<const FieldElement> demand_row,
                                      const Blinds& blinds, FieldElement alpha,
                                      const EvaluationPoints& pts) {
  return query_for_point(demand_row, blinds, point_weights(alpha, pts));
}

// Queries for every user in u1; users outside u1 get nothing.
inline std::map<std::size_t, RetrievalQuery> build_retrieval_queries(
    std::span<const FieldElement> demand_row, const Blinds& blinds,
    const std::map<std::size_t, PointWeights>& weights) {
  std::map<std::size_t, RetrievalQuery> out;
  for (const auto& [i, w] : weights) {
    out.emplace(i, query_for_point(demand_row, blinds, w));
  }
  return out;
}

inline std::map<std::size_t, PointWeights> user_weights(
    const EvaluationPoints& pts, std::span<const std::size_t> u1) {
  pts.validate();
  std::map<std::size_t, PointWeights> out;
  for (auto i : u1) out.emplace(i, point_weights(pts.alphas.at(i), pts));
  return out;
}

inline std::map<std::size_t, RetrievalQuery> build_retrieval_queries(
    std::span<const FieldElement> demand_row, const Blinds& blinds,
    const EvaluationPoints& pts, std::span<const std::size_t> u1) {
  return build_retrieval_queries(demand_row, blinds, user_weights(pts, u1));
}

// A_i = sum_j <rho_j(., a_i), (Z_1[b, j], ..., Z_K[b, j])> + psi(a_i)
// `mask` is psi(a_i), already evaluated.
inline FieldElement masked_answer(const RetrievalQuery& query,
                                  std::span<const Vector> keys,
                                  std::size_t block, FieldElement mask) {
  const std::size_t lprime = query.components.size();
  FieldElement acc = mask;
  for (std::size_t j = 0; j < lprime; ++j) {
    const auto& c = query.components[j];
    require(c.size() == keys.size(), ErrorCode::kDimensionMismatch,
            "query functional has the wrong width");
    for (std::size_t k = 0; k < keys.size(); ++k) {
      acc += c[k] * keys[k].at(block * lprime + j);
    }
  }
  return acc;
}

inline FieldElement answer(std::size_t i, const RetrievalQuery& query,
                           std::span<const Vector> keys, std::size_t block,
                           FieldElement s, const EvaluationPoints& pts) {
  require(query.components.size() == pts.betas.size(),
          ErrorCode::kDimensionMismatch,
          "query has the wrong number of components");
  return masked_answer(query, keys, block, mask_value(s, pts.alphas.at(i), pts));
}

struct Answer {
  FieldElement alpha;
  FieldElement value;
};

// Interpolates zeta from the first U answers (degree <= L') and reads off
// zeta(b_1..b_L'). Surplus answers must lie on the same polynomial.
inline Vector retrieve(std::span<const Answer> answers,
                       const EvaluationPoints& pts) {
  const std::size_t need = pts.betas.size() + 1;
  require(answers.size() >= need, ErrorCode::kInsufficientAnswers,
          "have " + std::to_string(answers.size()) + " answers, need " +
              std::to_string(need));
  std::vector<Point> points;
  for (std::size_t i = 0; i < need; ++i) {
    points.push_back({answers[i].alpha, answers[i].value});
  }
  const Polynomial zeta = lagrange_interpolate(points);
  for (std::size_t i = need; i < answers.size(); ++i) {
    require(eval(zeta, answers[i].alpha) == answers[i].value,
            ErrorCode::kInconsistentAnswers,
            "answer off the degree-L' codeword");
  }
  Vector out;
  for (const auto& b : pts.betas) out.push_back(eval(zeta, b));
  return out;
}

// For each n: concatenate the retrieved blocks into sum a_{n,i} Z_i and
// subtract it from sum a_{n,i} X_i. retrieved[n][b] holds L' symbols.
inline std::vector<Vector> server_decode(
    const std::map<std::size_t, Vector>& x,
    const std::vector<std::vector<Vector>>& retrieved, const DemandMatrix& f,
    std::span<const std::size_t> u1, std::size_t length) {
  const std::uint64_t q = f.matrix().modulus();
  require(retrieved.size() == f.kc(), ErrorCode::kMissingBlock,
          "need one retrieval set per combination");
  std::vector<Vector> out;
  for (std::size_t n = 0; n < f.kc(); ++n) {
    Vector key_combo;
    for (const auto& block : retrieved[n]) {
      key_combo.insert(key_combo.end(), block.begin(), block.end());
    }
    require(key_combo.size() == length, ErrorCode::kMissingBlock,
            "combination " + std::to_string(n + 1) + " has " +
                std::to_string(key_combo.size()) + " of " +
                std::to_string(length) + " key symbols");
    Vector acc(length, FieldElement{0, q});
    for (auto i : u1) {
      const auto it = x.find(i);
      if (it == x.end()) {
        fail(ErrorCode::kIncompleteTranscript,
             "missing round-1 message of user " + std::to_string(i + 1));
      }
      axpy(acc, f.coefficient(n, i), it->second);
    }
    out.push_back(sub(acc, key_combo));
  }
  return out;
}

// Planted breaks for verifier controls. Never set in real runs.
struct Tamper {
  bool no_masking = false;   // keys forced to zero
  bool reuse_mask = false;   // one mask per block, shared by all Kc retrievals
  bool leak_demand = false;  // blinds forced to zero, queries expose the row
};

// Mask index used by retrieval r.
inline std::size_t mask_index(std::size_t r, std::size_t blocks,
                              const Tamper& tamper) {
  return tamper.reuse_mask ? r % blocks : r;
}

inline std::size_t mask_count(std::size_t kc, std::size_t blocks,
                              const Tamper& tamper) {
  return tamper.reuse_mask ? blocks : kc * blocks;
}

// All randomness of one run except the inputs.
struct Realization {
  std::vector<Blinds> blinds;  // per retrieval
  std::vector<Vector> keys;
  Vector masks;
};

inline Realization draw_realization(const ProblemParams& p,
                                    std::size_t l_padded, Rng& rng,
                                    const Tamper& tamper = {}) {
  const FieldConfig field(p.q);
  const std::size_t blocks = blocks_per_key(l_padded, p.u);
  Realization r;
  for (std::size_t i = 0; i < retrieval_count(p.kc, l_padded, p.u); ++i) {
    r.blinds.push_back(draw_blinds(p.k, p.u - 1, field, rng));
  }
  for (std::size_t i = 0; i < p.k; ++i) {
    r.keys.push_back(field.uniform_vector(l_padded, rng));
  }
  r.masks = field.uniform_vector(mask_count(p.kc, blocks, tamper), rng);
  return r;
}

inline void execute(const ProblemParams& p, const DemandMatrix& f,
                    const InputSet& inputs, const DropoutSchedule& schedule,
                    const EvaluationPoints& pts, const Realization& realization,
                    Transcript& out, Tamper tamper = {}) {
  const FieldConfig field(p.q);
  const std::size_t length = inputs.length();
  const std::size_t lprime = p.u - 1;
  const std::size_t blocks = blocks_per_key(length, p.u);
  const std::size_t retrievals = retrieval_count(p.kc, length, p.u);
  require(length % lprime == 0, ErrorCode::kInvalidParams,
          "inputs must be padded to a multiple of U - 1");
  require(realization.blinds.size() == retrievals &&
              realization.masks.size() == mask_count(p.kc, blocks, tamper),
          ErrorCode::kDimensionMismatch,
          "realization does not match the parameters");
  out.scheme = SchemeId::kMulti;
  out.params = p;
  out.l_padded = length;
  out.u1 = schedule.u1;
  out.u2 = schedule.u2;

  // No round-1 queries.
  out.stage = Stage::kRound1Queries;
  out.round1_queries.assign(p.k, Vector{});

  out.stage = Stage::kKeyGeneration;
  KeyMaterial shared{realization.keys, realization.masks};
  if (tamper.no_masking) {
    for (auto& z : shared.keys) z = field.zeros(length);
  }

  out.stage = Stage::kRound1;
  out.round1_messages.clear();
  for (auto i : schedule.u1) {
    out.round1_messages[i] = round1_message(inputs.w[i], shared.keys[i]);
  }

  // All retrievals batched into one query message per survivor of round 1.
  out.stage = Stage::kRound2Queries;
  const auto weights = user_weights(pts, schedule.u1);
  std::vector<std::map<std::size_t, RetrievalQuery>> queries;
  for (std::size_t r = 0; r < retrievals; ++r) {
    const std::size_t n = r / blocks;
    Blinds blinds = realization.blinds[r];
    if (tamper.leak_demand) {
      for (auto& phi : blinds) phi = field.zeros(p.k);
    }
    queries.push_back(build_retrieval_queries(
        restricted_row(f, n, schedule.u1), blinds, weights));
  }
  out.round2_queries.clear();
  for (auto i : schedule.u1) {
    Vector& msg = out.round2_queries[i];
    for (std::size_t r = 0; r < retrievals; ++r) {
      for (const auto& c : queries[r].at(i).components) {
        msg.insert(msg.end(), c.begin(), c.end());
      }
    }
  }

  out.stage = Stage::kRound2;
  out.round2_answers.clear();
  for (auto i : schedule.u2) {
    MaskPool pool(shared.masks, tamper.reuse_mask);
    Vector& msg = out.round2_answers[i];
    for (std::size_t r = 0; r < retrievals; ++r) {
      const FieldElement s = pool.take(mask_index(r, blocks, tamper));
      msg.push_back(masked_answer(queries[r].at(i), shared.keys, r % blocks,
                                  s * weights.at(i).blind));
    }
  }

  out.stage = Stage::kDecode;
  std::vector<std::vector<Vector>> retrieved(p.kc);
  for (std::size_t r = 0; r < retrievals; ++r) {
    std::vector<Answer> answers;
    for (const auto& [i, msg] : out.round2_answers) {
      answers.push_back({pts.alphas.at(i), msg.at(r)});
    }
    retrieved[r / blocks].push_back(retrieve(answers, pts));
  }
  out.decoded =
      server_decode(out.round1_messages, retrieved, f, schedule.u1, length);
}

}  // namespace secagg::multi

#endif  // SECAGG_SCHEME_MULTI_HPP_
