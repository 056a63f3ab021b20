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

// Secure aggregation of one private linear combination (Kc = 1).
//
// The server hides its coefficient row behind a uniform nonzero scalar t:
// user i receives Q_i = 1 / (t a_i), which is uniform on the nonzero
// elements whatever a_i is. Users mask X_i = W_i + Q_i Z_i. Keys are split
// into U sub-keys and MDS-coded offline; in round 2 each survivor j sends
// its coded share of sum_{i in u1} Z_i (L/U symbols), from which any U
// survivors let the server peel off the key sum and recover
// sum a_i W_i = t^{-1} sum Q_i^{-1} X_i - t^{-1} sum Z_i.

#ifndef SECAGG_SCHEME_SINGLE_HPP_
#define SECAGG_SCHEME_SINGLE_HPP_

#include <algorithm>
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

namespace secagg::single {

// Server-side query secret for one run. Move-only; a moved-from state is
// dead and any further use throws, so a blind cannot serve two runs.
class QueryState {
 public:
  static QueryState with_blind(std::span<const FieldElement> row,
                               FieldElement t) {
    require(!t.is_zero(), ErrorCode::kZeroCoefficient, "blind t is zero");
    QueryState s;
    s.t_ = t;
    s.queries_.reserve(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].is_zero()) {
        fail(ErrorCode::kZeroCoefficient,
             "coefficient of user " + std::to_string(i + 1) + " is zero");
      }
      s.queries_.push_back((t * row[i]).inverse());
    }
    s.live_ = true;
    return s;
  }

  static QueryState generate(std::span<const FieldElement> row, Rng& rng) {
    require(!row.empty(), ErrorCode::kDimensionMismatch, "empty demand row");
    const FieldConfig field(row[0].modulus());
    return with_blind(row, field.uniform_nonzero(rng));
  }

  QueryState(const QueryState&) = delete;
  QueryState& operator=(const QueryState&) = delete;
  QueryState(QueryState&& other) noexcept
      : t_(other.t_), queries_(std::move(other.queries_)), live_(other.live_) {
    other.live_ = false;
  }
  QueryState& operator=(QueryState&& other) noexcept {
    t_ = other.t_;
    queries_ = std::move(other.queries_);
    live_ = other.live_;
    other.live_ = false;
    return *this;
  }

  FieldElement blind() const {
    check_live();
    return t_;
  }
  const Vector& queries() const {
    check_live();
    return queries_;
  }
  FieldElement query(std::size_t i) const { return queries().at(i); }

 private:
  QueryState() = default;
  void check_live() const {
    require(live_, ErrorCode::kQueryStateConsumed,
            "query state already consumed by a run");
  }

  FieldElement t_;
  Vector queries_;
  bool live_ = false;
};

// P_i = (Z_i, ([Z~_j]_i : j != i)). The user's own share [Z~_i]_i is not
// stored; see own_share().
struct UserKeys {
  std::size_t user = 0;
  Vector own_key;
  std::map<std::size_t, Vector> shares;
};

// Splits a key of length L into U consecutive sub-keys of L/U symbols.
inline std::vector<Vector> split_subkeys(std::span<const FieldElement> z,
                                         std::size_t u) {
  require(u >= 1 && z.size() % u == 0, ErrorCode::kDimensionMismatch,
          "key length must be a multiple of U");
  const std::size_t width = z.size() / u;
  std::vector<Vector> out(u);
  for (std::size_t m = 0; m < u; ++m) {
    out[m].assign(z.begin() + m * width, z.begin() + (m + 1) * width);
  }
  return out;
}

inline Vector join_subkeys(std::span<const Vector> parts) {
  Vector out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// [Z~]_column = ([Z]_1, ..., [Z]_U) . code(:, column)
inline Vector own_share(std::span<const FieldElement> z, const Matrix& code,
                        std::size_t column) {
  const auto parts = split_subkeys(z, code.rows());
  Vector share(parts[0].size(), FieldElement{0, code.modulus()});
  for (std::size_t m = 0; m < code.rows(); ++m) {
    axpy(share, code(m, column), parts[m]);
  }
  return share;
}

// Deterministic key distribution for given keys Z_1..Z_K.
inline std::vector<UserKeys> distribute_keys(std::span<const Vector> keys,
                                             const Matrix& code) {
  require(keys.size() == code.cols(), ErrorCode::kDimensionMismatch,
          "need one key per code column");
  std::vector<UserKeys> users(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    users[i].user = i;
    users[i].own_key = keys[i];
  }
  for (std::size_t j = 0; j < keys.size(); ++j) {
    const auto shares = mds_encode(split_subkeys(keys[j], code.rows()), code);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i != j) users[i].shares.emplace(j, shares[i]);
    }
  }
  return users;
}

inline std::vector<Vector> draw_keys(std::size_t k, std::size_t length,
                                     const FieldConfig& field, Rng& rng) {
  std::vector<Vector> keys(k);
  for (auto& z : keys) z = field.uniform_vector(length, rng);
  return keys;
}

inline std::vector<UserKeys> gen_keys(const ProblemParams& p,
                                      std::size_t l_padded, const Matrix& code,
                                      Rng& rng) {
  require(l_padded % p.u == 0, ErrorCode::kInvalidParams,
          "L must be a multiple of U");
  require(code.rows() == p.u && code.cols() == p.k,
          ErrorCode::kDimensionMismatch, "code must be U x K");
  return distribute_keys(draw_keys(p.k, l_padded, FieldConfig(p.q), rng),
                         code);
}

// X_i = W_i + Q_i Z_i
inline Vector round1_message(std::span<const FieldElement> w, FieldElement q,
                             std::span<const FieldElement> z) {
  require(w.size() == z.size(), ErrorCode::kDimensionMismatch,
          "input and key lengths differ");
  Vector x(w.begin(), w.end());
  axpy(x, q, z);
  return x;
}

// Y_j = sum_{i in u1} [Z~_i]_j
inline Vector round2_message(std::size_t j, std::span<const std::size_t> u1,
                             const UserKeys& keys, const Matrix& code) {
  require(keys.user == j, ErrorCode::kDimensionMismatch,
          "key material belongs to another user");
  require(std::find(u1.begin(), u1.end(), j) != u1.end(),
          ErrorCode::kUserNotInSurvivors,
          "user " + std::to_string(j + 1) + " is not in u1");
  Vector y = own_share(keys.own_key, code, j);
  for (auto i : u1) {
    if (i == j) continue;
    const auto it = keys.shares.find(i);
    if (it == keys.shares.end()) {
      fail(ErrorCode::kDimensionMismatch,
           "missing share of user " + std::to_string(i + 1));
    }
    y = add(y, it->second);
  }
  return y;
}

// Recovers sum_{i in u1} a_i W_i from round-1 messages of u1 and at least U
// round-2 answers.
inline Vector server_decode(const std::map<std::size_t, Vector>& x,
                            const std::map<std::size_t, Vector>& y,
                            const QueryState& state,
                            std::span<const std::size_t> u1,
                            const Matrix& code) {
  require(y.size() >= code.rows(), ErrorCode::kInsufficientAnswers,
          "have " + std::to_string(y.size()) + " answers, need " +
              std::to_string(code.rows()));
  std::vector<CodedShare> shares;
  for (const auto& [j, symbols] : y) shares.push_back({j, symbols});
  const Vector key_sum = join_subkeys(rs_erasure_decode(shares, code));

  Vector acc(key_sum.size(), FieldElement{0, code.modulus()});
  for (auto i : u1) {
    const auto it = x.find(i);
    if (it == x.end()) {
      fail(ErrorCode::kIncompleteTranscript,
           "missing round-1 message of user " + std::to_string(i + 1));
    }
    axpy(acc, state.query(i).inverse(), it->second);
  }
  return scale(state.blind().inverse(), sub(acc, key_sum));
}

// Planted breaks for verifier controls. Never set in real runs.
struct Tamper {
  bool no_masking = false;   // keys forced to zero
  bool leak_demand = false;  // blind fixed to 1, so Q_i = 1 / a_i
};

// All randomness of one run except the inputs.
struct Realization {
  FieldElement t;
  std::vector<Vector> keys;
};

inline Realization draw_realization(const ProblemParams& p,
                                    std::size_t l_padded, Rng& rng) {
  const FieldConfig field(p.q);
  Realization r;
  r.t = field.uniform_nonzero(rng);
  r.keys = draw_keys(p.k, l_padded, field, rng);
  return r;
}

// Runs demand row `row` of f through the full two-round protocol. Inputs
// must already be padded to a multiple of U. Progress is recorded in
// out.stage so a caller catching an Error knows where it failed.
inline void execute(const ProblemParams& p, const DemandMatrix& f,
                    std::size_t row, const InputSet& inputs,
                    const DropoutSchedule& schedule, const Matrix& code,
                    const Realization& realization, Transcript& out,
                    Tamper tamper = {}) {
  const FieldConfig field(p.q);
  const std::size_t length = inputs.length();
  out.scheme = SchemeId::kSingle;
  out.params = p;
  out.l_padded = length;
  out.u1 = schedule.u1;
  out.u2 = schedule.u2;

  out.stage = Stage::kRound1Queries;
  QueryState state =
      QueryState::with_blind(f.row(row), tamper.leak_demand ? field.one()
                                                            : realization.t);
  out.round1_queries.clear();
  for (std::size_t i = 0; i < p.k; ++i) {
    out.round1_queries.push_back({state.query(i)});
  }

  out.stage = Stage::kKeyGeneration;
  std::vector<Vector> keys = realization.keys;
  if (tamper.no_masking) {
    for (auto& z : keys) z = field.zeros(length);
  }
  const auto users = distribute_keys(keys, code);

  out.stage = Stage::kRound1;
  out.round1_messages.clear();
  for (auto i : schedule.u1) {
    out.round1_messages[i] =
        round1_message(inputs.w[i], state.query(i), users[i].own_key);
  }

  // No round-2 queries: survivors only learn u1.
  out.stage = Stage::kRound2;
  out.round2_queries.clear();
  out.round2_answers.clear();
  for (auto j : schedule.u2) {
    out.round2_answers[j] = round2_message(j, schedule.u1, users[j], code);
  }

  out.stage = Stage::kDecode;
  out.decoded = {server_decode(out.round1_messages, out.round2_answers, state,
                               schedule.u1, code)};
}

}  // namespace secagg::single

#endif  // SECAGG_SCHEME_SINGLE_HPP_
