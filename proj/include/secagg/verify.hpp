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

// Executable decodability, security and privacy checks.
//
// Exact checks: the server view of a run with frozen queries is affine in
// (inputs, randomness), so security reduces to a rank test; query privacy is
// checked by enumerating the query randomness; at tiny sizes every
// information quantity is computed by full enumeration. The chi-square
// comparison is a sampled sanity check and is never exact.

#ifndef SECAGG_VERIFY_HPP_
#define SECAGG_VERIFY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/harness.hpp"
#include "secagg/matrix.hpp"
#include "secagg/model.hpp"
#include "secagg/parallel.hpp"
#include "secagg/random.hpp"
#include "secagg/scheme_baseline.hpp"
#include "secagg/scheme_multi.hpp"
#include "secagg/scheme_single.hpp"

namespace secagg::verify {

enum class Outcome { kPass, kFail, kSkipped };

constexpr std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kPass:
      return "PASS";
    case Outcome::kFail:
      return "FAIL";
    case Outcome::kSkipped:
      return "SKIPPED";
  }
  return "?";
}

struct Verdict {
  std::string check;
  Outcome outcome = Outcome::kSkipped;
  std::string detail;

  bool passed() const { return outcome == Outcome::kPass; }
};

// Planted breaks, mapped onto each scheme's tamper switches.
struct Plant {
  bool no_masking = false;
  bool reuse_mask = false;
  bool leak_demand = false;

  bool any() const { return no_masking || reuse_mask || leak_demand; }

  single::Tamper single_tamper() const {
    require(!reuse_mask, ErrorCode::kInvalidParams,
            "reuse_mask only applies to the multi scheme");
    return {no_masking, leak_demand};
  }
  multi::Tamper multi_tamper() const {
    return {no_masking, reuse_mask, leak_demand};
  }
};

// ---------------------------------------------------------------------------
// Small helpers.

inline InputSet unstack(std::span<const FieldElement> flat, std::size_t k,
                        std::size_t l) {
  require(flat.size() == k * l, ErrorCode::kDimensionMismatch,
          "stacked vector has the wrong length");
  InputSet in;
  for (std::size_t i = 0; i < k; ++i) {
    in.w.emplace_back(flat.begin() + i * l, flat.begin() + (i + 1) * l);
  }
  return in;
}

// Base-q digits of `index`, least significant first.
inline Vector digits(std::uint64_t index, std::size_t n, std::uint64_t q) {
  Vector out;
  out.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    out.push_back({index % q, q});
    index /= q;
  }
  return out;
}

// q^e, or nullopt past `limit`.
inline std::optional<std::uint64_t> bounded_pow(std::uint64_t q, std::size_t e,
                                                std::uint64_t limit) {
  std::uint64_t acc = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (acc > limit / q) return std::nullopt;
    acc *= q;
  }
  return acc;
}

// Packs field symbols into one integer, base q.
class Packer {
 public:
  explicit Packer(std::uint64_t q, std::uint64_t prefix = 0)
      : q_(q), acc_(prefix) {}
  void push(FieldElement e) { acc_ = acc_ * q_ + e.value(); }
  void push(std::span<const FieldElement> v) {
    for (const auto& e : v) push(e);
  }
  std::uint64_t value() const { return acc_; }

 private:
  std::uint64_t q_;
  std::uint64_t acc_ = 0;
};

inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  return Rng::derive(h ^ (v + 0x9e3779b97f4a7c15ULL), v);
}

inline std::uint64_t hash_symbols(std::span<const FieldElement> v,
                                  std::uint64_t h = 0) {
  for (const auto& e : v) h = mix64(h, e.value());
  return h;
}

// Every demand matrix the scheme accepts, in lexicographic order.
inline std::vector<DemandMatrix> enumerate_demands(
    const ProblemParams& p, SchemeId scheme,
    std::uint64_t limit = 1u << 20) {
  const auto total = bounded_pow(p.q, p.kc * p.k, limit);
  require(total.has_value(), ErrorCode::kEnumerationTooLarge,
          "too many demand matrices to enumerate");
  std::vector<DemandMatrix> out;
  for (std::uint64_t idx = 0; idx < *total; ++idx) {
    Vector entries = digits(idx, p.kc * p.k, p.q);
    std::reverse(entries.begin(), entries.end());
    try {
      out.push_back(
          validate_demand(Matrix(p.kc, p.k, std::move(entries)), p, scheme));
    } catch (const Error&) {
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frozen runs and their linear decomposition.

// Round-1 messages over u1, then round-2 answers over u2. Queries are not
// included: they are fixed by the frozen realization.
inline Vector server_view(const Transcript& t) {
  Vector v;
  for (const auto& [i, x] : t.round1_messages) v.insert(v.end(), x.begin(), x.end());
  for (const auto& [i, y] : t.round2_answers) v.insert(v.end(), y.begin(), y.end());
  return v;
}

// One run with the query realization fixed. The view is a function of the
// stacked inputs (user i, symbol l at i * L + l) and the flattened
// randomness (keys, then masks).
struct FrozenRun {
  SchemeId scheme = SchemeId::kSingle;
  ProblemParams params;  // l is the padded length
  DropoutSchedule schedule;
  std::size_t input_symbols = 0;
  std::size_t randomness_symbols = 0;
  std::function<Vector(std::span<const FieldElement>,
                       std::span<const FieldElement>)>
      view;
};

inline ProblemParams with_padded_length(ProblemParams p, SchemeId s) {
  p.l = padded_length(p, s);
  return p;
}

inline FrozenRun freeze_single(const ProblemParams& params,
                               const DemandMatrix& f,
                               const DropoutSchedule& schedule, FieldElement t,
                               single::Tamper tamper = {}) {
  const ProblemParams p = with_padded_length(params, SchemeId::kSingle);
  const Matrix code = vandermonde(p.u, consecutive_points(p.k, FieldConfig(p.q)));
  FrozenRun run{SchemeId::kSingle, p, schedule, p.k * p.l, p.k * p.l, {}};
  run.view = [=](std::span<const FieldElement> w,
                 std::span<const FieldElement> r) {
    const single::Realization real{t, unstack(r, p.k, p.l).w};
    Transcript out;
    single::execute(p, f, 0, unstack(w, p.k, p.l), schedule, code, real, out,
                    tamper);
    return server_view(out);
  };
  return run;
}

inline FrozenRun freeze_multi(const ProblemParams& params,
                              const DemandMatrix& f,
                              const DropoutSchedule& schedule,
                              std::vector<multi::Blinds> blinds,
                              multi::Tamper tamper = {}) {
  const ProblemParams p = with_padded_length(params, SchemeId::kMulti);
  const auto pts =
      EvaluationPoints::standard(p.k, p.u - 1, FieldConfig(p.q));
  const std::size_t masks =
      multi::mask_count(p.kc, multi::blocks_per_key(p.l, p.u), tamper);
  FrozenRun run{SchemeId::kMulti, p, schedule, p.k * p.l, p.k * p.l + masks,
                {}};
  run.view = [=](std::span<const FieldElement> w,
                 std::span<const FieldElement> r) {
    multi::Realization real;
    real.blinds = blinds;
    real.keys = unstack(r.first(p.k * p.l), p.k, p.l).w;
    real.masks.assign(r.begin() + p.k * p.l, r.end());
    Transcript out;
    multi::execute(p, f, unstack(w, p.k, p.l), schedule, pts, real, out,
                   tamper);
    return server_view(out);
  };
  return run;
}

inline FrozenRun freeze_baseline(const ProblemParams& params,
                                 const DemandMatrix& f,
                                 const DropoutSchedule& schedule,
                                 baseline::DemandRewrite rewrite,
                                 std::vector<FieldElement> blinds,
                                 single::Tamper tamper = {}) {
  const ProblemParams p = with_padded_length(params, SchemeId::kBaseline);
  const Matrix code = vandermonde(p.u, consecutive_points(p.k, FieldConfig(p.q)));
  const std::size_t per_rep = p.k * p.l;
  FrozenRun run{SchemeId::kBaseline, p, schedule, per_rep, p.kc * per_rep, {}};
  run.view = [=](std::span<const FieldElement> w,
                 std::span<const FieldElement> r) {
    baseline::Realization real{rewrite, {}};
    for (std::size_t n = 0; n < p.kc; ++n) {
      real.repetitions.push_back(
          {blinds.at(n), unstack(r.subspan(n * per_rep, per_rep), p.k, p.l).w});
    }
    Transcript out;
    baseline::execute(p, f, unstack(w, p.k, p.l), schedule, code, real, out,
                      tamper);
    return server_view(out);
  };
  return run;
}

// Draws the query randomness of `scheme` and freezes it.
inline FrozenRun sample_frozen_run(SchemeId scheme, const ProblemParams& p,
                                   const DemandMatrix& f,
                                   const DropoutSchedule& schedule, Rng& rng,
                                   const Plant& plant = {}) {
  const FieldConfig field(p.q);
  switch (scheme) {
    case SchemeId::kSingle:
      return freeze_single(p, f, schedule, field.uniform_nonzero(rng),
                           plant.single_tamper());
    case SchemeId::kMulti: {
      const ProblemParams pp = with_padded_length(p, scheme);
      std::vector<multi::Blinds> blinds;
      for (std::size_t r = 0; r < multi::retrieval_count(pp.kc, pp.l, pp.u);
           ++r) {
        blinds.push_back(multi::draw_blinds(pp.k, pp.u - 1, field, rng));
      }
      return freeze_multi(p, f, schedule, std::move(blinds),
                          plant.multi_tamper());
    }
    case SchemeId::kBaseline: {
      auto rewrite = baseline::rewrite_demand_for_baseline(f, rng);
      std::vector<FieldElement> ts;
      for (std::size_t n = 0; n < p.kc; ++n) {
        ts.push_back(field.uniform_nonzero(rng));
      }
      return freeze_baseline(p, f, schedule, std::move(rewrite), std::move(ts),
                             plant.single_tamper());
    }
  }
  fail(ErrorCode::kInvalidParams, "unknown scheme");
}

// view = offset + a * W + b * R for the frozen realization.
struct LinearViewDecomposition {
  Vector offset;
  Matrix a;
  Matrix b;
  ProblemParams params;
  DropoutSchedule schedule;
};

// Recovers a and b column by column from unit probes, then confirms them on
// `probes` random (W, R) pairs.
inline LinearViewDecomposition extract_linear_view(const FrozenRun& run,
                                                   Rng& rng,
                                                   std::size_t probes = 100) {
  const FieldConfig field(run.params.q);
  const Vector zero_w = field.zeros(run.input_symbols);
  const Vector zero_r = field.zeros(run.randomness_symbols);
  const Vector offset = run.view(zero_w, zero_r);
  const std::size_t rows = offset.size();

  auto probe_columns = [&](std::size_t count, bool inputs) {
    Matrix m(rows, count, field.modulus());
    for (std::size_t c = 0; c < count; ++c) {
      Vector w = zero_w;
      Vector r = zero_r;
      (inputs ? w : r)[c] = field.one();
      const Vector col = sub(run.view(w, r), offset);
      for (std::size_t row = 0; row < rows; ++row) m(row, c) = col[row];
    }
    return m;
  };
  LinearViewDecomposition d{offset, probe_columns(run.input_symbols, true),
                            probe_columns(run.randomness_symbols, false),
                            run.params, run.schedule};

  for (std::size_t t = 0; t < probes; ++t) {
    const Vector w = field.uniform_vector(run.input_symbols, rng);
    const Vector r = field.uniform_vector(run.randomness_symbols, rng);
    const Vector predicted = add(add(offset, d.a * w), d.b * r);
    require(predicted == run.view(w, r), ErrorCode::kNonlinearityDetected,
            "view is not affine in (inputs, randomness) on probe " +
                std::to_string(t));
  }
  return d;
}

// Rows (n, l), columns (i, l): a_{n,i} for i in u1, zero for dropped users.
inline Matrix demand_map(const DemandMatrix& f,
                         std::span<const std::size_t> u1, std::size_t l) {
  Matrix d(f.kc() * l, f.k() * l, f.matrix().modulus());
  for (std::size_t n = 0; n < f.kc(); ++n) {
    for (auto i : u1) {
      for (std::size_t s = 0; s < l; ++s) d(n * l + s, i * l + s) = f.coefficient(n, i);
    }
  }
  return d;
}

// PASS iff a * k lies in the column space of b for every kernel vector k of
// the demand map: two input sets with the same demanded output can then be
// matched by a shift of the uniform randomness, so their views are equally
// distributed.
inline Verdict security_rank_check(const LinearViewDecomposition& d,
                                   const DemandMatrix& f) {
  const Matrix dm = demand_map(f, d.schedule.u1, d.params.l);
  const auto kernel = kernel_basis(dm);
  Matrix ak(d.a.rows(), kernel.size(), d.a.modulus());
  for (std::size_t c = 0; c < kernel.size(); ++c) {
    const Vector col = d.a * kernel[c];
    for (std::size_t r = 0; r < col.size(); ++r) ak(r, c) = col[r];
  }
  const std::size_t rb = rank(d.b);
  const std::size_t joint = rank(ak.hconcat(d.b));
  return {"security",
          joint == rb ? Outcome::kPass : Outcome::kFail,
          "rank[A K | B] = " + std::to_string(joint) +
              ", rank B = " + std::to_string(rb) +
              ", kernel dim = " + std::to_string(kernel.size())};
}

struct SecuritySummary {
  std::size_t trials = 0;
  std::size_t passes = 0;
  std::string first_failure;

  Verdict verdict() const {
    return {"security",
            passes == trials ? Outcome::kPass : Outcome::kFail,
            std::to_string(passes) + "/" + std::to_string(trials) +
                " realizations pass" +
                (first_failure.empty() ? "" : "; first failure: " + first_failure)};
  }
};

// Each trial draws a demand, a dropout schedule (u2 = u1, each user dropped
// with probability `dropout`) and a query realization, then runs the rank
// check.
inline SecuritySummary security_trials(SchemeId scheme, const ProblemParams& p,
                                       std::size_t trials, std::uint64_t seed,
                                       const Plant& plant = {},
                                       double dropout = 0.3) {
  validate_params(p, scheme);
  SecuritySummary s;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(Rng::derive(seed, t));
    const DemandMatrix f = sample_demand(p, scheme, rng);
    DropoutSchedule sched = random_schedule(p.k, p.u, dropout, rng);
    sched.u2 = sched.u1;
    const FrozenRun run = sample_frozen_run(scheme, p, f, sched, rng, plant);
    const Verdict v = security_rank_check(extract_linear_view(run, rng, 20), f);
    ++s.trials;
    if (v.passed()) {
      ++s.passes;
    } else if (s.first_failure.empty()) {
      s.first_failure = "trial " + std::to_string(t) + ": " + v.detail;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Query privacy by enumeration.

using Histogram = std::map<std::vector<std::uint64_t>, std::uint64_t>;

// Distribution of Q_i over every blind t.
inline Histogram single_query_histogram(std::span<const FieldElement> row,
                                        std::size_t user,
                                        single::Tamper tamper = {}) {
  const std::uint64_t q = row[0].modulus();
  Histogram h;
  for (std::uint64_t t = 1; t < q; ++t) {
    const FieldElement blind{tamper.leak_demand ? 1 : t, q};
    ++h[{single::QueryState::with_blind(row, blind).query(user).value()}];
  }
  return h;
}

// Distribution of component j of user i's query for combination n, over
// every phi_j in GF(q)^K.
inline Histogram multi_query_histogram(const ProblemParams& p,
                                       const DemandMatrix& f,
                                       std::span<const std::size_t> u1,
                                       std::size_t n, std::size_t user,
                                       std::size_t j,
                                       multi::Tamper tamper = {},
                                       std::uint64_t limit = 1u << 22) {
  const auto total = bounded_pow(p.q, p.k, limit);
  require(total.has_value(), ErrorCode::kEnumerationTooLarge,
          "q^K exceeds the enumeration limit");
  const FieldConfig field(p.q);
  const auto pts = EvaluationPoints::standard(p.k, p.u - 1, field);
  const Vector row = multi::restricted_row(f, n, u1);
  multi::Blinds blinds(p.u - 1, field.zeros(p.k));
  Histogram h;
  for (std::uint64_t idx = 0; idx < *total; ++idx) {
    blinds[j] = tamper.leak_demand ? field.zeros(p.k) : digits(idx, p.k, p.q);
    const auto query =
        multi::query_for_point(row, blinds, pts.alphas.at(user), pts);
    ++h[raw_values(query.components[j])];
  }
  return h;
}

// Every demand must give the same, exactly uniform, query distribution at
// `user`: the nonzero elements once each for the single scheme, every vector
// of GF(q)^K once each for the multi scheme.
inline Verdict privacy_query_uniformity(SchemeId scheme, const ProblemParams& p,
                                        std::span<const DemandMatrix> demands,
                                        std::size_t user,
                                        const Plant& plant = {},
                                        std::uint64_t limit = 1u << 22) {
  require(!demands.empty(), ErrorCode::kInvalidParams, "no demands given");
  require(user < p.k, ErrorCode::kInvalidParams, "user out of range");
  const std::string who = "user " + std::to_string(user + 1);
  std::vector<Histogram> seen;
  std::size_t expected_support = 0;

  if (scheme == SchemeId::kSingle) {
    expected_support = p.q - 1;
    for (const auto& f : demands) {
      seen.push_back(single_query_histogram(f.row(0), user, plant.single_tamper()));
    }
  } else if (scheme == SchemeId::kMulti) {
    expected_support = *bounded_pow(p.q, p.k, limit);
    const auto u1 = DropoutSchedule::none(p.k).u1;
    for (const auto& f : demands) {
      for (std::size_t n = 0; n < f.kc(); ++n) {
        for (std::size_t j = 0; j + 1 < p.u; ++j) {
          seen.push_back(multi_query_histogram(p, f, u1, n, user, j,
                                               plant.multi_tamper(), limit));
        }
      }
    }
  } else {
    return {"privacy", Outcome::kSkipped,
            "query enumeration is defined for the single and multi schemes"};
  }

  for (std::size_t h = 0; h < seen.size(); ++h) {
    const bool uniform =
        seen[h].size() == expected_support &&
        std::all_of(seen[h].begin(), seen[h].end(),
                    [](const auto& kv) { return kv.second == 1; });
    if (!uniform) {
      return {"privacy", Outcome::kFail,
              who + ": query histogram " + std::to_string(h) + " has " +
                  std::to_string(seen[h].size()) + " of " +
                  std::to_string(expected_support) +
                  " values or unequal counts"};
    }
    if (seen[h] != seen[0]) {
      return {"privacy", Outcome::kFail,
              who + ": query distributions differ across demands"};
    }
  }
  return {"privacy", Outcome::kPass,
          who + ": " + std::to_string(seen.size()) +
              " histograms, each uniform over " +
              std::to_string(expected_support) + " values"};
}

// ---------------------------------------------------------------------------
// Exhaustive information quantities for the single scheme.

// Entropy in base-q units of the empirical distribution of a sorted sample.
inline double entropy_sorted(std::span<const std::uint64_t> sorted,
                             std::uint64_t q) {
  if (sorted.empty()) return 0.0;
  const double n = static_cast<double>(sorted.size());
  double h = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double p = static_cast<double>(j - i) / n;
    h -= p * std::log(p);
    i = j;
  }
  return std::max(0.0, h / std::log(static_cast<double>(q)));
}

using CountVector = std::vector<std::pair<std::uint64_t, std::uint64_t>>;

inline CountVector counts_sorted(std::span<const std::uint64_t> sorted) {
  CountVector out;
  for (auto v : sorted) {
    if (out.empty() || out.back().first != v) out.push_back({v, 0});
    ++out.back().second;
  }
  return out;
}

struct MiReport {
  SchemeId scheme = SchemeId::kSingle;
  ProblemParams params;
  DropoutSchedule schedule;
  std::uint64_t demands = 0;
  std::uint64_t states = 0;

  // I(W; server view | demanded output), averaged over demands; the view
  // holds the queries, X over u1 and Y over u2.
  double security_mi = 0.0;
  bool security_zero = false;
  // H(demanded output | server view).
  double decode_entropy = 0.0;
  bool decode_zero = false;
  // I(F; view of user i) with F uniform over the enumerated demands.
  std::vector<double> privacy_mi;
  std::vector<bool> privacy_zero;

  bool all_zero() const {
    return security_zero && decode_zero &&
           std::all_of(privacy_zero.begin(), privacy_zero.end(),
                       [](bool b) { return b; });
  }
};

struct MiOptions {
  DropoutSchedule schedule;  // empty u1 means no dropouts
  Plant plant;
  std::uint64_t max_states = 1ull << 27;
  std::size_t max_demands = 0;  // 0 = every valid demand
};

// Enumerates every demand, input, key and blind. The zero claims are decided
// by exact equality of integer count distributions; the reported MI values
// are the corresponding entropies in base-q units.
inline MiReport mi_exhaustive(const ProblemParams& params,
                              const MiOptions& options = {}) {
  validate_params(params, SchemeId::kSingle);
  const ProblemParams p = with_padded_length(params, SchemeId::kSingle);
  const single::Tamper tamper = options.plant.single_tamper();
  const FieldConfig field(p.q);
  const std::uint64_t q = p.q;
  const DropoutSchedule sched =
      options.schedule.u1.empty() ? DropoutSchedule::none(p.k) : options.schedule;
  sched.validate(p.k, p.u);

  auto demands = enumerate_demands(p, SchemeId::kSingle);
  if (options.max_demands != 0 && demands.size() > options.max_demands) {
    demands.erase(demands.begin() + static_cast<std::ptrdiff_t>(options.max_demands),
                  demands.end());
  }
  const std::size_t kl = p.k * p.l;
  const auto w_count = bounded_pow(q, kl, options.max_states);
  require(w_count.has_value(), ErrorCode::kEnumerationTooLarge,
          "input space exceeds the state limit");
  const std::uint64_t per_demand_states = *w_count * *w_count * (q - 1);
  require(*w_count <= options.max_states / *w_count / (q - 1) &&
              per_demand_states <= options.max_states / demands.size(),
          ErrorCode::kEnumerationTooLarge,
          "enumeration exceeds " + std::to_string(options.max_states) +
              " states");

  const std::size_t share = p.l / p.u;
  const std::size_t view_symbols =
      p.k + sched.u1.size() * p.l + sched.u2.size() * share;
  require(bounded_pow(q, view_symbols + p.l,
                      std::numeric_limits<std::uint64_t>::max())
              .has_value(),
          ErrorCode::kEnumerationTooLarge, "server view does not pack into 64 bits");
  const std::size_t user_symbols = 3 * p.l + p.k * share + 1;
  require(bounded_pow(q, user_symbols, std::numeric_limits<std::uint64_t>::max())
              .has_value(),
          ErrorCode::kEnumerationTooLarge, "user view does not pack into 64 bits");

  const Matrix code = vandermonde(p.u, consecutive_points(p.k, field));

  MiReport report;
  report.scheme = SchemeId::kSingle;
  report.params = p;
  report.schedule = sched;
  report.demands = demands.size();
  report.states = per_demand_states * demands.size();
  report.security_zero = true;
  report.decode_zero = true;

  // Everything that depends on the keys alone: the transmitted keys, the
  // round-2 answers over u2 and each user's key material (own key, shares,
  // own answer), packed once per key set.
  struct KeyState {
    std::vector<Vector> held;
    std::uint64_t answers = 0;
    std::vector<std::uint64_t> user_keys;
  };
  std::vector<KeyState> key_states(*w_count);
  for (std::uint64_t zi = 0; zi < *w_count; ++zi) {
    KeyState& ks = key_states[zi];
    ks.held = unstack(digits(zi, kl, q), p.k, p.l).w;
    if (tamper.no_masking) {
      for (auto& z : ks.held) z = field.zeros(p.l);
    }
    const auto users = single::distribute_keys(ks.held, code);
    std::map<std::size_t, Vector> answers;
    for (auto j : sched.u2) {
      answers[j] = single::round2_message(j, sched.u1, users[j], code);
    }
    Packer a(q);
    for (const auto& [j, y] : answers) a.push(y);
    ks.answers = a.value();
    for (std::size_t i = 0; i < p.k; ++i) {
      Packer u(q);
      u.push(users[i].own_key);
      for (const auto& [j, s] : users[i].shares) u.push(s);
      if (auto it = answers.find(i); it != answers.end()) u.push(it->second);
      ks.user_keys.push_back(u.value());
    }
  }
  const std::uint64_t answer_space =
      *bounded_pow(q, sched.u2.size() * share, UINT64_MAX);

  std::vector<std::vector<CountVector>> user_hists(p.k);
  double security_sum = 0.0;
  double decode_sum = 0.0;

  for (const auto& f : demands) {
    // Queries for every blind.
    std::vector<Vector> queries;
    for (std::uint64_t t = 1; t < q; ++t) {
      const FieldElement blind{tamper.leak_demand ? 1 : t, q};
      queries.push_back(single::QueryState::with_blind(f.row(0), blind).queries());
    }

    // (output, view) for every state; per-input sorted view lists.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> joint;
    joint.reserve(per_demand_states);
    std::map<std::uint64_t, std::vector<std::uint64_t>> reference;
    std::vector<std::vector<std::uint64_t>> user_views(p.k);
    double h_view_given_w = 0.0;

    for (std::uint64_t wi = 0; wi < *w_count; ++wi) {
      const InputSet in = unstack(digits(wi, kl, q), p.k, p.l);
      Packer out_pack(q);
      out_pack.push(plaintext_demand(f, in, sched.u1)[0]);
      const std::uint64_t output = out_pack.value();

      std::vector<std::uint64_t> views;
      views.reserve(*w_count * (q - 1));
      for (const KeyState& ks : key_states) {
        for (const Vector& qs : queries) {
          Packer v(q);
          v.push(qs);
          std::vector<Vector> x(p.k);
          for (auto i : sched.u1) {
            x[i] = single::round1_message(in.w[i], qs[i], ks.held[i]);
            v.push(x[i]);
          }
          const std::uint64_t view = v.value() * answer_space + ks.answers;
          views.push_back(view);
          joint.push_back({output, view});

          for (std::size_t i = 0; i < p.k; ++i) {
            Packer u(q, ks.user_keys[i]);
            u.push(in.w[i]);
            u.push(qs[i]);
            u.push(x[i]);
            user_views[i].push_back(u.value());
          }
        }
      }
      std::sort(views.begin(), views.end());
      h_view_given_w += entropy_sorted(views, q);
      auto [it, inserted] = reference.emplace(output, views);
      if (!inserted && it->second != views) report.security_zero = false;
    }
    h_view_given_w /= static_cast<double>(*w_count);

    // H(V | O): group by output.
    std::sort(joint.begin(), joint.end());
    double h_view_given_out = 0.0;
    for (std::size_t i = 0; i < joint.size();) {
      std::size_t j = i;
      std::vector<std::uint64_t> group;
      while (j < joint.size() && joint[j].first == joint[i].first) {
        group.push_back(joint[j].second);
        ++j;
      }
      h_view_given_out += static_cast<double>(group.size()) /
                          static_cast<double>(joint.size()) *
                          entropy_sorted(group, q);
      i = j;
    }
    security_sum += std::max(0.0, h_view_given_out - h_view_given_w);

    // H(O | V) = H(V, O) - H(V); exact zero iff no view maps to two outputs.
    std::sort(joint.begin(), joint.end(), [](const auto& a, const auto& b) {
      return std::tie(a.second, a.first) < std::tie(b.second, b.first);
    });
    std::vector<std::uint64_t> view_only;
    view_only.reserve(joint.size());
    for (std::size_t i = 0; i < joint.size(); ++i) {
      view_only.push_back(joint[i].second);
      if (i > 0 && joint[i].second == joint[i - 1].second &&
          joint[i].first != joint[i - 1].first) {
        report.decode_zero = false;
      }
    }
    {
      std::vector<std::uint64_t> packed_pairs;
      packed_pairs.reserve(joint.size());
      const std::uint64_t out_space = *bounded_pow(q, p.l, UINT64_MAX);
      for (const auto& [o, v] : joint) packed_pairs.push_back(v * out_space + o);
      std::sort(packed_pairs.begin(), packed_pairs.end());
      decode_sum += std::max(0.0, entropy_sorted(packed_pairs, q) -
                                      entropy_sorted(view_only, q));
    }

    for (std::size_t i = 0; i < p.k; ++i) {
      std::sort(user_views[i].begin(), user_views[i].end());
      user_hists[i].push_back(counts_sorted(user_views[i]));
    }
  }

  const double nd = static_cast<double>(demands.size());
  report.security_mi = security_sum / nd;
  report.decode_entropy = decode_sum / nd;

  // I(F; V_i) = H(V_i) - H(V_i | F).
  for (std::size_t i = 0; i < p.k; ++i) {
    bool same = true;
    std::map<std::uint64_t, std::uint64_t> pooled;
    double h_given_f = 0.0;
    for (const auto& h : user_hists[i]) {
      same = same && h == user_hists[i][0];
      double total = 0.0;
      for (const auto& [v, c] : h) total += static_cast<double>(c);
      double hf = 0.0;
      for (const auto& [v, c] : h) {
        pooled[v] += c;
        const double pr = static_cast<double>(c) / total;
        hf -= pr * std::log(pr);
      }
      h_given_f += hf / std::log(static_cast<double>(q));
    }
    h_given_f /= nd;
    double total = 0.0;
    for (const auto& [v, c] : pooled) total += static_cast<double>(c);
    double h = 0.0;
    for (const auto& [v, c] : pooled) {
      const double pr = static_cast<double>(c) / total;
      h -= pr * std::log(pr);
    }
    h /= std::log(static_cast<double>(q));
    report.privacy_mi.push_back(std::max(0.0, h - h_given_f));
    report.privacy_zero.push_back(same);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sampled two-sample comparison of per-user views for the multi scheme.

struct FeatureResult {
  std::size_t user = 0;
  std::string feature;
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

struct DistributionReport {
  std::size_t samples = 0;
  double alpha = 0.01;
  double threshold = 0.0;  // Bonferroni-corrected
  std::vector<FeatureResult> features;
  Verdict verdict;
};

// Two-sample chi-square on bucket counts; empty buckets are dropped.
inline FeatureResult chi_square_two_sample(std::span<const std::uint64_t> a,
                                           std::span<const std::uint64_t> b) {
  double na = 0.0;
  double nb = 0.0;
  for (auto c : a) na += static_cast<double>(c);
  for (auto c : b) nb += static_cast<double>(c);
  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  FeatureResult r;
  std::size_t used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double oa = static_cast<double>(a[i]);
    const double ob = static_cast<double>(b[i]);
    if (oa + ob == 0.0) continue;
    const double diff = ka * oa - kb * ob;
    r.statistic += diff * diff / (oa + ob);
    ++used;
  }
  r.dof = used > 0 ? used - 1 : 0;
  r.p_value = r.dof == 0 ? 1.0
                         : boost::math::gamma_q(static_cast<double>(r.dof) / 2.0,
                                                r.statistic / 2.0);
  return r;
}

struct CompareOptions {
  std::size_t samples = 100000;
  double alpha = 0.01;
  std::size_t hash_buckets = 64;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  Plant plant;
};

// Runs the multi scheme `samples` times under each demand (no dropouts) and
// compares every user's view. Features per user: each coefficient of the
// first query functional (q buckets), a hash of the whole round-2 query and a
// hash of the whole view (hash_buckets each).
inline DistributionReport view_distribution_compare(
    const ProblemParams& params, const DemandMatrix& f1, const DemandMatrix& f2,
    const CompareOptions& options = {}) {
  validate_params(params, SchemeId::kMulti);
  const ProblemParams p = with_padded_length(params, SchemeId::kMulti);
  const std::size_t max_buckets = std::max<std::size_t>(p.q, options.hash_buckets);
  require(options.samples >= 5 * max_buckets, ErrorCode::kInsufficientSamples,
          "need at least " + std::to_string(5 * max_buckets) +
              " samples for expected bucket counts of 5");
  const FieldConfig field(p.q);
  const auto pts = EvaluationPoints::standard(p.k, p.u - 1, field);
  const multi::Tamper tamper = options.plant.multi_tamper();
  const DropoutSchedule sched = DropoutSchedule::none(p.k);
  const std::size_t features = p.k + 2;

  // counts[demand][user][feature][bucket]
  using Counts = std::vector<std::vector<std::vector<std::uint64_t>>>;
  auto fresh = [&] {
    Counts c(p.k, std::vector<std::vector<std::uint64_t>>(features));
    for (auto& per_user : c) {
      for (std::size_t ft = 0; ft < features; ++ft) {
        per_user[ft].assign(ft < p.k ? p.q : options.hash_buckets, 0);
      }
    }
    return c;
  };

  auto sample_demand_views = [&](const DemandMatrix& f, std::uint64_t stream) {
    const std::size_t chunks = std::max<std::size_t>(1, options.workers) * 4;
    std::vector<Counts> partial(chunks, fresh());
    parallel_for(chunks, options.workers, [&](std::size_t chunk) {
      Counts& c = partial[chunk];
      for (std::size_t s = chunk; s < options.samples; s += chunks) {
        Rng rng(Rng::derive(Rng::derive(options.seed, stream), s));
        const InputSet in = InputSet::random(p, rng);
        const auto real = multi::draw_realization(p, p.l, rng, tamper);
        Transcript tr;
        multi::execute(p, f, in, sched, pts, real, tr, tamper);
        for (std::size_t i = 0; i < p.k; ++i) {
          const Vector& query = tr.round2_queries.at(i);
          for (std::size_t ft = 0; ft < p.k; ++ft) ++c[i][ft][query.at(ft).value()];
          ++c[i][p.k][hash_symbols(query) % options.hash_buckets];
          std::uint64_t h = hash_symbols(in.w[i]);
          for (const auto& z : real.keys) h = hash_symbols(z, h);
          h = hash_symbols(real.masks, h);
          h = hash_symbols(query, h);
          h = hash_symbols(tr.round1_messages.at(i), h);
          h = hash_symbols(tr.round2_answers.at(i), h);
          ++c[i][p.k + 1][h % options.hash_buckets];
        }
      }
    });
    Counts total = fresh();
    for (const auto& c : partial) {
      for (std::size_t i = 0; i < p.k; ++i) {
        for (std::size_t ft = 0; ft < features; ++ft) {
          for (std::size_t b = 0; b < c[i][ft].size(); ++b) {
            total[i][ft][b] += c[i][ft][b];
          }
        }
      }
    }
    return total;
  };

  const Counts a = sample_demand_views(f1, 1);
  const Counts b = sample_demand_views(f2, 2);

  DistributionReport report;
  report.samples = options.samples;
  report.alpha = options.alpha;
  report.threshold = options.alpha / static_cast<double>(p.k * features);
  const FeatureResult* worst = nullptr;
  for (std::size_t i = 0; i < p.k; ++i) {
    for (std::size_t ft = 0; ft < features; ++ft) {
      FeatureResult r = chi_square_two_sample(a[i][ft], b[i][ft]);
      r.user = i;
      r.feature = ft < p.k ? "query_coefficient_" + std::to_string(ft + 1)
                           : (ft == p.k ? "query_hash" : "view_hash");
      report.features.push_back(r);
    }
  }
  for (const auto& r : report.features) {
    if (worst == nullptr || r.p_value < worst->p_value) worst = &r;
  }
  const bool pass = worst->p_value >= report.threshold;
  report.verdict = {"privacy_sampled", pass ? Outcome::kPass : Outcome::kFail,
                    "min p = " + std::to_string(worst->p_value) + " (user " +
                        std::to_string(worst->user + 1) + ", " + worst->feature +
                        "), threshold " + std::to_string(report.threshold)};
  return report;
}

// Decodes a batch of random instances and compares against the plaintext.
inline Verdict decode_trials(SchemeId scheme, const ProblemParams& p,
                             std::size_t trials, std::uint64_t seed,
                             std::size_t workers = 1) {
  validate_params(p, scheme);
  std::vector<char> ok(trials, 0);
  std::vector<std::string> why(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    Rng rng(Rng::derive(seed, t));
    const DemandMatrix f = sample_demand(p, scheme, rng);
    const InputSet in = InputSet::random(p, rng);
    const DropoutSchedule sched = random_schedule(p.k, p.u, 0.3, rng);
    const RunResult r = run_protocol(scheme, p, f, in, sched, rng.next());
    ok[t] = r.ok();
    if (r.transcript.failure) why[t] = r.transcript.failure->message;
  });
  const auto passes = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  std::string detail = std::to_string(passes) + "/" + std::to_string(trials) +
                       " runs decode the plaintext demand";
  for (std::size_t t = 0; t < trials; ++t) {
    if (!ok[t]) {
      detail += "; first failure: " + why[t];
      break;
    }
  }
  return {"decode", passes == trials ? Outcome::kPass : Outcome::kFail, detail};
}

}  // namespace secagg::verify

#endif  // SECAGG_VERIFY_HPP_
