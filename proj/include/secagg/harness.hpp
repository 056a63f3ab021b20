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

// Dropout simulator: runs a scheme end to end for a server and K users,
// seals the transcript only after the decoded output matches the plaintext
// demand, and checks measured rates against the converse region.

#ifndef SECAGG_HARNESS_HPP_
#define SECAGG_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/matrix.hpp"
#include "secagg/model.hpp"
#include "secagg/parallel.hpp"
#include "secagg/random.hpp"
#include "secagg/rational.hpp"
#include "secagg/scheme_baseline.hpp"
#include "secagg/scheme_multi.hpp"
#include "secagg/scheme_single.hpp"

namespace secagg {

// All subsets of `ground` with at least `min_size` elements, each sorted.
inline std::vector<std::vector<std::size_t>> subsets_at_least(
    const std::vector<std::size_t>& ground, std::size_t min_size) {
  require(ground.size() < 31, ErrorCode::kEnumerationTooLarge,
          "too many users to enumerate subsets");
  std::vector<std::vector<std::size_t>> out;
  const std::uint32_t n = static_cast<std::uint32_t>(ground.size());
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) < min_size) continue;
    std::vector<std::size_t> s;
    for (std::uint32_t b = 0; b < n; ++b) {
      if (mask & (1u << b)) s.push_back(ground[b]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Every (u1, u2) with u2 subset of u1 subset of [K] and |u2| >= U.
inline std::vector<DropoutSchedule> all_schedules(std::size_t k,
                                                  std::size_t u) {
  std::vector<std::size_t> everyone;
  for (std::size_t i = 0; i < k; ++i) everyone.push_back(i);
  std::vector<DropoutSchedule> out;
  for (auto& u1 : subsets_at_least(everyone, u)) {
    for (auto& u2 : subsets_at_least(u1, u)) out.push_back({u1, u2});
  }
  return out;
}

// Each user drops independently with probability `density` in each round;
// if fewer than U would remain, dropped users are revived uniformly at
// random until U survive.
inline DropoutSchedule random_schedule(std::size_t k, std::size_t u,
                                       double density, Rng& rng) {
  auto thin = [&](const std::vector<std::size_t>& pool) {
    std::vector<std::size_t> kept, dropped;
    for (auto i : pool) (rng.unit() < density ? dropped : kept).push_back(i);
    while (kept.size() < u) {
      const std::size_t pick = rng.below(dropped.size());
      kept.push_back(dropped[pick]);
      dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(kept.begin(), kept.end());
    return kept;
  };
  DropoutSchedule s;
  s.u1 = thin(DropoutSchedule::none(k).u1);
  s.u2 = thin(s.u1);
  return s;
}

struct DropoutModel {
  enum class Mode { kFixed, kRandom, kExhaustive, kAdversarialWorst };

  Mode mode = Mode::kFixed;
  DropoutSchedule fixed;  // kFixed
  double density = 0.0;   // kRandom: per-user, per-round drop probability
  std::size_t count = 1;  // kRandom: number of schedules
  std::uint64_t seed = 0;

  static DropoutModel fixed_schedule(DropoutSchedule s) {
    DropoutModel m;
    m.fixed = std::move(s);
    return m;
  }
};

struct RunOptions {
  bool debug_demand = false;
};

struct RunResult {
  Transcript transcript;
  std::optional<RateReport> report;

  bool ok() const { return transcript.verified && report.has_value(); }
};

// r1 >= 1 and r2 >= Kc/U; returns r2 / (Kc/U).
inline Rational converse_check(const RateReport& r) {
  require(r.r1 >= r.converse_r1 && r.r2 >= r.converse_r2,
          ErrorCode::kConverseViolation,
          "measured (" + r.r1.str() + ", " + r.r2.str() +
              ") lies below the converse corner (" + r.converse_r1.str() +
              ", " + r.converse_r2.str() + ")");
  return r.r2 / r.converse_r2;
}

// One full run. Scheme errors do not escape: they are recorded in
// transcript.failure with the stage that raised them.
inline RunResult run_protocol(SchemeId scheme, const ProblemParams& p,
                              const DemandMatrix& f, const InputSet& inputs,
                              const DropoutSchedule& schedule,
                              std::uint64_t seed,
                              const RunOptions& options = {}) {
  RunResult result;
  Transcript& t = result.transcript;
  t.scheme = scheme;
  t.params = p;
  t.seed = seed;
  t.u1 = schedule.u1;
  t.u2 = schedule.u2;
  try {
    t.stage = Stage::kValidate;
    validate_params(p, scheme);
    schedule.validate(p.k, p.u);
    require(f.kc() == p.kc && f.k() == p.k && f.matrix().modulus() == p.q,
            ErrorCode::kDimensionMismatch, "demand does not match params");
    require(inputs.w.size() == p.k && inputs.length() == p.l,
            ErrorCode::kDimensionMismatch, "inputs do not match params");

    Rng rng(seed);
    t.demand_digest = demand_digest(f, Rng::derive(seed, 0xd16e57));
    const std::size_t length = padded_length(p, scheme);
    t.l_padded = length;
    const InputSet padded = inputs.padded(length, p.q);
    const FieldConfig field(p.q);

    switch (scheme) {
      case SchemeId::kSingle: {
        const Matrix code = vandermonde(p.u, consecutive_points(p.k, field));
        single::execute(p, f, 0, padded, schedule, code,
                        single::draw_realization(p, length, rng), t);
        break;
      }
      case SchemeId::kMulti: {
        const auto pts = EvaluationPoints::standard(p.k, p.u - 1, field);
        multi::execute(p, f, padded, schedule, pts,
                       multi::draw_realization(p, length, rng), t);
        break;
      }
      case SchemeId::kBaseline: {
        const Matrix code = vandermonde(p.u, consecutive_points(p.k, field));
        baseline::execute(p, f, padded, schedule, code,
                          baseline::draw_realization(p, f, length, rng), t);
        break;
      }
    }

    t.stage = Stage::kVerify;
    require(t.decoded == plaintext_demand(f, padded, schedule.u1),
            ErrorCode::kDecodeMismatch,
            "decoded output differs from the plaintext demand");
    RateReport report = compute_rates(t);
    converse_check(report);
    t.verified = true;
    t.stage = Stage::kSealed;
    result.report = report;
  } catch (const Error& e) {
    t.failure = Failure{t.stage, e.code(), e.what()};
  }
  if (options.debug_demand) t.demand_cleartext = f.matrix();
  return result;
}

// Expands a dropout model into concrete schedules. kAdversarialWorst is
// resolved by adversarial_worst() and yields its single worst schedule.
std::vector<DropoutSchedule> schedules_for(const DropoutModel& model,
                                           const ProblemParams& p,
                                           SchemeId scheme);

struct WorstCase {
  DropoutSchedule schedule;
  std::size_t max_answer_symbols = 0;
  std::size_t min_answer_symbols = 0;
  std::size_t schedules_checked = 0;
  // Set when the per-user round-2 load varies with u1.
  bool schedule_dependent = false;
};

// Sweeps u1 (with u2 = u1, so every survivor answers) and returns the
// schedule with the largest per-user round-2 message. Above 16 users only
// one u1 per size is tried.
inline WorstCase adversarial_worst(const ProblemParams& p, SchemeId scheme,
                                   std::uint64_t seed = 0) {
  validate_params(p, scheme);
  Rng rng(seed);
  const DemandMatrix f = sample_demand(p, scheme, rng);
  const InputSet inputs = InputSet::random(p, rng);

  std::vector<std::vector<std::size_t>> candidates;
  if (p.k <= 16) {
    candidates = subsets_at_least(DropoutSchedule::none(p.k).u1, p.u);
  } else {
    for (std::size_t size = p.u; size <= p.k; ++size) {
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < size; ++i) s.push_back(i);
      candidates.push_back(std::move(s));
    }
  }

  WorstCase worst;
  worst.min_answer_symbols = SIZE_MAX;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const DropoutSchedule s{candidates[c], candidates[c]};
    const RunResult r =
        run_protocol(scheme, p, f, inputs, s, Rng::derive(seed, c));
    require(r.ok(), r.transcript.failure ? r.transcript.failure->code
                                         : ErrorCode::kDecodeMismatch,
            "run failed during worst-case sweep");
    std::size_t load = 0;
    for (const auto& [i, y] : r.transcript.round2_answers) {
      load = std::max(load, y.size());
    }
    if (c == 0 || load > worst.max_answer_symbols) {
      worst.max_answer_symbols = load;
      worst.schedule = s;
    }
    worst.min_answer_symbols = std::min(worst.min_answer_symbols, load);
    ++worst.schedules_checked;
  }
  worst.schedule_dependent =
      worst.min_answer_symbols != worst.max_answer_symbols;
  return worst;
}

inline std::vector<DropoutSchedule> schedules_for(const DropoutModel& model,
                                                  const ProblemParams& p,
                                                  SchemeId scheme) {
  switch (model.mode) {
    case DropoutModel::Mode::kFixed:
      model.fixed.validate(p.k, p.u);
      return {model.fixed};
    case DropoutModel::Mode::kRandom: {
      Rng rng(model.seed);
      std::vector<DropoutSchedule> out;
      for (std::size_t c = 0; c < model.count; ++c) {
        out.push_back(random_schedule(p.k, p.u, model.density, rng));
      }
      return out;
    }
    case DropoutModel::Mode::kExhaustive:
      return all_schedules(p.k, p.u);
    case DropoutModel::Mode::kAdversarialWorst:
      return {adversarial_worst(p, scheme, model.seed).schedule};
  }
  return {};
}

// Achievable points for one Kc next to the converse corner. For Kc = 1 the
// achievable scheme is the single scheme and the baseline coincides with it.
struct RateRegionPoint {
  std::size_t kc = 0;
  std::size_t u = 0;
  SchemeId scheme = SchemeId::kSingle;
  Rational r1;
  Rational r2;
  Rational baseline_r1;
  Rational baseline_r2;
  Rational converse_r1;
  Rational converse_r2;
  Rational gap;
};

// Measures each point from an actual run with no dropouts, at the smallest
// unpadded length for the scheme.
inline std::vector<RateRegionPoint> rate_sweep(std::size_t k, std::size_t u,
                                               std::size_t kc_min,
                                               std::size_t kc_max,
                                               std::uint64_t seed = 0) {
  std::vector<RateRegionPoint> out;
  const std::uint64_t q = default_modulus(k, u);
  for (std::size_t kc = kc_min; kc <= kc_max; ++kc) {
    require(kc >= 1 && kc < u, ErrorCode::kInvalidParams,
            "Kc = " + std::to_string(kc) + " outside 1 <= Kc < U");
    auto measure = [&](SchemeId s) {
      ProblemParams p{k, u, kc, q, padding_unit(s, u)};
      Rng rng(Rng::derive(seed, kc * 3 + static_cast<std::size_t>(s)));
      const DemandMatrix f = sample_demand(p, s, rng);
      const InputSet in = InputSet::random(p, rng);
      RunResult r = run_protocol(s, p, f, in, DropoutSchedule::none(k),
                                 rng.next());
      require(r.ok(), r.transcript.failure ? r.transcript.failure->code
                                           : ErrorCode::kDecodeMismatch,
              "rate sweep run failed");
      return *r.report;
    };
    RateRegionPoint pt;
    pt.kc = kc;
    pt.u = u;
    pt.scheme = kc == 1 ? SchemeId::kSingle : SchemeId::kMulti;
    const RateReport achievable = measure(pt.scheme);
    const RateReport base =
        kc == 1 ? achievable : measure(SchemeId::kBaseline);
    pt.r1 = achievable.r1;
    pt.r2 = achievable.r2;
    pt.baseline_r1 = base.r1;
    pt.baseline_r2 = base.r2;
    pt.converse_r1 = achievable.converse_r1;
    pt.converse_r2 = achievable.converse_r2;
    pt.gap = converse_check(achievable);
    out.push_back(pt);
  }
  return out;
}

struct SweepSummary {
  std::size_t runs = 0;
  std::size_t failures = 0;
  // Every schedule sharing a u1 decoded the same output.
  bool consistent_per_u1 = true;
  std::vector<std::pair<DropoutSchedule, Failure>> failed;
};

// Runs every schedule with the same demand and inputs; schedule c uses seed
// derive(seed, c) so the result is independent of `workers`.
inline SweepSummary sweep_schedules(SchemeId scheme, const ProblemParams& p,
                                    const DemandMatrix& f,
                                    const InputSet& inputs,
                                    const std::vector<DropoutSchedule>& all,
                                    std::uint64_t seed,
                                    std::size_t workers = 1) {
  std::vector<RunResult> results(all.size());
  parallel_for(all.size(), workers, [&](std::size_t c) {
    results[c] = run_protocol(scheme, p, f, inputs, all[c], Rng::derive(seed, c));
  });
  SweepSummary summary;
  std::map<std::vector<std::size_t>, std::vector<Vector>> by_u1;
  for (std::size_t c = 0; c < all.size(); ++c) {
    ++summary.runs;
    const Transcript& t = results[c].transcript;
    if (!results[c].ok()) {
      ++summary.failures;
      summary.failed.emplace_back(
          all[c], t.failure.value_or(Failure{t.stage, ErrorCode::kDecodeMismatch,
                                             "unsealed"}));
      continue;
    }
    auto [it, inserted] = by_u1.emplace(all[c].u1, t.decoded);
    if (!inserted && it->second != t.decoded) summary.consistent_per_u1 = false;
  }
  return summary;
}

}  // namespace secagg

#endif  // SECAGG_HARNESS_HPP_
