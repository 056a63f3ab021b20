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

// Repetition baseline: one independent single-combination run per demand
// row, with fresh blind and fresh keys per repetition.

#ifndef SECAGG_SCHEME_BASELINE_HPP_
#define SECAGG_SCHEME_BASELINE_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/matrix.hpp"
#include "secagg/model.hpp"
#include "secagg/random.hpp"
#include "secagg/scheme_single.hpp"

namespace secagg::baseline {

// The single scheme cannot run a row with a zero coefficient. The server
// instead runs the rows of mix * F (all entries nonzero) and applies
// inverse(mix) to the decoded outputs.
struct DemandRewrite {
  Matrix mixed;
  Matrix mix;
  Matrix unmix;
  bool identity = true;
};

inline bool all_nonzero(const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (const auto& e : m.row(r)) {
      if (e.is_zero()) return false;
    }
  }
  return true;
}

inline DemandRewrite rewrite_demand_for_baseline(const DemandMatrix& f,
                                                 Rng& rng,
                                                 int max_tries = 1000) {
  const Matrix& m = f.matrix();
  const std::size_t kc = f.kc();
  if (all_nonzero(m)) {
    const Matrix id = Matrix::identity(kc, m.modulus());
    return {m, id, id, true};
  }
  // Row by row: each mix row must give an all-nonzero combination and stay
  // independent of the rows already chosen.
  const FieldConfig field(m.modulus());
  Matrix mix(0, kc, m.modulus());
  for (std::size_t r = 0; r < kc; ++r) {
    bool found = false;
    for (int attempt = 0; attempt < max_tries && !found; ++attempt) {
      const Vector c = field.uniform_vector(kc, rng);
      if (!all_nonzero(Matrix(1, kc, c) * m)) continue;
      Matrix grown(r + 1, kc, m.modulus());
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < kc; ++j) grown(i, j) = mix(i, j);
      }
      for (std::size_t j = 0; j < kc; ++j) grown(r, j) = c[j];
      if (rank(grown) != r + 1) continue;
      mix = std::move(grown);
      found = true;
    }
    require(found, ErrorCode::kRetryExhausted,
            "no all-nonzero row mix found; the field is too small for this "
            "demand");
  }
  Matrix mixed = mix * m;
  return {std::move(mixed), mix, inverse(mix), false};
}

// Kc independent single-scheme states sharing one dropout schedule.
struct BaselineRun {
  DemandRewrite rewrite;
  std::vector<Transcript> repetitions;
};

struct Realization {
  DemandRewrite rewrite;
  std::vector<single::Realization> repetitions;
};

inline Realization draw_realization(const ProblemParams& p,
                                    const DemandMatrix& f,
                                    std::size_t l_padded, Rng& rng) {
  Realization r{rewrite_demand_for_baseline(f, rng), {}};
  for (std::size_t n = 0; n < p.kc; ++n) {
    r.repetitions.push_back(single::draw_realization(p, l_padded, rng));
  }
  return r;
}

// Per-user messages are the concatenation over repetitions; decoded rows are
// unmixed back to the original demand.
inline Transcript merge(const ProblemParams& p, const BaselineRun& run) {
  Transcript out;
  out.scheme = SchemeId::kBaseline;
  out.params = p;
  out.l_padded = run.repetitions.at(0).l_padded;
  out.u1 = run.repetitions[0].u1;
  out.u2 = run.repetitions[0].u2;
  out.round1_queries.assign(p.k, Vector{});
  std::vector<Vector> mixed_outputs;
  for (const auto& rep : run.repetitions) {
    for (std::size_t i = 0; i < p.k; ++i) {
      const auto& q = rep.round1_queries[i];
      out.round1_queries[i].insert(out.round1_queries[i].end(), q.begin(),
                                   q.end());
    }
    for (const auto& [i, x] : rep.round1_messages) {
      auto& dst = out.round1_messages[i];
      dst.insert(dst.end(), x.begin(), x.end());
    }
    for (const auto& [i, y] : rep.round2_answers) {
      auto& dst = out.round2_answers[i];
      dst.insert(dst.end(), y.begin(), y.end());
    }
    mixed_outputs.push_back(rep.decoded.at(0));
  }
  const Matrix& unmix = run.rewrite.unmix;
  for (std::size_t n = 0; n < p.kc; ++n) {
    Vector row(out.l_padded, FieldElement{0, p.q});
    for (std::size_t m = 0; m < p.kc; ++m) axpy(row, unmix(n, m), mixed_outputs[m]);
    out.decoded.push_back(std::move(row));
  }
  return out;
}

inline void execute(const ProblemParams& p, const DemandMatrix& f,
                    const InputSet& inputs, const DropoutSchedule& schedule,
                    const Matrix& code, const Realization& realization,
                    Transcript& out, single::Tamper tamper = {}) {
  require(realization.repetitions.size() == p.kc,
          ErrorCode::kDimensionMismatch, "need one realization per row");
  require(realization.rewrite.mix * f.matrix() == realization.rewrite.mixed,
          ErrorCode::kDimensionMismatch, "row mix was drawn for another demand");
  out.stage = Stage::kValidate;
  ProblemParams row_params = p;
  row_params.kc = 1;
  const Matrix& mixed = realization.rewrite.mixed;

  BaselineRun run{realization.rewrite, {}};
  for (std::size_t n = 0; n < p.kc; ++n) {
    Matrix row(1, p.k, p.q);
    for (std::size_t i = 0; i < p.k; ++i) row(0, i) = mixed(n, i);
    const DemandMatrix row_demand =
        validate_demand(std::move(row), row_params, SchemeId::kSingle);
    Transcript rep;
    try {
      single::execute(row_params, row_demand, 0, inputs, schedule, code,
                      realization.repetitions[n], rep, tamper);
    } catch (...) {
      out.stage = rep.stage;
      throw;
    }
    run.repetitions.push_back(std::move(rep));
  }
  Transcript merged = merge(p, run);
  merged.demand_digest = out.demand_digest;
  merged.seed = out.seed;
  out = std::move(merged);
  out.stage = Stage::kDecode;
}

// Pads the inputs, draws fresh randomness and runs all Kc repetitions.
inline Transcript run_baseline(const ProblemParams& p, const DemandMatrix& f,
                               const InputSet& inputs,
                               const DropoutSchedule& schedule, Rng& rng) {
  validate_params(p, SchemeId::kBaseline);
  schedule.validate(p.k, p.u);
  const std::size_t length = padded_length(p, SchemeId::kBaseline);
  const FieldConfig field(p.q);
  const Matrix code = vandermonde(p.u, consecutive_points(p.k, field));
  Transcript out;
  execute(p, f, inputs.padded(length, p.q), schedule, code,
          draw_realization(p, f, length, rng), out);
  return out;
}

}  // namespace secagg::baseline

#endif  // SECAGG_SCHEME_BASELINE_HPP_
