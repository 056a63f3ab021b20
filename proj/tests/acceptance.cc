// Copyright 2026 The secagg-dp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance runner: one PASS/FAIL line per criterion, with wall time
// checked against each criterion's budget. Exit status is nonzero iff a
// gating criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "secagg/secagg.hpp"

namespace {

using namespace secagg;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double budget_s;
  bool gating;
  std::function<Outcome()> body;
};

ProblemParams params(std::size_t k, std::size_t u, std::size_t kc,
                     std::uint64_t q, std::size_t l) {
  return {k, u, kc, q, l};
}

DemandMatrix rows(const ProblemParams& p, SchemeId s,
                  std::vector<std::vector<std::int64_t>> r) {
  return validate_demand(Matrix::from_rows(FieldConfig(p.q), r), p, s);
}

Outcome exact_rates(SchemeId s, const ProblemParams& p, const DemandMatrix& f,
                    Rational r1, Rational r2) {
  Rng rng(1);
  const auto r = run_protocol(s, p, f, InputSet::random(p, rng),
                              DropoutSchedule::none(p.k), 7);
  if (!r.ok()) {
    return {false, "run failed: " + (r.transcript.failure
                                         ? r.transcript.failure->message
                                         : std::string("unsealed"))};
  }
  const bool ok = r.report->r1 == r1 && r.report->r2 == r2;
  return {ok, "measured (" + r.report->r1.str() + ", " + r.report->r2.str() +
                  "), expected (" + r1.str() + ", " + r2.str() + ")"};
}

// Shared between the decodability sweep and the converse check.
std::size_t g_converse_runs = 0;
std::size_t g_converse_violations = 0;

Outcome decodability_sweep() {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t regimes = 0;
  std::string first;
  Rng rng(2024);
  for (std::size_t k = 2; k <= 6; ++k) {
    for (std::size_t u = 1; u < k; ++u) {
      const auto schedules = all_schedules(k, u);
      std::vector<std::pair<SchemeId, std::size_t>> regimes_here = {
          {SchemeId::kSingle, 1}};
      for (std::size_t kc = 2; kc < u; ++kc) {
        regimes_here.push_back({SchemeId::kMulti, kc});
        regimes_here.push_back({SchemeId::kBaseline, kc});
      }
      for (const auto& [scheme, kc] : regimes_here) {
        ++regimes;
        for (int inst = 0; inst < 20; ++inst) {
          const std::size_t l = 1 + rng.below(2 * u);
          const ProblemParams p = params(k, u, kc, default_modulus(k, u), l);
          const DemandMatrix f = sample_demand(p, scheme, rng);
          const InputSet in = InputSet::random(p, rng);
          const auto sum = sweep_schedules(scheme, p, f, in, schedules, rng.next());
          runs += sum.runs;
          failures += sum.failures;
          for (const auto& [s, fl] : sum.failed) {
            if (fl.code == ErrorCode::kConverseViolation) ++g_converse_violations;
            if (first.empty()) {
              first = std::string(scheme_name(scheme)) + " K=" + std::to_string(k) +
                      " U=" + std::to_string(u) + ": " + fl.message;
            }
          }
        }
      }
    }
  }
  g_converse_runs = runs;
  return {failures == 0,
          std::to_string(runs - failures) + "/" + std::to_string(runs) +
              " runs decode exactly over " + std::to_string(regimes) +
              " (K, U, Kc, scheme) regimes" +
              (first.empty() ? "" : "; first failure: " + first)};
}

// Converse inequalities are checked on every AC4 run. The multi gap is
// independent of Kc, so it is measured from one run per U at Kc = 2.
Outcome converse_and_gap() {
  bool ok = g_converse_runs > 0 && g_converse_violations == 0;
  std::string detail = std::to_string(g_converse_runs) +
                       " sweep runs satisfy r1 >= 1, r2 >= Kc/U";
  std::size_t checked = 0;
  for (std::size_t u = 3; u <= 64; ++u) {
    const std::size_t k = u + 1;
    const ProblemParams p =
        params(k, u, 2, default_modulus(k, u),
               padding_unit(SchemeId::kMulti, u));
    Rng rng(Rng::derive(5, u));
    const DemandMatrix f = sample_demand(p, SchemeId::kMulti, rng);
    const auto r = run_protocol(SchemeId::kMulti, p, f, InputSet::random(p, rng),
                                DropoutSchedule::none(k), rng.next());
    const auto uu = static_cast<std::int64_t>(u);
    if (!r.ok() || r.report->r1 < r.report->converse_r1 ||
        r.report->r2 < r.report->converse_r2 ||
        r.report->gap != Rational(uu, uu - 1) ||
        Rational(2) < r.report->gap) {
      ok = false;
      detail += "; U=" + std::to_string(u) + " gap " +
                (r.ok() ? r.report->gap.str() : std::string("run failed"));
    }
    ++checked;
  }
  // U = 2 admits no multi regime (2 <= Kc < U is empty), so there the bound
  // is checked on the closed form only.
  for (std::int64_t u = 2; u <= 64; ++u) {
    if (Rational(2) < Rational(u, u - 1)) ok = false;
  }
  detail += "; measured multi gap = U/(U-1) <= 2 for all " +
            std::to_string(checked) + " U in [3, 64]";
  return {ok, detail};
}

Outcome security_exact() {
  struct Case {
    SchemeId scheme;
    ProblemParams p;
  };
  const std::vector<Case> cases = {
      {SchemeId::kSingle, params(3, 2, 1, 11, 2)},
      {SchemeId::kBaseline, params(3, 2, 1, 11, 2)},
      {SchemeId::kMulti, params(4, 3, 2, 11, 4)},
      {SchemeId::kBaseline, params(4, 3, 2, 11, 3)},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto s = verify::security_trials(c.scheme, c.p, 100, 11);
    ok = ok && s.passes == 100;
    detail += std::string(scheme_name(c.scheme)) + "(" + std::to_string(c.p.k) +
              "," + std::to_string(c.p.u) + "," + std::to_string(c.p.kc) +
              ") " + std::to_string(s.passes) + "/100; ";
  }
  // Controls: every realization must fail.
  const auto no_mask_single = verify::security_trials(
      SchemeId::kSingle, params(3, 2, 1, 11, 2), 20, 12, {.no_masking = true});
  const auto no_mask_multi = verify::security_trials(
      SchemeId::kMulti, params(4, 3, 2, 11, 4), 20, 13, {.no_masking = true});
  const auto reuse = verify::security_trials(SchemeId::kMulti, params(4, 3, 2, 11, 4),
                                     20, 14, {.reuse_mask = true}, 0.0);
  const bool controls = no_mask_single.passes == 0 &&
                        no_mask_multi.passes == 0 && reuse.passes == 0;
  ok = ok && controls;
  detail += "controls pass counts: no_masking " +
            std::to_string(no_mask_single.passes) + "/20 and " +
            std::to_string(no_mask_multi.passes) + "/20, reused s " +
            std::to_string(reuse.passes) + "/20 (expected 0)";
  return {ok, detail};
}

Outcome mi_exact() {
  const ProblemParams p = params(3, 2, 1, 3, 2);
  bool ok = true;
  std::string detail;
  for (const DropoutSchedule& s :
       {DropoutSchedule::none(3), DropoutSchedule{{0, 1}, {0, 1}}}) {
    verify::MiOptions opt;
    opt.schedule = s;
    const auto r = verify::mi_exhaustive(p, opt);
    ok = ok && r.all_zero();
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "u1 size %zu: %llu demands, %llu states, I(W;V|out)=%.3g "
                  "H(out|V)=%.3g max I(F;V_i)=%.3g exact zeros: %s; ",
                  s.u1.size(), static_cast<unsigned long long>(r.demands),
                  static_cast<unsigned long long>(r.states), r.security_mi,
                  r.decode_entropy,
                  *std::max_element(r.privacy_mi.begin(), r.privacy_mi.end()),
                  r.all_zero() ? "yes" : "no");
    detail += buf;
  }
  // Control: planted leak must show a nonzero privacy term.
  verify::MiOptions leak;
  leak.plant.leak_demand = true;
  leak.max_demands = 2;
  const auto lr = verify::mi_exhaustive(p, leak);
  const bool control =
      !std::all_of(lr.privacy_zero.begin(), lr.privacy_zero.end(),
                   [](bool b) { return b; });
  ok = ok && control;
  detail += std::string("leak control nonzero: ") + (control ? "yes" : "no");
  return {ok, detail};
}

Outcome query_uniformity() {
  bool ok = true;
  std::string detail;
  {
    const ProblemParams p = params(3, 2, 1, 11, 2);
    Rng rng(8);
    std::vector<DemandMatrix> ds;
    for (int i = 0; i < 20; ++i) ds.push_back(sample_demand(p, SchemeId::kSingle, rng));
    for (std::size_t user = 0; user < p.k; ++user) {
      const auto v = verify::privacy_query_uniformity(SchemeId::kSingle, p, ds, user);
      ok = ok && v.passed();
      if (!v.passed()) detail += v.detail + "; ";
    }
    detail += "single: Q_i uniform on GF(11)* for 20 demands, every user; ";
  }
  {
    const ProblemParams p = params(4, 3, 2, 7, 2);
    const std::vector<DemandMatrix> ds = {
        rows(p, SchemeId::kMulti, {{1, 1, 1, 1}, {1, 2, 3, 4}}),
        rows(p, SchemeId::kMulti, {{3, 0, 5, 1}, {0, 6, 2, 2}})};
    for (std::size_t user = 0; user < p.k; ++user) {
      const auto v = verify::privacy_query_uniformity(SchemeId::kMulti, p, ds, user);
      ok = ok && v.passed();
      if (!v.passed()) detail += v.detail + "; ";
    }
    const auto leak = verify::privacy_query_uniformity(
        SchemeId::kMulti, p, ds, 0, {.leak_demand = true});
    ok = ok && !leak.passed();
    detail += "multi: components uniform over GF(7)^4 and identical for two "
              "demands, every user; leak control " +
              std::string(verify::outcome_name(leak.outcome));
  }
  return {ok, detail};
}

Outcome coding_oracles() {
  Rng rng(31);
  std::size_t subsets = 0;
  bool ok = true;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const std::size_t k = 2 + rng.below(7);
    const std::size_t u = 1 + rng.below(k);
    const FieldConfig f(next_prime(k + 1 + rng.below(40)));
    const Matrix code = vandermonde(u, consecutive_points(k, f));
    std::vector<Vector> sub;
    const std::size_t width = 1 + rng.below(3);
    for (std::size_t m = 0; m < u; ++m) sub.push_back(f.uniform_vector(width, rng));
    const auto shares = mds_encode(sub, code);
    std::vector<std::size_t> all(k);
    for (std::size_t i = 0; i < k; ++i) all[i] = i;
    for (const auto& cols : subsets_at_least(all, u)) {
      std::vector<CodedShare> held;
      for (auto c : cols) held.push_back({c, shares[c]});
      ok = ok && rs_erasure_decode(held, code) == sub;
      ++subsets;
    }
  }
  std::size_t polys = 0;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const FieldConfig f(next_prime(11 + rng.below(200)));
    const std::size_t n = 1 + rng.below(8);
    Vector xs;
    while (xs.size() < n) {
      const auto x = f.uniform(rng);
      if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    }
    const Polynomial poly(f.modulus(), f.uniform_vector(n, rng));
    std::vector<Point> pts;
    Vector ys;
    for (const auto& x : xs) {
      pts.push_back({x, eval(poly, x)});
      ys.push_back(pts.back().y);
    }
    const Polynomial oracle(f.modulus(), solve(vandermonde(n, xs).transpose(), ys));
    ok = ok && lagrange_interpolate(pts) == oracle && oracle == poly;
    ++polys;
  }
  return {ok, "decode(encode) identity on " + std::to_string(subsets) +
                  " column subsets of 1000 codes; Lagrange equals linear "
                  "solve on " +
                  std::to_string(polys) + " polynomials"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("secagg_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string detail;
  bool ok = true;

  // In-process: same config and seed, two transcript files.
  auto write_run = [&](const std::filesystem::path& path) {
    const ProblemParams p = params(4, 3, 2, 11, 4);
    Rng rng(Rng::derive(99, 1));
    const DemandMatrix f = sample_demand(p, SchemeId::kMulti, rng);
    const InputSet in = InputSet::random(p, rng);
    const auto r = run_protocol(SchemeId::kMulti, p, f, in,
                                DropoutSchedule{{0, 1, 3}, {0, 1, 3}}, rng.next());
    write_file_atomic(path, transcript_json(r.transcript).dump(2) + "\n");
  };
  write_run(dir / "a.json");
  write_run(dir / "b.json");
  const std::string a = slurp(dir / "a.json");
  ok = ok && !a.empty() && a == slurp(dir / "b.json");
  detail = "library transcripts " + std::string(ok ? "identical" : "differ");

#ifdef SECAGG_CLI_PATH
  const std::string base = std::string(SECAGG_CLI_PATH) +
                           " run --k 5 --u 3 --kc 2 --scheme multi --l 5 "
                           "--seed 123 --dropout random --density 0.3 --out ";
  const auto ca = dir / "cli_a.json";
  const auto cb = dir / "cli_b.json";
  const int sa = std::system((base + ca.string() + " > /dev/null").c_str());
  const int sb = std::system((base + cb.string() + " > /dev/null").c_str());
  const std::string ta = slurp(ca);
  const bool cli_ok = sa == 0 && sb == 0 && !ta.empty() && ta == slurp(cb);
  ok = ok && cli_ok;
  detail += "; two CLI invocations " +
            std::string(cli_ok ? "byte-identical" : "differ or failed") + " (" +
            std::to_string(ta.size()) + " bytes)";
#endif
  std::filesystem::remove_all(dir);
  return {ok, detail};
}

Outcome sampled_privacy() {
  const ProblemParams p = params(4, 3, 2, 11, 2);
  const DemandMatrix f1 = rows(p, SchemeId::kMulti, {{1, 1, 1, 1}, {1, 2, 3, 4}});
  const DemandMatrix f2 = rows(p, SchemeId::kMulti, {{5, 0, 7, 1}, {0, 9, 2, 3}});
  verify::CompareOptions opt;
  opt.samples = 100000;
  opt.alpha = 0.01;
  opt.seed = 5;
  opt.workers = default_workers();
  const auto honest = verify::view_distribution_compare(p, f1, f2, opt);
  verify::CompareOptions leak_opt = opt;
  leak_opt.samples = 10000;
  leak_opt.plant.leak_demand = true;
  const auto leak = verify::view_distribution_compare(p, f1, f2, leak_opt);
  return {honest.verdict.passed() && !leak.verdict.passed(),
          "honest " + std::string(verify::outcome_name(honest.verdict.outcome)) +
              " (" + honest.verdict.detail + "); leak control " +
              std::string(verify::outcome_name(leak.verdict.outcome))};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "rate exactness, single (3,2,1) q=11 L=2", 1.0, true,
       [] {
         const auto p = params(3, 2, 1, 11, 2);
         return exact_rates(SchemeId::kSingle, p,
                            rows(p, SchemeId::kSingle, {{1, 1, 1}}), Rational(1),
                            Rational(1, 2));
       }},
      {"AC2", "rate exactness, multi (4,3,2) q=11 L=4", 1.0, true,
       [] {
         const auto p = params(4, 3, 2, 11, 4);
         return exact_rates(SchemeId::kMulti, p,
                            rows(p, SchemeId::kMulti, {{1, 1, 1, 1}, {1, 2, 3, 4}}),
                            Rational(1), Rational(1));
       }},
      {"AC3", "rate exactness, baseline (4,3,2) q=11 L=3", 1.0, true,
       [] {
         const auto p = params(4, 3, 2, 11, 3);
         return exact_rates(SchemeId::kBaseline, p,
                            rows(p, SchemeId::kBaseline, {{1, 1, 1, 1}, {1, 2, 3, 4}}),
                            Rational(2), Rational(2, 3));
       }},
      {"AC4", "decodability over every schedule, K <= 6", 120.0, true,
       decodability_sweep},
      {"AC5", "converse and gap, U in [2, 64]", 1.0, true, converse_and_gap},
      {"AC6", "security rank check with planted controls", 30.0, true,
       security_exact},
      {"AC7", "exhaustive MI, single (3,2,1) q=3 L=2", 300.0, true, mi_exact},
      {"AC8", "query uniformity by enumeration", 60.0, true, query_uniformity},
      {"AC9", "coding-layer oracle equivalence", 30.0, true, coding_oracles},
      {"AC10", "byte-identical transcripts for a fixed seed", 5.0, true,
       determinism},
      {"AC11", "sampled view comparison, 1e5 samples (non-gating)", 120.0, false,
       sampled_privacy},
  };

  bool gating_ok = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_budget = secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    if (c.gating && !pass) gating_ok = false;
    std::printf("%-4s %s  %.3fs/%.0fs  %s%s: %s%s\n", c.id.c_str(),
                pass ? "PASS" : "FAIL", secs, c.budget_s, c.title.c_str(),
                c.gating ? "" : " [non-gating]", o.detail.c_str(),
                in_budget ? "" : " (over time budget)");
    std::fflush(stdout);
  }
  return gating_ok ? 0 : 1;
}
