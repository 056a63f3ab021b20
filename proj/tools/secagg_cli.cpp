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

// secagg: run, verify, rates, sweep.
//
// Precedence is flags > --config file > built-in defaults. Results go to
// stdout as JSON (CSV for `rates`); errors go to stderr as one JSON object
// with a nonzero exit code.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "secagg/secagg.hpp"

namespace {

using secagg::Json;
using secagg::RunConfig;

constexpr int kExitFailed = 1;
constexpr int kExitError = 2;

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> scheme;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  bool debug_demand = false;
  std::optional<std::size_t> k, u, kc, l;
  std::optional<std::uint64_t> q;
  std::optional<std::string> dropout;
  std::optional<double> density;
  std::optional<std::vector<std::int64_t>> u1, u2;
  std::optional<std::vector<std::string>> checks;
  std::optional<std::string> plant;
  std::optional<std::size_t> kc_min, kc_max;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--scheme", f.scheme, "single, multi or baseline");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--trials", f.trials, "number of trials or instances");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--out", f.out, "output path");
  cmd->add_flag("--debug-demand", f.debug_demand,
                "export the demand matrix in cleartext");
  cmd->add_option("--k", f.k, "number of users K");
  cmd->add_option("--u", f.u, "minimum survivors U");
  cmd->add_option("--kc", f.kc, "number of combinations Kc");
  cmd->add_option("--q", f.q, "field size (prime)");
  cmd->add_option("--l", f.l, "input length L");
  cmd->add_option("--dropout", f.dropout,
                  "fixed, random, exhaustive or adversarial-worst");
  cmd->add_option("--density", f.density, "random dropout probability");
  cmd->add_option("--u1", f.u1, "round-1 survivors (1-based)")->delimiter(',');
  cmd->add_option("--u2", f.u2, "round-2 survivors (1-based)")->delimiter(',');
  cmd->add_option("--checks", f.checks, "decode,security,privacy,mi")
      ->delimiter(',');
  cmd->add_option("--plant", f.plant,
                  "planted break: none, no_masking, reuse_mask, leak_demand");
  cmd->add_option("--kc-min", f.kc_min, "first Kc of a rate sweep");
  cmd->add_option("--kc-max", f.kc_max, "last Kc of a rate sweep");
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (f.config) cfg = secagg::load_config_file(*f.config);
  if (f.scheme) cfg.scheme = secagg::parse_scheme(*f.scheme);
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.workers) cfg.workers = *f.workers;
  if (f.out) cfg.out = *f.out;
  if (f.debug_demand) cfg.debug_demand = true;
  if (f.k) cfg.k = *f.k;
  if (f.u) cfg.u = *f.u;
  if (f.kc) cfg.kc = *f.kc;
  if (f.q) cfg.q = *f.q;
  if (f.l) cfg.l = *f.l;
  if (f.dropout) cfg.dropout.mode = secagg::parse_dropout_mode(*f.dropout);
  if (f.density) cfg.dropout.density = *f.density;
  if (f.u1) {
    cfg.dropout.mode = secagg::DropoutModel::Mode::kFixed;
    cfg.dropout.fixed.u1 = secagg::parse_users(*f.u1);
    if (!f.u2) cfg.dropout.fixed.u2 = cfg.dropout.fixed.u1;
  }
  if (f.u2) cfg.dropout.fixed.u2 = secagg::parse_users(*f.u2);
  if (f.checks) cfg.checks = *f.checks;
  if (f.plant) cfg.plant = secagg::parse_plant(*f.plant);
  if (f.kc_min) cfg.kc_min = *f.kc_min;
  if (f.kc_max) cfg.kc_max = *f.kc_max;
  return cfg;
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (!cfg.out.empty()) secagg::write_file_atomic(cfg.out, text);
  std::cout << text;
}

// Demand, inputs and run seed all derive from the master seed.
struct Instance {
  secagg::DemandMatrix f;
  secagg::InputSet inputs;
  std::uint64_t run_seed;
};

Instance draw_instance(const RunConfig& cfg, std::uint64_t stream) {
  const auto p = cfg.params();
  secagg::Rng rng(secagg::Rng::derive(cfg.seed, stream));
  auto f = secagg::sample_demand(p, cfg.scheme, rng);
  auto in = secagg::InputSet::random(p, rng);
  return {std::move(f), std::move(in), rng.next()};
}

int cmd_run(const RunConfig& cfg) {
  secagg::validate_config(cfg);
  const auto p = cfg.params();
  const Instance inst = draw_instance(cfg, 0);
  secagg::DropoutModel model = cfg.dropout;
  if (model.mode == secagg::DropoutModel::Mode::kFixed) {
    model.fixed = cfg.fixed_schedule();
  }
  model.seed = secagg::Rng::derive(cfg.seed, model.seed);
  const auto schedules = secagg::schedules_for(model, p, cfg.scheme);
  const auto result =
      secagg::run_protocol(cfg.scheme, p, inst.f, inst.inputs,
                           schedules.front(), inst.run_seed,
                           {.debug_demand = cfg.debug_demand});
  if (!cfg.out.empty()) {
    secagg::write_file_atomic(
        cfg.out, secagg::transcript_json(result.transcript).dump(2) + "\n");
  }
  Json report;
  report["schema_version"] = secagg::kSchemaVersion;
  report["ok"] = result.ok();
  report["rates"] = result.report ? secagg::rate_report_json(*result.report)
                                  : Json(nullptr);
  if (result.transcript.failure) {
    report["failure"] = secagg::failure_json(*result.transcript.failure);
  }
  std::cout << report.dump(2) << "\n";
  return result.ok() ? 0 : kExitFailed;
}

using secagg::verify::Outcome;
using secagg::verify::Verdict;

Verdict check_privacy(const RunConfig& cfg) {
  const auto p = cfg.params();
  if (cfg.scheme == secagg::SchemeId::kBaseline) {
    return {"privacy", Outcome::kSkipped,
            "query enumeration is defined for the single and multi schemes"};
  }
  secagg::Rng rng(secagg::Rng::derive(cfg.seed, 0x9417));
  std::vector<secagg::DemandMatrix> demands;
  const std::size_t count = std::clamp<std::size_t>(cfg.trials, 2, 20);
  for (std::size_t d = 0; d < count; ++d) {
    demands.push_back(secagg::sample_demand(p, cfg.scheme, rng));
  }
  try {
    for (std::size_t i = 0; i < p.k; ++i) {
      Verdict v = secagg::verify::privacy_query_uniformity(cfg.scheme, p,
                                                           demands, i, cfg.plant);
      if (!v.passed()) return v;
    }
  } catch (const secagg::Error& e) {
    if (e.code() != secagg::ErrorCode::kEnumerationTooLarge) throw;
    return {"privacy", Outcome::kSkipped, e.what()};
  }
  return {"privacy", Outcome::kPass,
          "every user: query distribution exactly uniform and identical over " +
              std::to_string(count) + " demands"};
}

int cmd_verify(const RunConfig& cfg) {
  secagg::validate_config(cfg);
  const auto p = cfg.params();
  const double density =
      cfg.dropout.mode == secagg::DropoutModel::Mode::kRandom
          ? cfg.dropout.density
          : 0.0;
  Json checks = Json::array();
  bool all_pass = true;
  for (const auto& name : cfg.checks) {
    Verdict v;
    Json extra;
    if (name == "decode") {
      v = secagg::verify::decode_trials(cfg.scheme, p, cfg.trials, cfg.seed,
                                        cfg.workers);
    } else if (name == "security") {
      v = secagg::verify::security_trials(cfg.scheme, p, cfg.trials, cfg.seed,
                                          cfg.plant, density)
              .verdict();
    } else if (name == "privacy") {
      v = check_privacy(cfg);
    } else if (name == "mi") {
      if (cfg.scheme != secagg::SchemeId::kSingle) {
        v = {"mi", Outcome::kSkipped,
             "exhaustive enumeration is implemented for the single scheme"};
      } else {
        try {
          secagg::verify::MiOptions options;
          options.schedule = cfg.fixed_schedule();
          options.plant = cfg.plant;
          const auto r = secagg::verify::mi_exhaustive(p, options);
          extra = secagg::mi_report_json(r);
          v = {"mi", r.all_zero() ? Outcome::kPass : Outcome::kFail,
               "security MI " + std::to_string(r.security_mi) +
                   ", decode entropy " + std::to_string(r.decode_entropy) +
                   " over " + std::to_string(r.states) + " states"};
        } catch (const secagg::Error& e) {
          if (e.code() != secagg::ErrorCode::kEnumerationTooLarge) throw;
          v = {"mi", Outcome::kSkipped, e.what()};
        }
      }
    }
    Json entry = secagg::verdict_json(v);
    if (!extra.is_null()) entry["report"] = extra;
    checks.push_back(entry);
    all_pass = all_pass && v.passed();
  }
  Json report;
  report["schema_version"] = secagg::kSchemaVersion;
  report["scheme"] = std::string(secagg::scheme_name(cfg.scheme));
  report["params"] = secagg::params_json(p);
  report["plant"] = secagg::plant_name(cfg.plant);
  report["checks"] = checks;
  report["all_pass"] = all_pass;
  emit(cfg, report.dump(2) + "\n");
  return all_pass ? 0 : kExitFailed;
}

int cmd_rates(const RunConfig& cfg) {
  const std::size_t kc_max = cfg.kc_max == 0 ? cfg.u - 1 : cfg.kc_max;
  const auto points =
      secagg::rate_sweep(cfg.k, cfg.u, cfg.kc_min, kc_max, cfg.seed);
  emit(cfg, secagg::rates_csv(points));
  return 0;
}

int cmd_sweep(const RunConfig& cfg) {
  secagg::validate_config(cfg);
  const auto p = cfg.params();
  const auto schedules = secagg::all_schedules(p.k, p.u);
  std::size_t runs = 0;
  std::size_t failures = 0;
  bool consistent = true;
  Json failed = Json::array();
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const Instance inst = draw_instance(cfg, t);
    const auto s = secagg::sweep_schedules(cfg.scheme, p, inst.f, inst.inputs,
                                           schedules, inst.run_seed,
                                           cfg.workers);
    runs += s.runs;
    failures += s.failures;
    consistent = consistent && s.consistent_per_u1;
    for (const auto& [sched, fail] : s.failed) {
      if (failed.size() >= 10) break;
      failed.push_back({{"instance", t},
                        {"u1", secagg::users_json(sched.u1)},
                        {"u2", secagg::users_json(sched.u2)},
                        {"failure", secagg::failure_json(fail)}});
    }
  }
  const auto worst = secagg::adversarial_worst(p, cfg.scheme, cfg.seed);
  Json report;
  report["schema_version"] = secagg::kSchemaVersion;
  report["scheme"] = std::string(secagg::scheme_name(cfg.scheme));
  report["params"] = secagg::params_json(p);
  report["instances"] = cfg.trials;
  report["schedules"] = schedules.size();
  report["runs"] = runs;
  report["failures"] = failures;
  report["consistent_per_u1"] = consistent;
  report["first_failures"] = failed;
  report["worst_case"] = {
      {"u1", secagg::users_json(worst.schedule.u1)},
      {"max_answer_symbols", worst.max_answer_symbols},
      {"min_answer_symbols", worst.min_answer_symbols},
      {"schedule_dependent", worst.schedule_dependent}};
  emit(cfg, report.dump(2) + "\n");
  return failures == 0 && consistent ? 0 : kExitFailed;
}

void print_error(const std::string& code, const std::string& message) {
  Json j;
  j["schema_version"] = secagg::kSchemaVersion;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure aggregation of private linear combinations under dropouts"};
  app.require_subcommand(1);
  Flags flags;
  auto* run = app.add_subcommand("run", "run one protocol instance");
  auto* verify = app.add_subcommand("verify", "decode, security, privacy and MI checks");
  auto* rates = app.add_subcommand("rates", "rate table as CSV");
  auto* sweep = app.add_subcommand("sweep", "exhaustive dropout sweep");
  for (auto* cmd : {run, verify, rates, sweep}) add_common_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("InvalidParams", e.what());
    return kExitError;
  }

  try {
    const RunConfig cfg = resolve(flags);
    if (*run) return cmd_run(cfg);
    if (*verify) return cmd_verify(cfg);
    if (*rates) return cmd_rates(cfg);
    if (*sweep) return cmd_sweep(cfg);
  } catch (const secagg::Error& e) {
    print_error(std::string(secagg::error_code_name(e.code())), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return kExitError;
  }
  return kExitError;
}
