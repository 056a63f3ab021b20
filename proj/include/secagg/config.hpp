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

// Run configuration: one JSON document, overridden field by field by
// command-line flags.
//
//   {
//     "k": 3, "u": 2, "kc": 1, "q": 11, "l": 2,
//     "scheme": "single",
//     "seed": 1, "trials": 100, "workers": 1,
//     "dropout": {"mode": "fixed", "u1": [1, 2], "u2": [1, 2]},
//     "checks": ["decode", "security", "privacy", "mi"],
//     "plant": "none",
//     "kc_min": 1, "kc_max": 2,
//     "out": "transcript.json", "debug_demand": false
//   }
//
// Users are 1-based. "q" may be omitted; it then defaults to the smallest
// prime >= K + U + 1. Dropout modes: fixed, random (density, count, seed),
// exhaustive, adversarial-worst.

#ifndef SECAGG_CONFIG_HPP_
#define SECAGG_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "secagg/error.hpp"
#include "secagg/harness.hpp"
#include "secagg/model.hpp"
#include "secagg/verify.hpp"

namespace secagg {

inline const std::vector<std::string>& all_checks() {
  static const std::vector<std::string> checks = {"decode", "security",
                                                  "privacy", "mi"};
  return checks;
}

struct RunConfig {
  std::size_t k = 3;
  std::size_t u = 2;
  std::size_t kc = 1;
  std::optional<std::uint64_t> q;
  std::size_t l = 2;
  SchemeId scheme = SchemeId::kSingle;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  std::size_t workers = 1;
  // Mode kFixed with an empty schedule means no dropouts.
  DropoutModel dropout;
  std::vector<std::string> checks = all_checks();
  verify::Plant plant;
  std::size_t kc_min = 1;
  std::size_t kc_max = 0;  // 0: up to U - 1
  std::string out;
  bool debug_demand = false;

  ProblemParams params() const {
    return {k, u, kc, q.value_or(default_modulus(k, u)), l};
  }

  DropoutSchedule fixed_schedule() const {
    return dropout.fixed.u1.empty() ? DropoutSchedule::none(k) : dropout.fixed;
  }
};

inline verify::Plant parse_plant(const std::string& name) {
  verify::Plant p;
  if (name == "none" || name.empty()) return p;
  if (name == "no_masking") {
    p.no_masking = true;
  } else if (name == "reuse_mask") {
    p.reuse_mask = true;
  } else if (name == "leak_demand") {
    p.leak_demand = true;
  } else {
    fail(ErrorCode::kInvalidParams, "unknown plant '" + name + "'");
  }
  return p;
}

inline std::string plant_name(const verify::Plant& p) {
  if (p.no_masking) return "no_masking";
  if (p.reuse_mask) return "reuse_mask";
  if (p.leak_demand) return "leak_demand";
  return "none";
}

inline DropoutModel::Mode parse_dropout_mode(const std::string& name) {
  if (name == "fixed") return DropoutModel::Mode::kFixed;
  if (name == "random") return DropoutModel::Mode::kRandom;
  if (name == "exhaustive") return DropoutModel::Mode::kExhaustive;
  if (name == "adversarial-worst") return DropoutModel::Mode::kAdversarialWorst;
  fail(ErrorCode::kInvalidParams, "unknown dropout mode '" + name + "'");
}

// 1-based ids from the wire into a sorted 0-based set.
inline std::vector<std::size_t> parse_users(const std::vector<std::int64_t>& ids) {
  std::set<std::size_t> s;
  for (auto id : ids) {
    require(id >= 1, ErrorCode::kInvalidSchedule,
            "user ids are 1-based; got " + std::to_string(id));
    require(s.insert(static_cast<std::size_t>(id - 1)).second,
            ErrorCode::kInvalidSchedule,
            "user " + std::to_string(id) + " listed twice");
  }
  return {s.begin(), s.end()};
}

// Applies the fields present in `j` on top of `cfg`. Unknown keys are
// rejected so a typo does not silently fall back to a default.
inline void merge_config_json(RunConfig& cfg, const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "k",      "u",      "kc",     "q",       "l",      "scheme",
      "seed",   "trials", "workers", "dropout", "checks", "plant",
      "kc_min", "kc_max", "out",    "debug_demand", "schema_version"};
  require(j.is_object(), ErrorCode::kInvalidParams,
          "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    require(known.count(key) == 1, ErrorCode::kInvalidParams,
            "unknown config key '" + key + "'");
  }
  try {
    if (j.contains("k")) cfg.k = j["k"].get<std::size_t>();
    if (j.contains("u")) cfg.u = j["u"].get<std::size_t>();
    if (j.contains("kc")) cfg.kc = j["kc"].get<std::size_t>();
    if (j.contains("q")) cfg.q = j["q"].get<std::uint64_t>();
    if (j.contains("l")) cfg.l = j["l"].get<std::size_t>();
    if (j.contains("scheme")) cfg.scheme = parse_scheme(j["scheme"].get<std::string>());
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<std::size_t>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<std::size_t>();
    if (j.contains("checks")) cfg.checks = j["checks"].get<std::vector<std::string>>();
    if (j.contains("plant")) cfg.plant = parse_plant(j["plant"].get<std::string>());
    if (j.contains("kc_min")) cfg.kc_min = j["kc_min"].get<std::size_t>();
    if (j.contains("kc_max")) cfg.kc_max = j["kc_max"].get<std::size_t>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("debug_demand")) cfg.debug_demand = j["debug_demand"].get<bool>();
    if (j.contains("dropout")) {
      const auto& d = j["dropout"];
      DropoutModel m;
      m.mode = parse_dropout_mode(d.value("mode", std::string("fixed")));
      if (d.contains("u1")) m.fixed.u1 = parse_users(d["u1"].get<std::vector<std::int64_t>>());
      if (d.contains("u2")) {
        m.fixed.u2 = parse_users(d["u2"].get<std::vector<std::int64_t>>());
      } else {
        m.fixed.u2 = m.fixed.u1;
      }
      m.density = d.value("density", 0.0);
      m.count = d.value("count", std::size_t{1});
      m.seed = d.value("seed", cfg.seed);
      cfg.dropout = m;
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidParams, std::string("bad config value: ") + e.what());
  }
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kInvalidParams,
          "cannot read config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidParams, path + ": " + e.what());
  }
  merge_config_json(base, j);
  return base;
}

// Everything a run needs before any randomness is drawn.
inline void validate_config(const RunConfig& cfg) {
  validate_params(cfg.params(), cfg.scheme);
  require(cfg.workers >= 1, ErrorCode::kInvalidParams, "need workers >= 1");
  require(cfg.dropout.density >= 0.0 && cfg.dropout.density <= 1.0,
          ErrorCode::kInvalidParams, "dropout density must lie in [0, 1]");
  if (cfg.dropout.mode == DropoutModel::Mode::kFixed) {
    cfg.fixed_schedule().validate(cfg.k, cfg.u);
  }
  for (const auto& c : cfg.checks) {
    require(std::find(all_checks().begin(), all_checks().end(), c) !=
                all_checks().end(),
            ErrorCode::kInvalidParams, "unknown check '" + c + "'");
  }
}

}  // namespace secagg

#endif  // SECAGG_CONFIG_HPP_
