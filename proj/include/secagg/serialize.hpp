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

// JSON and CSV encodings. User ids are 1-based on the wire and 0-based in
// memory. Every document carries schema_version.

#ifndef SECAGG_SERIALIZE_HPP_
#define SECAGG_SERIALIZE_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/harness.hpp"
#include "secagg/model.hpp"
#include "secagg/rational.hpp"
#include "secagg/verify.hpp"

namespace secagg {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

inline Json symbols_json(std::span<const FieldElement> v) {
  Json out = Json::array();
  for (const auto& e : v) out.push_back(e.value());
  return out;
}

inline Json users_json(std::span<const std::size_t> users) {
  Json out = Json::array();
  for (auto i : users) out.push_back(i + 1);
  return out;
}

// [{"user": 1, "symbols": [...]}, ...] in user order.
inline Json messages_json(const std::map<std::size_t, Vector>& m) {
  Json out = Json::array();
  for (const auto& [i, v] : m) {
    out.push_back({{"user", i + 1}, {"symbols", symbols_json(v)}});
  }
  return out;
}

inline Json matrix_json(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(symbols_json(m.row(r)));
  return out;
}

inline Json params_json(const ProblemParams& p) {
  return {{"k", p.k}, {"u", p.u}, {"kc", p.kc}, {"q", p.q}, {"l", p.l}};
}

inline Json failure_json(const Failure& f) {
  return {{"stage", std::string(stage_name(f.stage))},
          {"code", std::string(error_code_name(f.code))},
          {"message", f.message}};
}

inline Json transcript_json(const Transcript& t) {
  Json params = params_json(t.params);
  params["l_padded"] = t.l_padded;
  params["scheme"] = std::string(scheme_name(t.scheme));

  Json queries = Json::array();
  for (const auto& q : t.round1_queries) queries.push_back(symbols_json(q));
  Json decoded = Json::array();
  for (const auto& d : t.decoded) decoded.push_back(symbols_json(d));

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["params"] = params;
  j["demand_digest"] = t.demand_digest;
  j["round1_queries"] = queries;
  j["u1"] = users_json(t.u1);
  j["round1_messages"] = messages_json(t.round1_messages);
  j["round2_queries"] = messages_json(t.round2_queries);
  j["round2_answers"] = messages_json(t.round2_answers);
  j["u2"] = users_json(t.u2);
  j["decoded"] = decoded;
  j["seed"] = t.seed;
  j["stage"] = std::string(stage_name(t.stage));
  j["verified"] = t.verified;
  if (t.failure) j["failure"] = failure_json(*t.failure);
  if (t.demand_cleartext) j["demand_cleartext"] = matrix_json(*t.demand_cleartext);
  return j;
}

inline Json rational_json(const Rational& r) {
  return {{"exact", r.str()}, {"value", r.to_double()}};
}

inline Json rate_report_json(const RateReport& r) {
  Json params = params_json(r.params);
  params["l_padded"] = r.l_padded;
  return {{"schema_version", kSchemaVersion},
          {"scheme", std::string(scheme_name(r.scheme))},
          {"params", params},
          {"r1", rational_json(r.r1)},
          {"r2", rational_json(r.r2)},
          {"r1_unpadded", rational_json(r.r1_unpadded)},
          {"r2_unpadded", rational_json(r.r2_unpadded)},
          {"converse_r1", rational_json(r.converse_r1)},
          {"converse_r2", rational_json(r.converse_r2)},
          {"gap", rational_json(r.gap)}};
}

inline std::string decimal(const Rational& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", r.to_double());
  return buf;
}

inline constexpr const char* kRatesCsvHeader =
    "schema_version,kc,r1_multi,r2_multi,r1_baseline,r2_baseline,"
    "r1_converse,r2_converse,gap";

// One row per Kc. For Kc = 1 the multi columns hold the single scheme.
inline std::string rates_csv(const std::vector<RateRegionPoint>& points) {
  std::ostringstream out;
  out << kRatesCsvHeader << "\n";
  for (const auto& pt : points) {
    out << kSchemaVersion << "," << pt.kc << "," << decimal(pt.r1) << ","
        << decimal(pt.r2) << "," << decimal(pt.baseline_r1) << ","
        << decimal(pt.baseline_r2) << "," << decimal(pt.converse_r1) << ","
        << decimal(pt.converse_r2) << "," << decimal(pt.gap) << "\n";
  }
  return out.str();
}

inline Json verdict_json(const verify::Verdict& v) {
  return {{"check", v.check},
          {"outcome", std::string(verify::outcome_name(v.outcome))},
          {"detail", v.detail}};
}

inline Json mi_report_json(const verify::MiReport& r) {
  Json privacy = Json::array();
  for (std::size_t i = 0; i < r.privacy_mi.size(); ++i) {
    privacy.push_back({{"user", i + 1},
                       {"mi", r.privacy_mi[i]},
                       {"exact_zero", static_cast<bool>(r.privacy_zero[i])}});
  }
  return {{"schema_version", kSchemaVersion},
          {"scheme", std::string(scheme_name(r.scheme))},
          {"params", params_json(r.params)},
          {"u1", users_json(r.schedule.u1)},
          {"u2", users_json(r.schedule.u2)},
          {"demands", r.demands},
          {"states", r.states},
          {"units", "base-q"},
          {"security_mi", r.security_mi},
          {"security_exact_zero", r.security_zero},
          {"decode_entropy", r.decode_entropy},
          {"decode_exact_zero", r.decode_zero},
          {"privacy", privacy}};
}

inline Json distribution_report_json(const verify::DistributionReport& r) {
  Json features = Json::array();
  for (const auto& f : r.features) {
    features.push_back({{"user", f.user + 1},
                        {"feature", f.feature},
                        {"statistic", f.statistic},
                        {"dof", f.dof},
                        {"p_value", f.p_value}});
  }
  return {{"schema_version", kSchemaVersion},
          {"samples", r.samples},
          {"alpha", r.alpha},
          {"threshold", r.threshold},
          {"verdict", verdict_json(r.verdict)},
          {"features", features}};
}

inline Json error_json(const Error& e) {
  return {{"schema_version", kSchemaVersion},
          {"error", {{"code", std::string(error_code_name(e.code()))},
                     {"message", e.what()}}}};
}

// Writes via a temporary file in the same directory and renames it over
// the target.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::kInvalidParams,
            "cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    require(static_cast<bool>(out), ErrorCode::kInvalidParams,
            "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorCode::kInvalidParams,
         "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace secagg

#endif  // SECAGG_SERIALIZE_HPP_
