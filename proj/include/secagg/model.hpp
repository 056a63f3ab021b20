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

// Problem instances, demand matrices, dropout schedules, protocol transcripts
// and the rate accounting derived from them.

#ifndef SECAGG_MODEL_HPP_
#define SECAGG_MODEL_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secagg/digest.hpp"
#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/matrix.hpp"
#include "secagg/random.hpp"
#include "secagg/rational.hpp"

namespace secagg {

enum class SchemeId { kSingle, kMulti, kBaseline };

constexpr std::string_view scheme_name(SchemeId s) {
  switch (s) {
    case SchemeId::kSingle: return "single";
    case SchemeId::kMulti: return "multi";
    case SchemeId::kBaseline: return "baseline";
  }
  return "unknown";
}

inline SchemeId parse_scheme(std::string_view name) {
  if (name == "single") return SchemeId::kSingle;
  if (name == "multi") return SchemeId::kMulti;
  if (name == "baseline") return SchemeId::kBaseline;
  fail(ErrorCode::kInvalidParams, "unknown scheme '" + std::string(name) + "'");
}

// (K, U, Kc) instance over GF(q) with inputs of `l` symbols (before padding).
struct ProblemParams {
  std::size_t k = 0;
  std::size_t u = 0;
  std::size_t kc = 0;
  std::uint64_t q = 0;
  std::size_t l = 0;

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

// Inputs are split into U sub-keys (single, baseline) or blocks of U-1
// symbols (multi); the length is zero-padded up to a multiple of that unit.
inline std::size_t padding_unit(SchemeId s, std::size_t u) {
  return s == SchemeId::kMulti ? u - 1 : u;
}

inline std::size_t padded_length(const ProblemParams& p, SchemeId s) {
  const std::size_t unit = padding_unit(s, p.u);
  return (p.l + unit - 1) / unit * unit;
}

// Smallest field that keeps every evaluation point distinct. The single
// scheme needs K distinct Vandermonde points (1..K mod q); the multi scheme
// needs K + U - 1 distinct nonzero Lagrange points.
inline std::uint64_t minimum_modulus(SchemeId s, std::size_t k, std::size_t u) {
  return s == SchemeId::kMulti ? k + u : std::max<std::size_t>(k, 2);
}

inline std::uint64_t default_modulus(std::size_t k, std::size_t u) {
  return next_prime(k + u + 1);
}

inline void validate_params(const ProblemParams& p, SchemeId s) {
  require(p.k >= 2, ErrorCode::kInvalidParams, "need K >= 2 users");
  require(p.u >= 1 && p.u + 1 <= p.k, ErrorCode::kInvalidParams,
          "need 1 <= U <= K-1 (with U = K no user may drop and one round "
          "suffices)");
  require(p.kc >= 1, ErrorCode::kInvalidParams, "need Kc >= 1");
  require(p.l >= 1, ErrorCode::kInvalidParams, "need L >= 1");
  require(is_prime(p.q), ErrorCode::kNotPrime,
          "q = " + std::to_string(p.q) + " is not prime");
  const std::uint64_t qmin = minimum_modulus(s, p.k, p.u);
  require(p.q >= qmin, ErrorCode::kInvalidParams,
          "q = " + std::to_string(p.q) + " below admissible minimum " +
              std::to_string(qmin) + " for scheme " +
              std::string(scheme_name(s)));
  switch (s) {
    case SchemeId::kSingle:
      require(p.kc == 1, ErrorCode::kInvalidParams,
              "single scheme requires Kc = 1");
      break;
    case SchemeId::kMulti:
      require(p.kc >= 2 && p.kc < p.u, ErrorCode::kInvalidParams,
              "multi scheme requires 2 <= Kc < U (Kc >= U is unsupported)");
      break;
    case SchemeId::kBaseline:
      require(p.kc <= p.k, ErrorCode::kInvalidParams,
              "a full-row-rank demand needs Kc <= K");
      break;
  }
}

// The server's Kc x K coefficient matrix, validated on construction.
class DemandMatrix {
 public:
  const Matrix& matrix() const { return f_; }
  std::size_t kc() const { return f_.rows(); }
  std::size_t k() const { return f_.cols(); }
  FieldElement coefficient(std::size_t n, std::size_t i) const {
    return f_(n, i);
  }
  std::span<const FieldElement> row(std::size_t n) const { return f_.row(n); }

  friend bool operator==(const DemandMatrix&, const DemandMatrix&) = default;

 private:
  explicit DemandMatrix(Matrix f) : f_(std::move(f)) {}
  friend DemandMatrix validate_demand(Matrix f, const ProblemParams& p,
                                      SchemeId s);
  Matrix f_;
};

inline DemandMatrix validate_demand(Matrix f, const ProblemParams& p,
                                    SchemeId s) {
  require(f.rows() == p.kc && f.cols() == p.k, ErrorCode::kDimensionMismatch,
          "demand must be Kc x K");
  require(f.modulus() == p.q, ErrorCode::kModulusMismatch,
          "demand over the wrong field");
  if (s == SchemeId::kSingle) {
    for (std::size_t i = 0; i < f.cols(); ++i) {
      if (f(0, i).is_zero()) {
        fail(ErrorCode::kZeroEntryForSingleScheme,
             "coefficient of user " + std::to_string(i + 1) +
                 " is zero; the single scheme inverts every coefficient");
      }
    }
  }
  for (std::size_t i = 0; i < f.cols(); ++i) {
    bool any = false;
    for (std::size_t n = 0; n < f.rows(); ++n) any |= !f(n, i).is_zero();
    require(any, ErrorCode::kZeroColumn,
            "user " + std::to_string(i + 1) + " has no nonzero coefficient");
  }
  require(rank(f) == f.rows(), ErrorCode::kRankDeficient,
          "demand rows are linearly dependent");
  return DemandMatrix(std::move(f));
}

// Draws i.i.d. uniform coefficients until the demand is admissible for `s`.
inline DemandMatrix sample_demand(const ProblemParams& p, SchemeId s, Rng& rng,
                                  int max_tries = 10000) {
  const FieldConfig field(p.q);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Matrix f(p.kc, p.k, p.q);
    for (std::size_t n = 0; n < p.kc; ++n) {
      for (std::size_t i = 0; i < p.k; ++i) f(n, i) = field.uniform(rng);
    }
    try {
      return validate_demand(std::move(f), p, s);
    } catch (const Error&) {
    }
  }
  fail(ErrorCode::kRetryExhausted, "could not sample an admissible demand");
}

// W_i for every user; all vectors share one length.
struct InputSet {
  std::vector<Vector> w;

  std::size_t length() const { return w.empty() ? 0 : w[0].size(); }

  static InputSet random(const ProblemParams& p, Rng& rng) {
    const FieldConfig field(p.q);
    InputSet in;
    for (std::size_t i = 0; i < p.k; ++i) {
      in.w.push_back(field.uniform_vector(p.l, rng));
    }
    return in;
  }

  // Zero-extends every input to `length` symbols.
  InputSet padded(std::size_t length, std::uint64_t q) const {
    InputSet out = *this;
    for (auto& v : out.w) {
      require(v.size() <= length, ErrorCode::kDimensionMismatch,
              "input longer than padded length");
      v.resize(length, FieldElement{0, q});
    }
    return out;
  }
};

// Surviving users after each round; users are 0-based, sets sorted.
struct DropoutSchedule {
  std::vector<std::size_t> u1;
  std::vector<std::size_t> u2;

  static DropoutSchedule none(std::size_t k) {
    DropoutSchedule s;
    for (std::size_t i = 0; i < k; ++i) s.u1.push_back(i);
    s.u2 = s.u1;
    return s;
  }

  bool in_u1(std::size_t i) const {
    return std::binary_search(u1.begin(), u1.end(), i);
  }
  bool in_u2(std::size_t i) const {
    return std::binary_search(u2.begin(), u2.end(), i);
  }

  void validate(std::size_t k, std::size_t u) const {
    auto check_set = [&](const std::vector<std::size_t>& s, const char* name) {
      require(std::is_sorted(s.begin(), s.end()) &&
                  std::adjacent_find(s.begin(), s.end()) == s.end(),
              ErrorCode::kInvalidSchedule,
              std::string(name) + " must be sorted without repeats");
      if (!s.empty() && s.back() >= k) {
        fail(ErrorCode::kInvalidSchedule,
             std::string(name) + " names a user outside [K]");
      }
      if (s.size() < u) {
        fail(ErrorCode::kInvalidSchedule,
             std::string(name) + " has fewer than U survivors");
      }
    };
    check_set(u1, "u1");
    check_set(u2, "u2");
    require(std::includes(u1.begin(), u1.end(), u2.begin(), u2.end()),
            ErrorCode::kInvalidSchedule, "u2 must be a subset of u1");
  }

  friend bool operator==(const DropoutSchedule&,
                         const DropoutSchedule&) = default;
};

// Demand restricted to u1: (sum_{i in u1} a_{n,i} W_i)_n.
inline std::vector<Vector> plaintext_demand(const DemandMatrix& f,
                                            const InputSet& in,
                                            std::span<const std::size_t> u1) {
  const std::uint64_t q = f.matrix().modulus();
  std::vector<Vector> out(f.kc(), Vector(in.length(), FieldElement{0, q}));
  for (std::size_t n = 0; n < f.kc(); ++n) {
    for (auto i : u1) axpy(out[n], f.coefficient(n, i), in.w[i]);
  }
  return out;
}

// Salted SHA-256 of F, so exported transcripts identify the demand without
// revealing it.
inline std::string demand_digest(const DemandMatrix& f, std::uint64_t salt) {
  std::vector<std::uint64_t> words = {salt, f.matrix().modulus(), f.kc(),
                                      f.k()};
  for (std::size_t n = 0; n < f.kc(); ++n) {
    for (const auto& a : f.row(n)) words.push_back(a.value());
  }
  return "sha256:" + std::to_string(salt) + ":" + sha256_hex(words);
}

enum class Stage {
  kValidate,
  kRound1Queries,
  kKeyGeneration,
  kRound1,
  kRound2Queries,
  kRound2,
  kDecode,
  kVerify,
  kSealed,
};

constexpr std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::kValidate: return "validate";
    case Stage::kRound1Queries: return "round1_queries";
    case Stage::kKeyGeneration: return "key_generation";
    case Stage::kRound1: return "round1";
    case Stage::kRound2Queries: return "round2_queries";
    case Stage::kRound2: return "round2";
    case Stage::kDecode: return "decode";
    case Stage::kVerify: return "verify";
    case Stage::kSealed: return "sealed";
  }
  return "unknown";
}

struct Failure {
  Stage stage;
  ErrorCode code;
  std::string message;
};

// Everything exchanged in one protocol run. Message maps are keyed by
// 0-based user index; only users that actually sent appear.
struct Transcript {
  SchemeId scheme = SchemeId::kSingle;
  ProblemParams params;
  std::size_t l_padded = 0;
  std::string demand_digest;
  std::vector<Vector> round1_queries;
  std::vector<std::size_t> u1;
  std::map<std::size_t, Vector> round1_messages;
  std::map<std::size_t, Vector> round2_queries;
  std::vector<std::size_t> u2;
  std::map<std::size_t, Vector> round2_answers;
  std::vector<Vector> decoded;
  std::uint64_t seed = 0;

  Stage stage = Stage::kValidate;
  bool verified = false;
  std::optional<Failure> failure;
  // Only populated when the caller asks for a debug export.
  std::optional<Matrix> demand_cleartext;

  bool complete() const {
    return !failure && !decoded.empty() && !round1_messages.empty() &&
           !round2_answers.empty();
  }
};

struct RateReport {
  SchemeId scheme = SchemeId::kSingle;
  ProblemParams params;
  std::size_t l_padded = 0;
  // Against the padded length actually transmitted.
  Rational r1;
  Rational r2;
  // Against the caller's unpadded L; equal to r1, r2 when no padding.
  Rational r1_unpadded;
  Rational r2_unpadded;
  Rational converse_r1;
  Rational converse_r2;
  Rational gap;

  bool padded() const { return l_padded != params.l; }
};

// Rates from recorded symbol counts: r1 = max_i |X_i| / L, r2 = max_i |Y_i| / L.
inline RateReport compute_rates(const Transcript& t) {
  require(t.complete(), ErrorCode::kIncompleteTranscript,
          "rates need a complete transcript");
  std::size_t max_x = 0;
  for (const auto& [i, x] : t.round1_messages) max_x = std::max(max_x, x.size());
  std::size_t max_y = 0;
  for (const auto& [i, y] : t.round2_answers) max_y = std::max(max_y, y.size());

  RateReport r;
  r.scheme = t.scheme;
  r.params = t.params;
  r.l_padded = t.l_padded;
  const auto lp = static_cast<std::int64_t>(t.l_padded);
  const auto l = static_cast<std::int64_t>(t.params.l);
  r.r1 = Rational(static_cast<std::int64_t>(max_x), lp);
  r.r2 = Rational(static_cast<std::int64_t>(max_y), lp);
  r.r1_unpadded = Rational(static_cast<std::int64_t>(max_x), l);
  r.r2_unpadded = Rational(static_cast<std::int64_t>(max_y), l);
  r.converse_r1 = Rational(1);
  r.converse_r2 = Rational(static_cast<std::int64_t>(t.params.kc),
                           static_cast<std::int64_t>(t.params.u));
  r.gap = r.r2 / r.converse_r2;
  return r;
}

}  // namespace secagg

#endif  // SECAGG_MODEL_HPP_
