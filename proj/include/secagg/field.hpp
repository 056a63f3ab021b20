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

// Exact arithmetic in a prime field GF(q) and univariate polynomials over it.

#ifndef SECAGG_FIELD_HPP_
#define SECAGG_FIELD_HPP_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "secagg/error.hpp"
#include "secagg/random.hpp"

namespace secagg {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0 || n % 3 == 0) return false;
  for (std::uint64_t d = 5; d <= n / d; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

// Smallest prime >= n.
inline std::uint64_t next_prime(std::uint64_t n) {
  if (n <= 2) return 2;
  while (!is_prime(n)) ++n;
  return n;
}

// A value of GF(q). The modulus travels with the value; mixing moduli is an
// error. A default-constructed element is unbound (modulus 0) and only
// exists so containers can be resized before assignment.
class FieldElement {
 public:
  FieldElement() = default;

  // `value` must already be reduced; use FieldConfig::element otherwise.
  FieldElement(std::uint64_t value, std::uint64_t modulus)
      : value_(value), modulus_(modulus) {}

  std::uint64_t value() const { return value_; }
  std::uint64_t modulus() const { return modulus_; }
  bool is_zero() const { return value_ == 0; }

  friend FieldElement operator+(FieldElement a, FieldElement b) {
    check_same(a, b);
    std::uint64_t s = a.value_ + b.value_;
    if (s >= a.modulus_ || s < a.value_) s -= a.modulus_;
    return {s, a.modulus_};
  }

  friend FieldElement operator-(FieldElement a, FieldElement b) {
    check_same(a, b);
    return {a.value_ >= b.value_ ? a.value_ - b.value_
                                 : a.modulus_ - (b.value_ - a.value_),
            a.modulus_};
  }

  friend FieldElement operator-(FieldElement a) {
    return {a.value_ == 0 ? 0 : a.modulus_ - a.value_, a.modulus_};
  }

  friend FieldElement operator*(FieldElement a, FieldElement b) {
    check_same(a, b);
    const auto p = static_cast<unsigned __int128>(a.value_) * b.value_;
    return {static_cast<std::uint64_t>(p % a.modulus_), a.modulus_};
  }

  friend FieldElement operator/(FieldElement a, FieldElement b) {
    return a * b.inverse();
  }

  FieldElement& operator+=(FieldElement b) { return *this = *this + b; }
  FieldElement& operator-=(FieldElement b) { return *this = *this - b; }
  FieldElement& operator*=(FieldElement b) { return *this = *this * b; }

  friend bool operator==(FieldElement a, FieldElement b) {
    return a.value_ == b.value_ && a.modulus_ == b.modulus_;
  }

  FieldElement pow(std::uint64_t e) const {
    FieldElement base = *this;
    FieldElement acc{1 % modulus_, modulus_};
    while (e > 0) {
      if (e & 1) acc *= base;
      base *= base;
      e >>= 1;
    }
    return acc;
  }

  // Fermat inversion; q is prime by FieldConfig construction.
  FieldElement inverse() const {
    require(modulus_ != 0, ErrorCode::kModulusMismatch, "unbound element");
    require(value_ != 0, ErrorCode::kZeroInverse, "inverse of zero");
    return pow(modulus_ - 2);
  }

  friend std::ostream& operator<<(std::ostream& os, FieldElement a) {
    return os << a.value_;
  }

 private:
  static void check_same(FieldElement a, FieldElement b) {
    if (a.modulus_ != b.modulus_ || a.modulus_ == 0) {
      fail(ErrorCode::kModulusMismatch,
           "GF(" + std::to_string(a.modulus_) + ") vs GF(" +
               std::to_string(b.modulus_) + ")");
    }
  }

  std::uint64_t value_ = 0;
  std::uint64_t modulus_ = 0;
};

inline FieldElement inv(FieldElement a) { return a.inverse(); }

using Vector = std::vector<FieldElement>;

// The field GF(q). Construction rejects composite q.
class FieldConfig {
 public:
  explicit FieldConfig(std::uint64_t q) : q_(q) {
    require(is_prime(q), ErrorCode::kNotPrime,
            std::to_string(q) + " is not prime");
  }

  std::uint64_t modulus() const { return q_; }

  FieldElement element(std::int64_t v) const {
    const auto q = static_cast<std::int64_t>(q_);
    std::int64_t r = v % q;
    if (r < 0) r += q;
    return {static_cast<std::uint64_t>(r), q_};
  }
  FieldElement element_u(std::uint64_t v) const { return {v % q_, q_}; }
  FieldElement zero() const { return {0, q_}; }
  FieldElement one() const { return {1 % q_, q_}; }

  Vector zeros(std::size_t n) const { return Vector(n, zero()); }
  Vector vector(std::initializer_list<std::int64_t> values) const {
    Vector out;
    out.reserve(values.size());
    for (auto v : values) out.push_back(element(v));
    return out;
  }

  FieldElement uniform(Rng& rng) const { return {rng.below(q_), q_}; }
  FieldElement uniform_nonzero(Rng& rng) const {
    return {1 + rng.below(q_ - 1), q_};
  }
  Vector uniform_vector(std::size_t n, Rng& rng) const {
    Vector out(n);
    for (auto& x : out) x = uniform(rng);
    return out;
  }

  friend bool operator==(const FieldConfig& a, const FieldConfig& b) {
    return a.q_ == b.q_;
  }

 private:
  std::uint64_t q_;
};

// Componentwise vector helpers.
inline Vector add(std::span<const FieldElement> a,
                  std::span<const FieldElement> b) {
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch,
          "vector lengths differ");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vector sub(std::span<const FieldElement> a,
                  std::span<const FieldElement> b) {
  require(a.size() == b.size(), ErrorCode::kDimensionMismatch,
          "vector lengths differ");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vector scale(FieldElement c, std::span<const FieldElement> a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

// acc += c * a
inline void axpy(Vector& acc, FieldElement c, std::span<const FieldElement> a) {
  require(acc.size() == a.size(), ErrorCode::kDimensionMismatch,
          "vector lengths differ");
  for (std::size_t i = 0; i < a.size(); ++i) acc[i] += c * a[i];
}

inline FieldElement dot(std::span<const FieldElement> a,
                        std::span<const FieldElement> b) {
  require(a.size() == b.size() && !a.empty(), ErrorCode::kDimensionMismatch,
          "dot of mismatched or empty vectors");
  FieldElement acc{0, a[0].modulus()};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline std::vector<std::uint64_t> raw_values(std::span<const FieldElement> a) {
  std::vector<std::uint64_t> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].value();
  return out;
}

// Polynomial over GF(q), lowest degree first. Trailing zero coefficients are
// trimmed, so the zero polynomial has no coefficients.
class Polynomial {
 public:
  explicit Polynomial(std::uint64_t modulus) : modulus_(modulus) {}
  Polynomial(std::uint64_t modulus, Vector coefficients)
      : modulus_(modulus), coefficients_(std::move(coefficients)) {
    for (const auto& c : coefficients_) {
      if (c.modulus() != modulus_) {
        fail(ErrorCode::kModulusMismatch,
             "coefficient outside GF(" + std::to_string(modulus_) + ")");
      }
    }
    trim();
  }

  std::uint64_t modulus() const { return modulus_; }
  const Vector& coefficients() const { return coefficients_; }
  bool is_zero() const { return coefficients_.empty(); }
  // Degree of the zero polynomial is reported as -1.
  long degree() const { return static_cast<long>(coefficients_.size()) - 1; }

  FieldElement coefficient(std::size_t i) const {
    return i < coefficients_.size() ? coefficients_[i]
                                    : FieldElement{0, modulus_};
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    require(a.modulus_ == b.modulus_, ErrorCode::kModulusMismatch,
            "polynomials over different fields");
    Vector c(std::max(a.coefficients_.size(), b.coefficients_.size()),
             FieldElement{0, a.modulus_});
    for (std::size_t i = 0; i < c.size(); ++i) {
      c[i] = a.coefficient(i) + b.coefficient(i);
    }
    return {a.modulus_, std::move(c)};
  }

  friend Polynomial operator*(FieldElement s, const Polynomial& p) {
    require(s.modulus() == p.modulus_, ErrorCode::kModulusMismatch,
            "scalar outside polynomial field");
    return {p.modulus_, scale(s, p.coefficients_)};
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    require(a.modulus_ == b.modulus_, ErrorCode::kModulusMismatch,
            "polynomials over different fields");
    if (a.is_zero() || b.is_zero()) return Polynomial(a.modulus_);
    Vector c(a.coefficients_.size() + b.coefficients_.size() - 1,
             FieldElement{0, a.modulus_});
    for (std::size_t i = 0; i < a.coefficients_.size(); ++i) {
      for (std::size_t j = 0; j < b.coefficients_.size(); ++j) {
        c[i + j] += a.coefficients_[i] * b.coefficients_[j];
      }
    }
    return {a.modulus_, std::move(c)};
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.modulus_ == b.modulus_ && a.coefficients_ == b.coefficients_;
  }

 private:
  void trim() {
    while (!coefficients_.empty() && coefficients_.back().is_zero()) {
      coefficients_.pop_back();
    }
  }

  std::uint64_t modulus_;
  Vector coefficients_;
};

// Horner evaluation.
inline FieldElement eval(const Polynomial& p, FieldElement x) {
  require(x.modulus() == p.modulus(), ErrorCode::kModulusMismatch,
          "evaluation point outside polynomial field");
  FieldElement acc{0, p.modulus()};
  const auto& c = p.coefficients();
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

struct Point {
  FieldElement x;
  FieldElement y;
};

// Unique polynomial of degree < points.size() through `points`.
//
// Builds the master polynomial prod_m (x - x_m) once, then obtains each
// Lagrange basis numerator by synthetic division, for O(n^2) total.
inline Polynomial lagrange_interpolate(std::span<const Point> points) {
  require(!points.empty(), ErrorCode::kInsufficientAnswers,
          "interpolation needs at least one point");
  const std::uint64_t q = points[0].x.modulus();
  const FieldElement zero{0, q};
  const FieldElement one{1 % q, q};
  const std::size_t n = points.size();

  for (std::size_t i = 0; i < n; ++i) {
    require(points[i].x.modulus() == q && points[i].y.modulus() == q,
            ErrorCode::kModulusMismatch, "points over different fields");
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i].x == points[j].x) {
        fail(ErrorCode::kDuplicateAbscissa,
             "abscissa " + std::to_string(points[i].x.value()) + " repeated");
      }
    }
  }

  // master[k] is the coefficient of x^k; degree n.
  Vector master(n + 1, zero);
  master[0] = one;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = m + 1; k > 0; --k) {
      master[k] = master[k - 1] - points[m].x * master[k];
    }
    master[0] = -(points[m].x * master[0]);
  }

  Vector result(n, zero);
  Vector basis(n, zero);
  for (std::size_t j = 0; j < n; ++j) {
    const FieldElement xj = points[j].x;
    // master / (x - xj), high to low.
    FieldElement carry = zero;
    for (std::size_t k = n; k > 0; --k) {
      carry = master[k] + carry * xj;
      basis[k - 1] = carry;
    }
    FieldElement denom = one;
    for (std::size_t m = 0; m < n; ++m) {
      if (m != j) denom *= xj - points[m].x;
    }
    const FieldElement w = points[j].y * denom.inverse();
    for (std::size_t k = 0; k < n; ++k) result[k] += w * basis[k];
  }
  return {q, std::move(result)};
}

}  // namespace secagg

#endif  // SECAGG_FIELD_HPP_
