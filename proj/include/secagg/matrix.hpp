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

// Dense matrices over GF(q): Gaussian elimination, Vandermonde MDS encoding
// and Reed-Solomon erasure decoding.

#ifndef SECAGG_MATRIX_HPP_
#define SECAGG_MATRIX_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "secagg/error.hpp"
#include "secagg/field.hpp"

namespace secagg {

class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, std::uint64_t modulus)
      : rows_(rows),
        cols_(cols),
        modulus_(modulus),
        entries_(rows * cols, FieldElement{0, modulus}) {}

  Matrix(std::size_t rows, std::size_t cols, Vector entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    require(entries_.size() == rows * cols, ErrorCode::kDimensionMismatch,
            "entry count does not match shape");
    require(!entries_.empty(), ErrorCode::kDimensionMismatch,
            "use the modulus constructor for empty matrices");
    modulus_ = entries_[0].modulus();
    for (const auto& e : entries_) {
      require(e.modulus() == modulus_, ErrorCode::kModulusMismatch,
              "mixed moduli in matrix");
    }
  }

  static Matrix from_rows(const FieldConfig& f,
                          const std::vector<std::vector<std::int64_t>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows[0].size();
    Matrix m(r, c, f.modulus());
    for (std::size_t i = 0; i < r; ++i) {
      require(rows[i].size() == c, ErrorCode::kDimensionMismatch,
              "ragged rows");
      for (std::size_t j = 0; j < c; ++j) m(i, j) = f.element(rows[i][j]);
    }
    return m;
  }

  static Matrix identity(std::size_t n, std::uint64_t modulus) {
    Matrix m(n, n, modulus);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = {1, modulus};
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t modulus() const { return modulus_; }

  FieldElement& operator()(std::size_t r, std::size_t c) {
    return entries_[r * cols_ + c];
  }
  const FieldElement& operator()(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  std::span<const FieldElement> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }
  Vector column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_, modulus_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    }
    return t;
  }

  Matrix select_columns(std::span<const std::size_t> idx) const {
    Matrix s(rows_, idx.size(), modulus_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        require(idx[k] < cols_, ErrorCode::kDimensionMismatch,
                "column index out of range");
        s(r, k) = (*this)(r, idx[k]);
      }
    }
    return s;
  }

  // [this | other]
  Matrix hconcat(const Matrix& other) const {
    require(rows_ == other.rows_ && modulus_ == other.modulus_,
            ErrorCode::kDimensionMismatch, "hconcat shape mismatch");
    Matrix m(rows_, cols_ + other.cols_, modulus_);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) m(r, c) = (*this)(r, c);
      for (std::size_t c = 0; c < other.cols_; ++c) {
        m(r, cols_ + c) = other(r, c);
      }
    }
    return m;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols_ == b.rows_ && a.modulus_ == b.modulus_,
            ErrorCode::kDimensionMismatch, "matmul shape mismatch");
    Matrix m(a.rows_, b.cols_, a.modulus_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const FieldElement aik = a(i, k);
        if (aik.is_zero()) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) m(i, j) += aik * b(k, j);
      }
    }
    return m;
  }

  friend Vector operator*(const Matrix& a, std::span<const FieldElement> v) {
    require(a.cols_ == v.size(), ErrorCode::kDimensionMismatch,
            "matrix-vector shape mismatch");
    Vector out(a.rows_, FieldElement{0, a.modulus_});
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) out[i] += a(i, k) * v[k];
    }
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
           a.modulus_ == b.modulus_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::uint64_t modulus_ = 0;
  Vector entries_;
};

struct RowEchelon {
  Matrix reduced;
  std::vector<std::size_t> pivot_columns;
};

// Reduced row echelon form by Gauss-Jordan elimination.
inline RowEchelon row_reduce(Matrix m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t sel = row;
    while (sel < m.rows() && m(sel, col).is_zero()) ++sel;
    if (sel == m.rows()) continue;
    if (sel != row) {
      for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(sel, c), m(row, c));
    }
    const FieldElement pinv = m(row, col).inverse();
    for (std::size_t c = col; c < m.cols(); ++c) m(row, c) *= pinv;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col).is_zero()) continue;
      const FieldElement factor = m(r, col);
      for (std::size_t c = col; c < m.cols(); ++c) {
        m(r, c) -= factor * m(row, c);
      }
    }
    pivots.push_back(col);
    ++row;
  }
  return {std::move(m), std::move(pivots)};
}

inline std::size_t rank(const Matrix& m) {
  return row_reduce(m).pivot_columns.size();
}

// Basis of {x : m x = 0}, one vector per free column.
inline std::vector<Vector> kernel_basis(const Matrix& m) {
  const RowEchelon e = row_reduce(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : e.pivot_columns) is_pivot[c] = true;

  std::vector<Vector> basis;
  const FieldElement zero{0, m.modulus()};
  const FieldElement one{1, m.modulus()};
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    Vector x(m.cols(), zero);
    x[free] = one;
    for (std::size_t r = 0; r < e.pivot_columns.size(); ++r) {
      x[e.pivot_columns[r]] = -e.reduced(r, free);
    }
    basis.push_back(std::move(x));
  }
  return basis;
}

inline bool in_column_space(const Matrix& m, std::span<const FieldElement> v) {
  require(v.size() == m.rows(), ErrorCode::kDimensionMismatch,
          "vector length must equal row count");
  Matrix col(m.rows(), 1, m.modulus());
  for (std::size_t r = 0; r < m.rows(); ++r) col(r, 0) = v[r];
  return rank(m.hconcat(col)) == rank(m);
}

// Unique solution of a x = b for square nonsingular a.
inline Vector solve(const Matrix& a, std::span<const FieldElement> b) {
  require(a.rows() == a.cols() && b.size() == a.rows(),
          ErrorCode::kDimensionMismatch, "solve needs a square system");
  Matrix aug(a.rows(), 1, a.modulus());
  for (std::size_t r = 0; r < a.rows(); ++r) aug(r, 0) = b[r];
  const RowEchelon e = row_reduce(a.hconcat(aug));
  require(e.pivot_columns.size() == a.rows() &&
              (a.rows() == 0 || e.pivot_columns.back() < a.cols()),
          ErrorCode::kSingularSubmatrix, "system matrix is singular");
  Vector x(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) x[r] = e.reduced(r, a.cols());
  return x;
}

inline Matrix inverse(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorCode::kDimensionMismatch,
          "inverse of non-square matrix");
  const std::size_t n = a.rows();
  const RowEchelon e = row_reduce(a.hconcat(Matrix::identity(n, a.modulus())));
  require(e.pivot_columns.size() == n && (n == 0 || e.pivot_columns.back() < n),
          ErrorCode::kSingularSubmatrix, "matrix is singular");
  Matrix inv(n, n, a.modulus());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) inv(r, c) = e.reduced(r, n + c);
  }
  return inv;
}

// u x points.size() matrix with entry (i, j) = points[j]^i.
inline Matrix vandermonde(std::size_t u, std::span<const FieldElement> points) {
  require(u >= 1 && !points.empty(), ErrorCode::kDimensionMismatch,
          "vandermonde needs u >= 1 and at least one point");
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) {
        fail(ErrorCode::kDuplicatePoints,
             "point " + std::to_string(points[i].value()) + " repeated");
      }
    }
  }
  Matrix m(u, points.size(), points[0].modulus());
  for (std::size_t j = 0; j < points.size(); ++j) {
    FieldElement p = {1, points[0].modulus()};
    for (std::size_t i = 0; i < u; ++i) {
      m(i, j) = p;
      p *= points[j];
    }
  }
  return m;
}

// Points 1..k reduced into the field.
inline Vector consecutive_points(std::size_t k, const FieldConfig& f) {
  Vector pts(k);
  for (std::size_t j = 0; j < k; ++j) pts[j] = f.element_u(j + 1);
  return pts;
}

// User points alphas (one per user, nonzero) and retrieval points betas for
// Lagrange-encoded queries. All k + L' points are pairwise distinct.
struct EvaluationPoints {
  Vector alphas;
  Vector betas;

  // alpha_i = i for i in 1..k, beta_l = k + l for l in 1..lprime.
  static EvaluationPoints standard(std::size_t k, std::size_t lprime,
                                   const FieldConfig& f) {
    require(f.modulus() > k + lprime, ErrorCode::kPointCollision,
            "GF(" + std::to_string(f.modulus()) + ") has fewer than " +
                std::to_string(k + lprime) + " distinct nonzero points");
    EvaluationPoints p;
    for (std::size_t i = 1; i <= k; ++i) p.alphas.push_back(f.element_u(i));
    for (std::size_t l = 1; l <= lprime; ++l) {
      p.betas.push_back(f.element_u(k + l));
    }
    p.validate();
    return p;
  }

  void validate() const {
    Vector all = alphas;
    all.insert(all.end(), betas.begin(), betas.end());
    for (const auto& a : alphas) {
      require(!a.is_zero(), ErrorCode::kPointCollision, "alpha is zero");
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (all[i] == all[j]) {
          fail(ErrorCode::kPointCollision, "evaluation point " +
                                              std::to_string(all[i].value()) +
                                              " used twice");
        }
      }
    }
  }
};

// Share j = sum_m subkeys[m] * code(m, j), componentwise over the sub-key
// symbols. code is U x K.
inline std::vector<Vector> mds_encode(std::span<const Vector> subkeys,
                                      const Matrix& code) {
  require(subkeys.size() == code.rows(), ErrorCode::kDimensionMismatch,
          "need one sub-key per code row");
  const std::size_t width = subkeys.empty() ? 0 : subkeys[0].size();
  for (const auto& s : subkeys) {
    require(s.size() == width, ErrorCode::kDimensionMismatch,
            "sub-keys differ in length");
  }
  std::vector<Vector> shares(code.cols(),
                             Vector(width, FieldElement{0, code.modulus()}));
  for (std::size_t j = 0; j < code.cols(); ++j) {
    for (std::size_t m = 0; m < code.rows(); ++m) {
      axpy(shares[j], code(m, j), subkeys[m]);
    }
  }
  return shares;
}

struct CodedShare {
  std::size_t column;
  Vector symbols;
};

// Recovers the U sub-keys from any U shares. Extra shares are ignored; the
// first U (in the given order) are used.
inline std::vector<Vector> rs_erasure_decode(std::span<const CodedShare> shares,
                                             const Matrix& code) {
  const std::size_t u = code.rows();
  require(shares.size() >= u, ErrorCode::kInsufficientShares,
          "have " + std::to_string(shares.size()) + " shares, need " +
              std::to_string(u));
  std::vector<std::size_t> cols(u);
  for (std::size_t k = 0; k < u; ++k) {
    cols[k] = shares[k].column;
    for (std::size_t m = 0; m < k; ++m) {
      require(cols[m] != cols[k], ErrorCode::kDuplicatePoints,
              "share column repeated");
    }
  }
  const std::size_t width = shares[0].symbols.size();
  // share_k[s] = sum_m sub_m[s] * code(m, cols[k])  =>  sub = (C^T)^{-1} share
  const Matrix system_inv = inverse(code.select_columns(cols).transpose());
  std::vector<Vector> subkeys(u, Vector(width, FieldElement{0, code.modulus()}));
  for (std::size_t k = 0; k < u; ++k) {
    require(shares[k].symbols.size() == width, ErrorCode::kDimensionMismatch,
            "shares differ in length");
    for (std::size_t m = 0; m < u; ++m) {
      axpy(subkeys[m], system_inv(m, k), shares[k].symbols);
    }
  }
  return subkeys;
}

}  // namespace secagg

#endif  // SECAGG_MATRIX_HPP_
