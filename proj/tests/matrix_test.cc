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

#include "secagg/matrix.hpp"

#include <cstdint>
#include <vector>

#include "gtest/gtest.h"
#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/random.hpp"

namespace secagg {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, const FieldConfig& f,
                     Rng& rng) {
  return Matrix(r, c, f.uniform_vector(r * c, rng));
}

TEST(MatrixTest, IdentityRankAndKernel) {
  const Matrix id = Matrix::identity(3, 11);
  EXPECT_EQ(rank(id), 3u);
  EXPECT_TRUE(kernel_basis(id).empty());
}

TEST(MatrixTest, RankOfExampleCode) {
  const FieldConfig f(11);
  const Matrix m = Matrix::from_rows(f, {{1, 1, 1}, {1, 2, 4}});
  EXPECT_EQ(rank(m), 2u);
  const auto kernel = kernel_basis(m);
  ASSERT_EQ(kernel.size(), 1u);
  for (auto e : m * kernel[0]) EXPECT_TRUE(e.is_zero());
}

TEST(MatrixTest, SumOfColumnsIsInColumnSpace) {
  const FieldConfig f(11);
  const Matrix m = Matrix::from_rows(f, {{1, 1, 1}, {1, 2, 4}, {0, 0, 0}});
  EXPECT_TRUE(in_column_space(m, add(m.column(0), m.column(2))));
  EXPECT_FALSE(in_column_space(m, f.vector({0, 0, 1})));
}

TEST(MatrixTest, RankNullityOnRandomMatrices) {
  const FieldConfig f(7);
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 1 + rng.below(6);
    const std::size_t c = 1 + rng.below(6);
    Matrix m = random_matrix(r, c, f, rng);
    // Force some dependent rows now and then.
    if (r > 1 && rng.below(2) == 0) {
      for (std::size_t j = 0; j < c; ++j) m(r - 1, j) = m(0, j) * f.element(3);
    }
    const auto kernel = kernel_basis(m);
    EXPECT_EQ(rank(m) + kernel.size(), c);
    EXPECT_EQ(rank(m), rank(m.transpose()));
    for (const auto& k : kernel) {
      for (auto e : m * k) EXPECT_TRUE(e.is_zero());
    }
  }
}

TEST(MatrixTest, SolveAndInverseRoundTrip) {
  const FieldConfig f(13);
  Rng rng(8);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    const Matrix a = random_matrix(n, n, f, rng);
    if (rank(a) != n) {
      EXPECT_THROW(inverse(a), Error);
      continue;
    }
    ++solved;
    const Vector x = f.uniform_vector(n, rng);
    EXPECT_EQ(solve(a, a * x), x);
    EXPECT_EQ(inverse(a) * a, Matrix::identity(n, 13));
    EXPECT_EQ(a * inverse(a), Matrix::identity(n, 13));
  }
  EXPECT_GT(solved, 100);
}

TEST(MatrixTest, SingularSolveThrows) {
  const FieldConfig f(11);
  const Matrix a = Matrix::from_rows(f, {{1, 2}, {2, 4}});
  try {
    solve(a, f.vector({1, 1}));
    FAIL() << "expected SingularSubmatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularSubmatrix);
  }
}

TEST(MatrixTest, ProductMatchesIntegerOracle) {
  const FieldConfig f(11);
  Rng rng(2);
  const Matrix a = random_matrix(3, 4, f, rng);
  const Matrix b = random_matrix(4, 2, f, rng);
  const Matrix c = a * b;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      std::uint64_t acc = 0;
      for (std::size_t k = 0; k < 4; ++k) acc += a(i, k).value() * b(k, j).value();
      EXPECT_EQ(c(i, j).value(), acc % 11);
    }
  }
}

TEST(MatrixTest, ShapeErrors) {
  const Matrix a(2, 3, 11);
  const Matrix b(2, 3, 11);
  EXPECT_THROW(a * b, Error);
  EXPECT_THROW(a.hconcat(Matrix(3, 1, 11)), Error);
  EXPECT_THROW(a * b.transpose() * Matrix(3, 3, 7), Error);
}

}  // namespace
}  // namespace secagg
