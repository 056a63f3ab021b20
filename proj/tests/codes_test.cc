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

#include <cstdint>
#include <vector>

#include "gtest/gtest.h"
#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/harness.hpp"
#include "secagg/matrix.hpp"
#include "secagg/random.hpp"

namespace secagg {
namespace {

TEST(VandermondeTest, Examples) {
  const FieldConfig f11(11);
  EXPECT_EQ(vandermonde(2, f11.vector({1, 2, 4})),
            Matrix::from_rows(f11, {{1, 1, 1}, {1, 2, 4}}));
  EXPECT_EQ(vandermonde(1, f11.vector({3, 5, 9, 10})),
            Matrix::from_rows(f11, {{1, 1, 1, 1}}));
  const FieldConfig f7(7);
  EXPECT_EQ(vandermonde(3, f7.vector({1, 2, 3})),
            Matrix::from_rows(f7, {{1, 1, 1}, {1, 2, 3}, {1, 4, 2}}));
}

TEST(VandermondeTest, RejectsDuplicatePoints) {
  const FieldConfig f(7);
  try {
    vandermonde(2, f.vector({1, 8}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicatePoints);
  }
}

// Every U x U submatrix of a Vandermonde code on distinct points is
// invertible, for every U and every column subset at K <= 8.
TEST(VandermondeTest, MdsPropertyExhaustive) {
  const FieldConfig f(11);
  for (std::size_t k = 2; k <= 8; ++k) {
    const Vector pts = consecutive_points(k, f);
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < k; ++i) all.push_back(i);
    for (std::size_t u = 1; u <= k; ++u) {
      const Matrix code = vandermonde(u, pts);
      for (const auto& cols : subsets_at_least(all, u)) {
        if (cols.size() != u) continue;
        ASSERT_EQ(rank(code.select_columns(cols)), u) << "k=" << k << " u=" << u;
      }
    }
  }
}

TEST(MdsEncodeTest, ExampleShares) {
  const FieldConfig f(11);
  const Matrix code = Matrix::from_rows(f, {{1, 1, 1}, {1, 2, 4}});
  const Vector z1 = f.vector({3});
  const Vector z2 = f.vector({5});
  const auto shares = mds_encode(std::vector<Vector>{z1, z2}, code);
  ASSERT_EQ(shares.size(), 3u);
  EXPECT_EQ(shares[0], add(z1, z2));
  EXPECT_EQ(shares[1], add(z1, scale(f.element(2), z2)));
  EXPECT_EQ(shares[2], add(z1, scale(f.element(4), z2)));

  const auto zeros = mds_encode(std::vector<Vector>{f.zeros(2), f.zeros(2)}, code);
  for (const auto& s : zeros) EXPECT_EQ(s, f.zeros(2));
}

TEST(MdsEncodeTest, MatchesMatmulOracle) {
  const FieldConfig f(11);
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 3 + rng.below(4);
    const std::size_t u = 1 + rng.below(k - 1);
    const std::size_t width = 1 + rng.below(3);
    const Matrix code = vandermonde(u, consecutive_points(k, f));
    std::vector<Vector> sub;
    for (std::size_t m = 0; m < u; ++m) sub.push_back(f.uniform_vector(width, rng));
    const auto shares = mds_encode(sub, code);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t s = 0; s < width; ++s) {
        std::uint64_t acc = 0;
        for (std::size_t m = 0; m < u; ++m) {
          acc += sub[m][s].value() * code(m, j).value();
        }
        ASSERT_EQ(shares[j][s].value(), acc % 11);
      }
    }
  }
}

TEST(RsDecodeTest, ExampleRecoversSubkeySums) {
  // Shares of Z_1 + Z_2 held at columns 1 and 2 of the K = 3 code.
  const FieldConfig f(11);
  const Matrix code = Matrix::from_rows(f, {{1, 1, 1}, {1, 2, 4}});
  const std::vector<Vector> z1 = {f.vector({1, 7}), f.vector({4, 2})};
  const std::vector<Vector> z2 = {f.vector({9, 3}), f.vector({6, 10})};
  const auto s1 = mds_encode(z1, code);
  const auto s2 = mds_encode(z2, code);
  const std::vector<CodedShare> got = {{0, add(s1[0], s2[0])},
                                       {1, add(s1[1], s2[1])}};
  const auto sub = rs_erasure_decode(got, code);
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub[0], add(z1[0], z2[0]));
  EXPECT_EQ(sub[1], add(z1[1], z2[1]));

  const std::vector<CodedShare> zeros = {{1, f.zeros(2)}, {2, f.zeros(2)}};
  for (const auto& s : rs_erasure_decode(zeros, code)) EXPECT_EQ(s, f.zeros(2));
}

TEST(RsDecodeTest, RoundTripEverySubset) {
  const FieldConfig f(11);
  Rng rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + rng.below(7);
    const std::size_t u = 1 + rng.below(k);
    const Matrix code = vandermonde(u, consecutive_points(k, f));
    std::vector<Vector> sub;
    for (std::size_t m = 0; m < u; ++m) sub.push_back(f.uniform_vector(2, rng));
    const auto shares = mds_encode(sub, code);
    std::vector<std::size_t> all;
    for (std::size_t i = 0; i < k; ++i) all.push_back(i);
    for (const auto& cols : subsets_at_least(all, u)) {
      std::vector<CodedShare> held;
      for (auto c : cols) held.push_back({c, shares[c]});
      ASSERT_EQ(rs_erasure_decode(held, code), sub);
    }
  }
}

TEST(RsDecodeTest, TooFewSharesThrows) {
  const FieldConfig f(11);
  const Matrix code = vandermonde(3, consecutive_points(5, f));
  const std::vector<CodedShare> held = {{0, f.zeros(1)}, {4, f.zeros(1)}};
  try {
    rs_erasure_decode(held, code);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientShares);
  }
}

TEST(EvaluationPointsTest, StandardLayout) {
  const FieldConfig f(11);
  const auto pts = EvaluationPoints::standard(4, 2, f);
  EXPECT_EQ(pts.alphas, f.vector({1, 2, 3, 4}));
  EXPECT_EQ(pts.betas, f.vector({5, 6}));
  try {
    EvaluationPoints::standard(5, 2, FieldConfig(7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPointCollision);
  }
  EvaluationPoints bad{f.vector({1, 2}), f.vector({2})};
  EXPECT_THROW(bad.validate(), Error);
}

}  // namespace
}  // namespace secagg
