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

#include "secagg/verify.hpp"

#include <vector>

#include "gtest/gtest.h"
#include "secagg/error.hpp"
#include "secagg/field.hpp"
#include "secagg/model.hpp"
#include "secagg/random.hpp"

namespace secagg::verify {
namespace {

TEST(HelpersTest, DigitsAndBoundedPow) {
  const FieldConfig f(5);
  EXPECT_EQ(digits(0, 3, 5), f.vector({0, 0, 0}));
  EXPECT_EQ(digits(7, 3, 5), f.vector({2, 1, 0}));
  EXPECT_EQ(bounded_pow(11, 3, 10000), 1331u);
  EXPECT_FALSE(bounded_pow(11, 4, 10000).has_value());
  const InputSet in = unstack(f.vector({1, 2, 3, 4}), 2, 2);
  EXPECT_EQ(in.w[1], f.vector({3, 4}));
}

TEST(EnumerateTest, CountsValidDemands) {
  // Single scheme over GF(3) with K = 2: all-nonzero rows, 2^2 of them.
  EXPECT_EQ(enumerate_demands({2, 1, 1, 3, 1}, SchemeId::kSingle).size(), 4u);
  // Multi over GF(7), K = 4, Kc = 2 has 7^8 matrices: over the limit.
  EXPECT_THROW(enumerate_demands({4, 3, 2, 7, 2}, SchemeId::kMulti, 1u << 20),
               Error);
}

TEST(LinearViewTest, OffsetIsZeroAndProbesAgree) {
  const FieldConfig f(11);
  const ProblemParams p{4, 3, 2, 11, 2};
  Rng rng(3);
  for (SchemeId s : {SchemeId::kSingle, SchemeId::kMulti, SchemeId::kBaseline}) {
    ProblemParams ps = p;
    if (s == SchemeId::kSingle) ps.kc = 1;
    const auto d = sample_demand(ps, s, rng);
    const auto run =
        sample_frozen_run(s, ps, d, DropoutSchedule::none(4), rng, {});
    const auto lin = extract_linear_view(run, rng, 50);
    for (const auto& e : lin.offset) EXPECT_TRUE(e.is_zero());
    EXPECT_EQ(lin.a.cols(), run.input_symbols);
    EXPECT_EQ(lin.b.cols(), run.randomness_symbols);
  }
}

TEST(LinearViewTest, NonlinearViewIsDetected) {
  FrozenRun run;
  run.params = {2, 1, 1, 11, 1};
  run.input_symbols = 2;
  run.randomness_symbols = 1;
  run.view = [](std::span<const FieldElement> w, std::span<const FieldElement>) {
    return Vector{w[0] * w[1]};
  };
  Rng rng(1);
  try {
    extract_linear_view(run, rng, 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonlinearityDetected);
  }
}

TEST(SecurityTest, AllSchemesPass) {
  EXPECT_TRUE(security_trials(SchemeId::kSingle, {3, 2, 1, 11, 2}, 25, 1)
                  .verdict()
                  .passed());
  EXPECT_TRUE(security_trials(SchemeId::kMulti, {4, 3, 2, 11, 2}, 25, 2)
                  .verdict()
                  .passed());
  EXPECT_TRUE(security_trials(SchemeId::kBaseline, {4, 3, 2, 11, 3}, 25, 3)
                  .verdict()
                  .passed());
}

TEST(SecurityTest, PlantedControlsFail) {
  const Plant no_masking{.no_masking = true};
  for (SchemeId s : {SchemeId::kSingle, SchemeId::kMulti, SchemeId::kBaseline}) {
    const ProblemParams p = s == SchemeId::kSingle ? ProblemParams{3, 2, 1, 11, 2}
                                                   : ProblemParams{4, 3, 2, 11, 3};
    const auto sum = security_trials(s, p, 10, 4, no_masking);
    EXPECT_EQ(sum.passes, 0u) << scheme_name(s);
    EXPECT_FALSE(sum.verdict().passed());
  }
  // Reusing a mask across retrievals leaks a key difference once every key
  // is observed, i.e. with no dropouts.
  const auto reuse = security_trials(SchemeId::kMulti, {4, 3, 2, 11, 2}, 10, 5,
                                     Plant{.reuse_mask = true}, 0.0);
  EXPECT_EQ(reuse.passes, 0u);
}

TEST(PrivacyTest, QueryHistogramsAreUniform) {
  const ProblemParams ps{3, 2, 1, 11, 2};
  const auto singles = enumerate_demands(ps, SchemeId::kSingle);
  ASSERT_EQ(singles.size(), 1000u);
  for (std::size_t user = 0; user < 3; ++user) {
    EXPECT_TRUE(privacy_query_uniformity(SchemeId::kSingle, ps, singles, user)
                    .passed());
  }
  const FieldConfig f(7);
  const ProblemParams pm{4, 3, 2, 7, 2};
  const std::vector<DemandMatrix> multis = {
      validate_demand(Matrix::from_rows(f, {{1, 1, 1, 1}, {1, 2, 3, 4}}), pm,
                      SchemeId::kMulti),
      validate_demand(Matrix::from_rows(f, {{1, 0, 0, 0}, {0, 1, 5, 6}}), pm,
                      SchemeId::kMulti)};
  EXPECT_TRUE(privacy_query_uniformity(SchemeId::kMulti, pm, multis, 2).passed());
}

TEST(PrivacyTest, LeakControlFails) {
  const ProblemParams ps{3, 2, 1, 11, 2};
  const FieldConfig f(11);
  const std::vector<DemandMatrix> ds = {
      validate_demand(Matrix::from_rows(f, {{1, 1, 1}}), ps, SchemeId::kSingle),
      validate_demand(Matrix::from_rows(f, {{2, 1, 1}}), ps, SchemeId::kSingle)};
  const Plant leak{.leak_demand = true};
  EXPECT_EQ(privacy_query_uniformity(SchemeId::kSingle, ps, ds, 0, leak).outcome,
            Outcome::kFail);

  const FieldConfig f7(7);
  const ProblemParams pm{4, 3, 2, 7, 2};
  const std::vector<DemandMatrix> multis = {
      validate_demand(Matrix::from_rows(f7, {{1, 1, 1, 1}, {1, 2, 3, 4}}), pm,
                      SchemeId::kMulti)};
  EXPECT_EQ(privacy_query_uniformity(SchemeId::kMulti, pm, multis, 0, leak).outcome,
            Outcome::kFail);
  EXPECT_EQ(privacy_query_uniformity(SchemeId::kBaseline, pm, multis, 0).outcome,
            Outcome::kSkipped);
  EXPECT_THROW(
      privacy_query_uniformity(SchemeId::kMulti, pm, multis, 0, {}, 1000), Error);
}

TEST(EntropyTest, Basics) {
  const std::vector<std::uint64_t> uniform = {0, 1, 2};
  EXPECT_NEAR(entropy_sorted(uniform, 3), 1.0, 1e-12);
  const std::vector<std::uint64_t> point = {5, 5, 5, 5};
  EXPECT_EQ(entropy_sorted(point, 3), 0.0);
  const auto c = counts_sorted(std::vector<std::uint64_t>{1, 1, 4});
  EXPECT_EQ(c, (CountVector{{1, 2}, {4, 1}}));
}

TEST(MiTest, SmallInstanceIsZero) {
  MiOptions opt;
  opt.max_demands = 2;
  const auto r = mi_exhaustive({3, 2, 1, 3, 2}, opt);
  EXPECT_EQ(r.demands, 2u);
  EXPECT_TRUE(r.all_zero());
  EXPECT_NEAR(r.security_mi, 0.0, 1e-9);
  EXPECT_NEAR(r.decode_entropy, 0.0, 1e-9);
  for (double v : r.privacy_mi) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(MiTest, ControlsAreNonzero) {
  MiOptions opt;
  opt.max_demands = 2;
  opt.plant.no_masking = true;
  EXPECT_FALSE(mi_exhaustive({3, 2, 1, 3, 2}, opt).security_zero);
  MiOptions leak;
  leak.plant.leak_demand = true;
  const auto r = mi_exhaustive({3, 2, 1, 3, 2}, leak);
  EXPECT_TRUE(r.security_zero);
  EXPECT_FALSE(r.privacy_zero[0]);
  EXPECT_GT(r.privacy_mi[0], 0.1);
}

TEST(MiTest, RejectsOversizedEnumeration) {
  MiOptions opt;
  opt.max_states = 1000;
  try {
    mi_exhaustive({3, 2, 1, 11, 2}, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEnumerationTooLarge);
  }
}

TEST(ChiSquareTest, IdenticalAndDisjointCounts) {
  const std::vector<std::uint64_t> a = {100, 100, 100, 100};
  const auto same = chi_square_two_sample(a, a);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.dof, 3u);
  EXPECT_NEAR(same.p_value, 1.0, 1e-12);
  const std::vector<std::uint64_t> b = {400, 0, 0, 0};
  EXPECT_LT(chi_square_two_sample(a, b).p_value, 1e-10);
  // One used bucket: no degrees of freedom.
  const std::vector<std::uint64_t> c = {5, 0};
  EXPECT_EQ(chi_square_two_sample(c, c).dof, 0u);
}

TEST(CompareTest, SmallSamplePassAndLeakFail) {
  const FieldConfig f(7);
  const ProblemParams p{4, 3, 2, 7, 2};
  const auto d1 = validate_demand(
      Matrix::from_rows(f, {{1, 1, 1, 1}, {1, 2, 3, 4}}), p, SchemeId::kMulti);
  const auto d2 = validate_demand(
      Matrix::from_rows(f, {{1, 0, 0, 0}, {0, 1, 5, 6}}), p, SchemeId::kMulti);
  CompareOptions opt;
  opt.samples = 4000;
  opt.hash_buckets = 16;
  opt.seed = 3;
  EXPECT_TRUE(view_distribution_compare(p, d1, d2, opt).verdict.passed());
  opt.plant.leak_demand = true;
  EXPECT_FALSE(view_distribution_compare(p, d1, d2, opt).verdict.passed());
  opt.samples = 20;
  try {
    view_distribution_compare(p, d1, d2, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSamples);
  }
}

TEST(DecodeTrialsTest, PassesForEveryScheme) {
  EXPECT_TRUE(decode_trials(SchemeId::kSingle, {5, 3, 1, 11, 4}, 50, 1).passed());
  EXPECT_TRUE(decode_trials(SchemeId::kMulti, {5, 3, 2, 11, 4}, 50, 1, 2).passed());
  EXPECT_TRUE(decode_trials(SchemeId::kBaseline, {5, 3, 2, 11, 4}, 50, 1).passed());
}

}  // namespace
}  // namespace secagg::verify
