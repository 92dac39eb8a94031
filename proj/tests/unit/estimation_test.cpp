// Copyright 2026 The socplan Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "socplan/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "socplan/domain.hpp"

namespace socplan {
namespace {

// Brute force over every ordering of the pooled sample.
double full_permutation_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto mean_diff = [&](const std::vector<double>& v) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) (i < a.size() ? s1 : s2) += v[i];
    return std::fabs(s1 / a.size() - s2 / b.size());
  };
  const double observed = mean_diff(pooled);
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t hits = 0, total = 0;
  std::vector<double> v(pooled.size());
  do {
    for (std::size_t i = 0; i < order.size(); ++i) v[i] = pooled[order[i]];
    if (mean_diff(v) >= observed - 1e-9) ++hits;
    ++total;
  } while (std::next_permutation(order.begin(), order.end()));
  return static_cast<double>(hits) / static_cast<double>(total);
}

CompositeAssays plot(std::vector<double> values, std::int64_t n) {
  return CompositeAssays{"p", std::move(values), n};
}

TEST(Estimates, MeanAndPlotVariance) {
  const CompositeAssays d = plot({3.0, 4.0, 5.0}, 12);
  EXPECT_DOUBLE_EQ(mean_estimate(d), 4.0);
  EXPECT_DOUBLE_EQ(plot_variance_estimate(d), 4.0 * 1.0);
}

TEST(Estimates, SingleAssayIsNotEstimable) {
  try {
    se_estimate(plot({3.0}, 10), 0.1);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("not estimable"), std::string::npos);
  }
}

TEST(Estimates, RejectsMoreAssaysThanCores) {
  EXPECT_THROW(mean_estimate(plot({1.0, 2.0, 3.0}, 2)), ValidationError);
  EXPECT_THROW(mean_estimate(plot({1.0, -2.0}, 4)), ValidationError);
}

TEST(Estimates, SeFormula) {
  const CompositeAssays d = plot({3.2, 3.9, 3.5, 3.7}, 20);
  const double m = 3.575;
  double ss = 0.0;
  for (double x : d.values) ss += (x - m) * (x - m);
  const double sp2 = 20.0 / 4.0 * ss / 3.0;
  const double sd = 0.11;
  const double expected = std::sqrt(sp2 * (1 + sd * sd) / 20.0 + m * m * sd * sd / 4.0);
  EXPECT_NEAR(se_estimate(d, sd), expected, 1e-14);
}

TEST(ConfidenceInterval, UsesTWithNMinusOneDf) {
  const CompositeAssays d = plot({3.2, 3.9, 3.5, 3.7}, 20);
  const EstimateReport r = confidence_interval(d, 0.11, 0.05);
  EXPECT_DOUBLE_EQ(r.df, 19.0);
  EXPECT_NEAR(r.t_quantile, 2.093024, 1e-6);
  EXPECT_NEAR(r.ci_high - r.mu_hat, r.t_quantile * r.se_hat, 1e-14);
  const EstimateReport o = confidence_interval(d, 0.11, 0.05, 3.0);
  EXPECT_NEAR(o.t_quantile, 3.182446, 1e-6);
  EXPECT_THROW(confidence_interval(d, 0.11, 1.5), ValidationError);
  EXPECT_THROW(confidence_interval(d, 0.11, 0.05, 0.0), ValidationError);
}

TEST(ConfidenceInterval, LowerBoundTruncatedAtZero) {
  const EstimateReport r = confidence_interval(plot({0.01, 2.0}, 2), 0.5, 0.05);
  EXPECT_EQ(r.ci_low, 0.0);
}

TEST(Difference, CombinesStandardErrors) {
  const CompositeAssays a = plot({3.2, 3.9, 3.5, 3.7}, 20);
  const CompositeAssays b = plot({2.9, 3.1, 3.3}, 12);
  const DifferenceReport r = difference_estimate(a, b, 0.1, 0.2, 0.05);
  const double s1 = se_estimate(a, 0.1), s2 = se_estimate(b, 0.2);
  EXPECT_NEAR(r.se_hat, std::hypot(s1, s2), 1e-15);
  EXPECT_DOUBLE_EQ(r.df, 12.0);
  EXPECT_NEAR(r.delta_hat, 3.575 - 3.1, 1e-12);
}

TEST(Replicates, PerGroupEstimatorAndMedian) {
  ReplicateAssays reps;
  reps.groups = {{3.0, 3.2, 3.4}, {1.0, 1.1}, {2.0, 2.0}};
  const AssayErrorEstimate e = assay_error_from_replicates(reps);
  ASSERT_EQ(e.groups.size(), 3u);
  // Group 1: mean 3.2, s^2 0.04; denominator 3.2^2 - 0.04/3.
  EXPECT_NEAR(e.groups[0].sigma_delta_sq, 0.04 / (10.24 - 0.04 / 3.0), 1e-15);
  EXPECT_DOUBLE_EQ(e.groups[2].sigma_delta_sq, 0.0);
  const double g2 = 0.005 / (1.05 * 1.05 - 0.005 / 2.0);
  EXPECT_NEAR(e.sigma_delta_sq, std::min(g2, e.groups[0].sigma_delta_sq), 1e-15);
  const AssayErrorEstimate m = assay_error_from_replicates(reps, Aggregation::kMean);
  EXPECT_NEAR(m.sigma_delta_sq, (g2 + e.groups[0].sigma_delta_sq) / 3.0, 1e-15);
}

TEST(Replicates, DenominatorIsMeanPairwiseProduct) {
  // mean^2 - s^2/r reduces to the average of x_i x_j over i != j.
  ReplicateAssays reps;
  reps.sample_ids = {"a"};
  reps.groups = {{0.01, 10.0}};
  const AssayErrorEstimate e = assay_error_from_replicates(reps);
  EXPECT_FALSE(e.groups[0].excluded);
  const double s2 = 9.99 * 9.99 / 2.0;
  EXPECT_NEAR(e.sigma_delta_sq, s2 / (0.01 * 10.0), 1e-9);
  reps.groups = {{1.0}};
  EXPECT_THROW(assay_error_from_replicates(reps), ValidationError);
}

TEST(PredictionError, OriginalAndLogScale) {
  EXPECT_NEAR(prediction_method_error(0.02, 0.31, 3.57), 0.02 + 0.31 / 3.57, 1e-15);
  EXPECT_NEAR(prediction_method_error(0.02, 0.1, 0.0, true), 0.02 + std::expm1(0.1), 1e-15);
  EXPECT_THROW(prediction_method_error(0.02, 0.1, 0.0), ValidationError);
}

TEST(Permutation, MatchesFullEnumeration) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> level(0, 4);  // coarse values force ties
  for (std::size_t n1 = 1; n1 <= 4; ++n1) {
    for (std::size_t n2 = 1; n2 + n1 <= 7; ++n2) {
      std::vector<double> a(n1), b(n2);
      for (double& x : a) x = 2.0 + 0.25 * level(rng);
      for (double& x : b) x = 2.0 + 0.25 * level(rng);
      const PermutationResult r = permutation_test(a, b, 0, 1);
      EXPECT_TRUE(r.exact);
      EXPECT_EQ(r.permutations, binomial_saturating(n1 + n2, n1));
      EXPECT_NEAR(r.p_value, full_permutation_p(a, b), 1e-15) << n1 << "," << n2;
    }
  }
}

TEST(Permutation, MonteCarloIsSeededAndNearExact) {
  std::vector<double> a, b;
  for (int i = 0; i < 15; ++i) a.push_back(3.0 + 0.05 * i);
  for (int i = 0; i < 15; ++i) b.push_back(3.2 + 0.05 * i);
  const PermutationResult r1 = permutation_test(a, b, 20000, 11);
  const PermutationResult r2 = permutation_test(a, b, 20000, 11);
  EXPECT_FALSE(r1.exact);
  EXPECT_EQ(r1.p_value, r2.p_value);
  EXPECT_GT(r1.p_value, 0.0);
  EXPECT_THROW(permutation_test(a, b, 0, 1), ValidationError);
}

TEST(Permutation, IdenticalSamplesGiveOne) {
  const std::vector<double> a{1.0, 1.0}, b{1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(permutation_test(a, b, 0, 1).p_value, 1.0);
}

TEST(Binomial, Saturates) {
  EXPECT_EQ(binomial_saturating(10, 3), 120u);
  EXPECT_EQ(binomial_saturating(3, 5), 0u);
  EXPECT_EQ(binomial_saturating(200, 100), std::numeric_limits<std::uint64_t>::max());
}

}  // namespace
}  // namespace socplan
