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

#include "socplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

namespace socplan {
namespace {

TEST(Rng, SeedsAreReproducibleAndDistinct) {
  Xoshiro256 a(42), b(42), c(43);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  for (int i = 0; i < 1000; ++i) EXPECT_LT(a.below(7), 7u);
}

TEST(Field, MatchesMomentsExactly) {
  for (Texture t : {Texture::kGaussian, Texture::kUniform, Texture::kTwoPoint}) {
    const PlotField f = generate_plot(3.57, 0.68, 50, 40, 9, SpatialCorrelation::kNone, t);
    EXPECT_EQ(f.texture, t);
    EXPECT_NEAR(f.realized_mean, 3.57, 1e-12);
    EXPECT_NEAR(f.realized_sd, 0.68, 1e-12);
  }
}

TEST(Field, AutoFallsBackWhenGaussianLeavesRange) {
  // mu 0.2 with sigma 0.19: Gaussian tails go negative, two-point fits.
  const PlotField f = generate_plot(0.2, 0.19, 100, 100, 1);
  EXPECT_NE(f.texture, Texture::kGaussian);
  EXPECT_GE(*std::min_element(f.values.begin(), f.values.end()), 0.0);
  EXPECT_THROW(generate_plot(0.2, 0.5, 100, 100, 1), ValidationError);
}

TEST(Field, SmoothGradientSortsAlongTransect) {
  const PlotField f =
      generate_plot(3.57, 0.68, 10, 10, 4, SpatialCorrelation::kSmoothGradient);
  for (std::size_t a = 0; a < f.size(); ++a) {
    for (std::size_t b = 0; b < f.size(); ++b) {
      if (f.transect_rank(a) < f.transect_rank(b)) EXPECT_LE(f.values[a], f.values[b]);
    }
  }
  EXPECT_NEAR(f.realized_sd, 0.68, 1e-12);
}

TEST(Field, GridTooSmall) {
  EXPECT_THROW(generate_plot(1.0, 0.1, 1, 1, 1), ValidationError);
}

TEST(Composite, AveragesGroups) {
  const std::vector<double> cores{1, 2, 3, 4, 5, 6};
  const auto adj = composite(cores, 2, CompositingStrategy::kAdjacent, 1ULL);
  EXPECT_EQ(adj, (std::vector<double>{2.0, 5.0}));
  const auto rnd = composite(cores, 3, CompositingStrategy::kRandom, 5ULL);
  EXPECT_NEAR(std::accumulate(rnd.begin(), rnd.end(), 0.0) / 3.0, 3.5, 1e-12);
  EXPECT_THROW(composite(cores, 4, CompositingStrategy::kRandom, 1ULL), ValidationError);
  EXPECT_THROW(composite(cores, 7, CompositingStrategy::kRandom, 1ULL), ValidationError);
}

TEST(AssayError, MeanOneWithRequestedCv) {
  const std::vector<double> ones(200000, 1.0);
  for (auto dist : {ErrorDistribution::kGamma, ErrorDistribution::kLognormal}) {
    const auto m = apply_assay_error(ones, AssayErrorModel{dist, 0.3}, 8ULL);
    const double mean = std::accumulate(m.begin(), m.end(), 0.0) / m.size();
    double ss = 0.0;
    for (double v : m) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 1.0, 0.003);
    EXPECT_NEAR(std::sqrt(ss / (m.size() - 1)), 0.3, 0.004);
    EXPECT_GT(*std::min_element(m.begin(), m.end()), 0.0);
  }
  const auto exact = apply_assay_error(ones, AssayErrorModel{ErrorDistribution::kGamma, 0.0}, 1ULL);
  EXPECT_EQ(exact, ones);
}

TEST(Replicates, ShapeAndValidation) {
  const std::vector<double> truth{3.0, 2.0};
  const ReplicateAssays r = simulate_replicates(truth, 4, AssayErrorModel{}, 1);
  ASSERT_EQ(r.groups.size(), 2u);
  EXPECT_EQ(r.groups[1].size(), 4u);
  EXPECT_THROW(simulate_replicates(truth, 1, AssayErrorModel{}, 1), ValidationError);
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.plot = PlotParameters{3.57, 0.68, ""};
  c.grid_rows = 30;
  c.grid_cols = 30;
  c.design = Design{24, 6};
  c.error = AssayErrorModel{ErrorDistribution::kGamma, 0.11};
  c.reps = 3000;
  c.seed = 17;
  return c;
}

TEST(Experiment, IdenticalAcrossThreadCounts) {
  ExperimentConfig c = small_config();
  c.threads = 1;
  const SimulationResult one = run_survey_experiment(c);
  c.threads = 4;
  const SimulationResult four = run_survey_experiment(c);
  EXPECT_EQ(one.mean_mu_hat, four.mean_mu_hat);
  EXPECT_EQ(one.var_mu_hat, four.var_mu_hat);
  EXPECT_EQ(*one.ci_coverage, *four.ci_coverage);
}

TEST(Experiment, ClaimsHold) {
  const SimulationResult r = run_survey_experiment(small_config());
  ASSERT_EQ(r.claims.size(), 3u);
  for (const Claim& c : r.claims) EXPECT_TRUE(c.pass) << c.name << " " << c.observed;
  EXPECT_GT(*r.ci_coverage, 0.9);
}

TEST(Experiment, SingleCompositeHasNoPlotVariance) {
  ExperimentConfig c = small_config();
  c.design = Design{24, 1};
  const SimulationResult r = run_survey_experiment(c);
  EXPECT_FALSE(r.mean_sigma_p_sq_hat.has_value());
  EXPECT_EQ(r.claims.size(), 2u);
}

TEST(Experiment, RejectsNonDivisibleAndExpiredDeadline) {
  ExperimentConfig c = small_config();
  c.design = Design{25, 6};
  EXPECT_THROW(run_survey_experiment(c), ValidationError);
  c = small_config();
  c.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  EXPECT_THROW(run_survey_experiment(c), LimitExceededError);
}

TEST(Threads, EnvironmentCap) {
  setenv("SOC_PLANNER_THREADS", "2", 1);
  EXPECT_EQ(resolve_threads(8), 2u);
  unsetenv("SOC_PLANNER_THREADS");
  EXPECT_EQ(resolve_threads(3), 3u);
}

}  // namespace
}  // namespace socplan
