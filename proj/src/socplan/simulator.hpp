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

// Design-based Monte Carlo engine. A synthetic plot is a fixed grid of point
// concentrations with exactly the requested mean and SD; surveys draw cores
// uniformly and independently (with replacement) from the grid, composite
// them, multiply each composite by a mean-one assay error and estimate.
//
// Every replication owns a generator seeded from (master seed, replication
// index), and results are reduced in replication order, so output is
// bit-identical for any thread count.

#ifndef SOCPLAN_SIMULATOR_HPP_
#define SOCPLAN_SIMULATOR_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socplan/domain.hpp"
#include "socplan/estimation.hpp"

namespace socplan {

// xoshiro256** (Blackman & Vigna), seeded through splitmix64.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::array<std::uint64_t, 4> s_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Seed for stream `index` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

enum class SpatialCorrelation { kNone, kSmoothGradient };
enum class Texture { kAuto, kGaussian, kUniform, kTwoPoint };
enum class CompositingStrategy { kRandom, kAdjacent };
enum class ErrorDistribution { kGamma, kLognormal };

std::string to_string(SpatialCorrelation v);
std::string to_string(Texture v);
std::string to_string(CompositingStrategy v);
std::string to_string(ErrorDistribution v);

struct PlotField {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> values;  // row-major, cell (r, c) at r * cols + c
  double realized_mean = 0.0;
  double realized_sd = 0.0;  // population SD (divisor rows * cols)
  Texture texture = Texture::kAuto;
  SpatialCorrelation correlation = SpatialCorrelation::kNone;

  std::size_t size() const { return values.size(); }
  // Position along the west-to-east transect; adjacent compositing follows it.
  std::size_t transect_rank(std::size_t cell) const;
};

/// Builds a field with mean `mu` and population SD `sigma_p` to 1e-9.
/// Infeasible pairs (values forced outside [0, 100]) are rejected, never
/// clipped. kSmoothGradient sorts the values west to east.
PlotField generate_plot(double mu, double sigma_p, std::int64_t rows, std::int64_t cols,
                        std::uint64_t texture_seed,
                        SpatialCorrelation correlation = SpatialCorrelation::kNone,
                        Texture texture = Texture::kAuto);

struct Core {
  std::size_t cell = 0;
  double value = 0.0;
};

std::vector<Core> draw_uirs_cores(const PlotField& field, std::int64_t n, Xoshiro256& rng);
std::vector<double> draw_uirs(const PlotField& field, std::int64_t n, std::uint64_t seed);

// Group means of k equal groups. kRandom permutes indices first; kAdjacent
// groups consecutive cores.
std::vector<double> composite(std::span<const double> cores, std::int64_t k,
                              CompositingStrategy strategy, Xoshiro256& rng);
std::vector<double> composite(std::span<const double> cores, std::int64_t k,
                              CompositingStrategy strategy, std::uint64_t seed);

struct AssayErrorModel {
  ErrorDistribution distribution = ErrorDistribution::kGamma;
  double sigma_delta = 0.0;
};

// Mean-one multiplicative error with SD sigma_delta. Gamma uses shape
// 1/sigma^2 and scale sigma^2; lognormal matches the same two moments.
std::vector<double> apply_assay_error(std::span<const double> samples,
                                      const AssayErrorModel& model, Xoshiro256& rng);
std::vector<double> apply_assay_error(std::span<const double> samples,
                                      const AssayErrorModel& model, std::uint64_t seed);

// r replicate assays of every true value.
ReplicateAssays simulate_replicates(std::span<const double> true_values, std::int64_t r,
                                    const AssayErrorModel& model, std::uint64_t seed);

struct ExperimentConfig {
  PlotParameters plot;
  std::int64_t grid_rows = 100;
  std::int64_t grid_cols = 100;
  std::uint64_t texture_seed = 1;
  Texture texture = Texture::kAuto;
  SpatialCorrelation correlation = SpatialCorrelation::kNone;
  Design design;
  AssayErrorModel error;
  CompositingStrategy compositing = CompositingStrategy::kRandom;
  std::int64_t reps = 10'000;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  unsigned threads = 0;  // 0: hardware concurrency capped by SOC_PLANNER_THREADS
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct Claim {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double mc_se = 0.0;
  bool pass = false;  // |observed - expected| <= 3 mc_se
};

struct SimulationResult {
  std::int64_t reps = 0;
  std::int64_t n = 0;
  std::int64_t k = 0;
  double sigma_delta = 0.0;
  ErrorDistribution distribution = ErrorDistribution::kGamma;
  CompositingStrategy compositing = CompositingStrategy::kRandom;
  Texture texture = Texture::kAuto;
  double mu = 0.0;
  double sigma_p = 0.0;
  double theoretical_variance = 0.0;

  double mean_mu_hat = 0.0;
  double mc_se_mean = 0.0;
  double var_mu_hat = 0.0;
  double mc_se_var = 0.0;

  // Present when k >= 2.
  std::optional<double> mean_sigma_p_sq_hat;
  std::optional<double> mc_se_sigma_p_sq;
  std::optional<double> expected_sigma_p_sq_hat;
  std::optional<double> ci_coverage;

  std::vector<Claim> claims;
};

inline constexpr double kClaimSigmas = 3.0;

unsigned resolve_threads(unsigned requested);

/// Runs `reps` independent surveys. Requires n divisible by k. Throws
/// LimitExceededError when the deadline passes.
SimulationResult run_survey_experiment(const ExperimentConfig& config);

}  // namespace socplan

#endif  // SOCPLAN_SIMULATOR_HPP_
