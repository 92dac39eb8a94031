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

// Estimators computed from assay data: plot mean and heterogeneity from
// composites, assay error from replicates or calibration RMSE, standard
// errors, t intervals, two-plot differences and permutation tests.

#ifndef SOCPLAN_ESTIMATION_HPP_
#define SOCPLAN_ESTIMATION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace socplan {

struct CompositeAssays {
  std::string plot_id;
  std::vector<double> values;  // S_i*, %SOC
  std::int64_t n = 0;          // cores composited in total

  std::int64_t k() const { return static_cast<std::int64_t>(values.size()); }
};

struct ReplicateAssays {
  std::vector<std::string> sample_ids;  // parallel to groups; may be empty
  std::vector<std::vector<double>> groups;
};

enum class Aggregation { kMedian, kMean };

struct ReplicateGroupDiagnostic {
  std::string sample_id;
  double mean = 0.0;
  double sample_variance = 0.0;
  double sigma_delta_sq = 0.0;  // NaN when excluded
  bool excluded = false;
};

struct AssayErrorEstimate {
  double sigma_delta = 0.0;
  double sigma_delta_sq = 0.0;
  std::size_t groups_used = 0;
  std::vector<ReplicateGroupDiagnostic> groups;
  std::vector<std::string> warnings;
};

struct EstimateReport {
  std::string plot_id;
  std::int64_t n = 0;
  std::int64_t k = 0;
  double mu_hat = 0.0;
  double sigma_p_hat = 0.0;
  double sigma_delta_hat = 0.0;
  double se_hat = 0.0;
  double df = 0.0;
  double t_quantile = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
};

struct DifferenceReport {
  double delta_hat = 0.0;
  double se_hat = 0.0;
  double df = 0.0;
  double t_quantile = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
  std::optional<double> p_value;
  bool p_value_exact = false;
  std::uint64_t permutations = 0;
};

// Throws ValidationError unless k >= 1, n >= k and values are finite and
// nonnegative.
void validate_composites(const CompositeAssays& data, const std::string& path = "composites");

double mean_estimate(const CompositeAssays& data);

// (n/k) times the sample variance (divisor k-1) of the composites.
double plot_variance_estimate(const CompositeAssays& data);

AssayErrorEstimate assay_error_from_replicates(const ReplicateAssays& data,
                                               Aggregation aggregation = Aggregation::kMedian);

// sigma_delta of a method calibrated to a reference assay. On the original
// scale adds rmse_v / mu_hat; on the log scale adds exp(rmse_v) - 1.
double prediction_method_error(double base_sigma_delta, double rmse_v, double mu_hat,
                               bool log_scale = false);

double se_estimate(const CompositeAssays& data, double sigma_delta_hat);

double t_quantile(double probability, double df);

/// t interval around mu_hat with df = n - 1 unless `df_override` is given.
/// The lower limit is truncated at 0.
EstimateReport confidence_interval(const CompositeAssays& data, double sigma_delta_hat,
                                   double alpha, std::optional<double> df_override = {});

/// Difference mu_hat1 - mu_hat2 with df = min(n1, n2) unless overridden.
DifferenceReport difference_estimate(const CompositeAssays& data1, const CompositeAssays& data2,
                                     double sigma_delta1, double sigma_delta2, double alpha,
                                     std::optional<double> df_override = {});

inline constexpr std::uint64_t kExactPermutationLimit = 20'000;

struct PermutationResult {
  double p_value = 1.0;
  bool exact = false;
  std::uint64_t permutations = 0;  // splits enumerated or resamples drawn
};

// Two-sided test of equal means using |mean1 - mean2|. Enumerates every
// split when C(n1 + n2, n1) <= kExactPermutationLimit, else draws
// `num_permutations` random splits with p = (hits + 1) / (B + 1).
PermutationResult permutation_test(std::span<const double> values1,
                                   std::span<const double> values2,
                                   std::uint64_t num_permutations, std::uint64_t seed);

// C(n, k) saturating at UINT64_MAX.
std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k);

}  // namespace socplan

#endif  // SOCPLAN_ESTIMATION_HPP_
