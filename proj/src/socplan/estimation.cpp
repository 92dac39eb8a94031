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
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "socplan/domain.hpp"

namespace socplan {

namespace {

double sample_mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Divisor size - 1.
double sample_variance(std::span<const double> v) {
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void require_estimable(const CompositeAssays& data) {
  validate_composites(data);
  if (data.k() < 2) {
    throw ValidationError("composites.values",
                          "plot heterogeneity not estimable; at least 2 assays required");
  }
}

void require_sigma_delta(double sd, const std::string& field) {
  require_finite(sd, field);
  if (sd < 0.0) throw ValidationError(field, field + " must be nonnegative");
}

void require_alpha(double alpha) {
  require_finite(alpha, "alpha");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha", "alpha must lie in (0, 1)");
}

double resolve_df(std::optional<double> df_override, double fallback) {
  if (!df_override) return fallback;
  require_finite(*df_override, "df");
  if (!(*df_override > 0.0)) throw ValidationError("df", "df must be strictly positive");
  return *df_override;
}

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

void validate_composites(const CompositeAssays& data, const std::string& path) {
  if (data.values.empty()) throw ValidationError(path + ".values", "no composite assays");
  if (data.n < data.k()) {
    throw ValidationError(path + ".n", "n (" + std::to_string(data.n) +
                                           ") is smaller than the number of assays k (" +
                                           std::to_string(data.k()) + ")");
  }
  for (std::size_t i = 0; i < data.values.size(); ++i) {
    const std::string field = path + ".values[" + std::to_string(i) + "]";
    require_finite(data.values[i], field);
    if (data.values[i] < 0.0) throw ValidationError(field, field + " is negative");
  }
}

double mean_estimate(const CompositeAssays& data) {
  validate_composites(data);
  return sample_mean(data.values);
}

double plot_variance_estimate(const CompositeAssays& data) {
  require_estimable(data);
  return static_cast<double>(data.n) / static_cast<double>(data.k()) *
         sample_variance(data.values);
}

AssayErrorEstimate assay_error_from_replicates(const ReplicateAssays& data,
                                               Aggregation aggregation) {
  if (data.groups.empty()) throw ValidationError("replicates", "no replicate groups");
  AssayErrorEstimate out;
  std::vector<double> usable;
  for (std::size_t g = 0; g < data.groups.size(); ++g) {
    const auto& group = data.groups[g];
    const std::string field = "replicates[" + std::to_string(g) + "]";
    if (group.size() < 2) {
      throw ValidationError(field, field + " has fewer than 2 replicates");
    }
    for (double x : group) {
      require_finite(x, field);
      if (!(x > 0.0)) throw ValidationError(field, field + " contains a nonpositive measurement");
    }
    ReplicateGroupDiagnostic diag;
    diag.sample_id = g < data.sample_ids.size() ? data.sample_ids[g] : std::to_string(g + 1);
    diag.mean = sample_mean(group);
    diag.sample_variance = sample_variance(group);
    const double r = static_cast<double>(group.size());
    const double denom = diag.mean * diag.mean - diag.sample_variance / r;
    if (denom > 0.0) {
      diag.sigma_delta_sq = diag.sample_variance / denom;
      usable.push_back(diag.sigma_delta_sq);
    } else {
      diag.sigma_delta_sq = std::numeric_limits<double>::quiet_NaN();
      diag.excluded = true;
      out.warnings.push_back("sample " + diag.sample_id +
                             ": nonpositive denominator, group excluded");
    }
    out.groups.push_back(std::move(diag));
  }
  if (usable.empty()) {
    throw ValidationError("replicates", "no replicate group has a positive denominator");
  }
  out.groups_used = usable.size();
  out.sigma_delta_sq = aggregation == Aggregation::kMedian ? median(usable) : sample_mean(usable);
  out.sigma_delta = std::sqrt(out.sigma_delta_sq);
  return out;
}

double prediction_method_error(double base_sigma_delta, double rmse_v, double mu_hat,
                               bool log_scale) {
  require_sigma_delta(base_sigma_delta, "base_sigma_delta");
  require_finite(rmse_v, "rmse_v");
  if (rmse_v < 0.0) throw ValidationError("rmse_v", "rmse_v must be nonnegative");
  if (log_scale) return base_sigma_delta + std::expm1(rmse_v);
  require_finite(mu_hat, "mu_hat");
  if (!(mu_hat > 0.0)) {
    throw ValidationError("mu_hat", "mu_hat must be positive on the original scale");
  }
  return base_sigma_delta + rmse_v / mu_hat;
}

double se_estimate(const CompositeAssays& data, double sigma_delta_hat) {
  require_estimable(data);
  require_sigma_delta(sigma_delta_hat, "sigma_delta");
  const double mu = sample_mean(data.values);
  const double sp2 = plot_variance_estimate(data);
  const double sd2 = sigma_delta_hat * sigma_delta_hat;
  return std::sqrt(sp2 * (1.0 + sd2) / static_cast<double>(data.n) +
                   mu * mu * sd2 / static_cast<double>(data.k()));
}

double t_quantile(double probability, double df) {
  boost::math::students_t dist(df);
  return boost::math::quantile(dist, probability);
}

EstimateReport confidence_interval(const CompositeAssays& data, double sigma_delta_hat,
                                   double alpha, std::optional<double> df_override) {
  require_alpha(alpha);
  EstimateReport r;
  r.plot_id = data.plot_id;
  r.se_hat = se_estimate(data, sigma_delta_hat);
  r.n = data.n;
  r.k = data.k();
  r.mu_hat = sample_mean(data.values);
  r.sigma_p_hat = std::sqrt(plot_variance_estimate(data));
  r.sigma_delta_hat = sigma_delta_hat;
  r.alpha = alpha;
  r.df = resolve_df(df_override, static_cast<double>(data.n - 1));
  r.t_quantile = t_quantile(1.0 - alpha / 2.0, r.df);
  r.ci_low = std::max(0.0, r.mu_hat - r.t_quantile * r.se_hat);
  r.ci_high = r.mu_hat + r.t_quantile * r.se_hat;
  return r;
}

DifferenceReport difference_estimate(const CompositeAssays& data1, const CompositeAssays& data2,
                                     double sigma_delta1, double sigma_delta2, double alpha,
                                     std::optional<double> df_override) {
  require_alpha(alpha);
  const double se1 = se_estimate(data1, sigma_delta1);
  const double se2 = se_estimate(data2, sigma_delta2);
  DifferenceReport r;
  r.delta_hat = sample_mean(data1.values) - sample_mean(data2.values);
  r.se_hat = std::sqrt(se1 * se1 + se2 * se2);
  r.alpha = alpha;
  r.df = resolve_df(df_override, static_cast<double>(std::min(data1.n, data2.n)));
  r.t_quantile = t_quantile(1.0 - alpha / 2.0, r.df);
  r.ci_low = r.delta_hat - r.t_quantile * r.se_hat;
  r.ci_high = r.delta_hat + r.t_quantile * r.se_hat;
  return r;
}

std::uint64_t binomial_saturating(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(acc);
}

PermutationResult permutation_test(std::span<const double> values1,
                                   std::span<const double> values2,
                                   std::uint64_t num_permutations, std::uint64_t seed) {
  if (values1.empty()) throw ValidationError("data1", "first sample is empty");
  if (values2.empty()) throw ValidationError("data2", "second sample is empty");

  std::vector<double> pooled(values1.begin(), values1.end());
  pooled.insert(pooled.end(), values2.begin(), values2.end());
  double scale = 1.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    require_finite(pooled[i], "values[" + std::to_string(i) + "]");
    scale = std::max(scale, std::fabs(pooled[i]));
  }
  const std::size_t n1 = values1.size();
  const std::size_t total = pooled.size();
  const double n1d = static_cast<double>(n1);
  const double n2d = static_cast<double>(total - n1);
  const double grand = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  auto statistic = [&](double sum1) { return std::fabs(sum1 / n1d - (grand - sum1) / n2d); };

  const double observed =
      statistic(std::accumulate(values1.begin(), values1.end(), 0.0));
  // Splits whose statistic ties the observed one up to rounding count as hits.
  const double threshold = observed - 1e-10 * scale;

  PermutationResult out;
  const std::uint64_t splits = binomial_saturating(total, n1);
  if (splits <= kExactPermutationLimit) {
    std::vector<std::size_t> idx(n1);
    std::iota(idx.begin(), idx.end(), 0);
    std::uint64_t hits = 0;
    while (true) {
      double sum1 = 0.0;
      for (std::size_t i : idx) sum1 += pooled[i];
      if (statistic(sum1) >= threshold) ++hits;
      // Next combination in lexicographic order.
      std::size_t pos = n1;
      while (pos > 0 && idx[pos - 1] == total - n1 + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < n1; ++j) idx[j] = idx[j - 1] + 1;
    }
    out.exact = true;
    out.permutations = splits;
    out.p_value = static_cast<double>(hits) / static_cast<double>(splits);
    return out;
  }

  if (num_permutations == 0) {
    throw ValidationError("permutations", "permutations must be positive for Monte Carlo testing");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> work = pooled;
  std::uint64_t hits = 0;
  for (std::uint64_t b = 0; b < num_permutations; ++b) {
    double sum1 = 0.0;
    // Partial Fisher-Yates: the first n1 slots form the resampled group.
    for (std::size_t i = 0; i < n1; ++i) {
      const std::size_t j = i + bounded(rng, total - i);
      std::swap(work[i], work[j]);
      sum1 += work[i];
    }
    if (statistic(sum1) >= threshold) ++hits;
  }
  out.exact = false;
  out.permutations = num_permutations;
  out.p_value = static_cast<double>(hits + 1) / static_cast<double>(num_permutations + 1);
  return out;
}

}  // namespace socplan
