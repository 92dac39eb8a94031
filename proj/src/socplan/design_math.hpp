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

// Closed-form survey design results for the composite-sampling estimator
//
//   mu_hat = mean of k assayed composites built from n UIRS cores,
//   V(mu_hat) = sigma_p^2 (1 + sigma_delta^2) / n + mu^2 sigma_delta^2 / k,
//
// under the linear cost model cost_fixed + n cost_core + k (cost_prep + cost_assay).
//
// Throughout, a = sigma_p^2 (1 + sigma_delta^2) is the sampling term and
// b = mu^2 sigma_delta^2 the assay term of the variance.

#ifndef SOCPLAN_DESIGN_MATH_HPP_
#define SOCPLAN_DESIGN_MATH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "socplan/domain.hpp"

namespace socplan {

enum class BoundaryCase { kInterior, kFullComposite, kNoComposite };

std::string to_string(BoundaryCase b);

struct IntegerDesign {
  std::int64_t n = 0;
  std::int64_t k = 0;
  double variance = 0.0;
  double se = 0.0;
  double cost = 0.0;
};

struct OptimalAllocation {
  // Continuous relaxation after the boundary rules.
  double n_real = 0.0;
  double k_real = 0.0;
  BoundaryCase boundary = BoundaryCase::kInterior;

  // Best integer design for the problem (exhaustive along k).
  std::int64_t n = 0;
  std::int64_t k = 0;
  double achieved_variance = 0.0;
  double achieved_se = 0.0;
  double total_cost = 0.0;

  // Relaxation rounded the textbook way: down under a budget, up under a
  // precision target.
  IntegerDesign rounded;
};

struct CompositeSize {
  double continuous = 1.0;  // +inf when full compositing is optimal
  BoundaryCase boundary = BoundaryCase::kInterior;
  bool compositing_gain = false;
  std::int64_t floor_size = 1;    // 0 when continuous is infinite
  std::int64_t nearest_size = 1;  // 0 when continuous is infinite
};

struct CurvePoint {
  double abscissa = 0.0;
  double se = 0.0;
  double cv = 0.0;  // NaN when mu == 0
  double cost = 0.0;
};

struct CurveSeries {
  std::string name;
  std::vector<CurvePoint> points;
};

double sampling_term(const PlotParameters& plot, const AssayMethod& method);
double assay_term(const PlotParameters& plot, const AssayMethod& method);

double estimator_variance(const PlotParameters& plot, const AssayMethod& method,
                          const Design& design);
double total_cost(const CostModel& costs, const AssayMethod& method, const Design& design);

CompositeSize optimal_composite_size(const PlotParameters& plot, const AssayMethod& method,
                                     const CostModel& costs);

/// Minimum-variance allocation of cores and assays under a fixed budget.
/// Throws InfeasibleError("budget") when one core plus one assay is
/// unaffordable.
OptimalAllocation optimize_for_budget(const PlotParameters& plot, const AssayMethod& method,
                                      const CostModel& costs, const Budget& budget);

/// Continuous-relaxation optimal SE at budget B (interior solution).
double optimal_se(const PlotParameters& plot, const AssayMethod& method, const CostModel& costs,
                  const Budget& budget);

/// Minimum-cost allocation meeting a variance ceiling. The reported
/// total_cost is the minimized budget.
OptimalAllocation optimize_for_precision(const PlotParameters& plot, const AssayMethod& method,
                                         const CostModel& costs, const PrecisionTarget& target);

/// SE_opt(method1) / SE_opt(method2); budget independent.
double relative_efficiency(const PlotParameters& plot, const AssayMethod& method1,
                           const AssayMethod& method2, const CostModel& costs);

// The "no assay error, free assay" lower-bound method.
AssayMethod baseline_method();

std::vector<CurveSeries> se_budget_curve(const PlotParameters& plot,
                                         std::span<const AssayMethod> methods,
                                         const CostModel& costs, std::span<const double> budgets);

std::vector<CurvePoint> tradeoff_curve(const PlotParameters& plot, const AssayMethod& method,
                                       const CostModel& costs, std::int64_t n,
                                       std::span<const std::int64_t> k_grid);

// Grams of SOC: 1e4 * depth * area * mu * bulk_density.
double stock_from_concentration(const StockGeometry& geom, double mu);

inline constexpr double kBetaRounded = 0.72;
inline constexpr double kBetaBhh = 0.714;

// beta * sqrt(n * area): asymptotic shortest path through n UIRS points.
double expected_shortest_path(std::int64_t n, double area_m2, double beta = kBetaRounded);

// Diagonal of an a x b plot; upper bound for a straight transect.
double transect_length(double width_m, double height_m);

// Divisor of n nearest to k (ties go to the larger divisor).
std::int64_t snap_to_divisor(std::int64_t n, std::int64_t k);

}  // namespace socplan

#endif  // SOCPLAN_DESIGN_MATH_HPP_
