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

#include "socplan/design_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace socplan {

namespace {

constexpr double kSnapTol = 1e-9;
// Widest k window scanned by the integer refinement.
constexpr std::int64_t kMaxScan = 2'000'000;

// floor/ceil that treat values within a relative 1e-9 of an integer as that
// integer, so 0.4624 / 0.04624 lands on 10 rather than 11.
double snap(double x) {
  const double r = std::round(x);
  if (std::fabs(x - r) <= kSnapTol * std::max(1.0, std::fabs(x))) return r;
  return x;
}

std::int64_t floor_count(double x) { return static_cast<std::int64_t>(std::floor(snap(x))); }
std::int64_t ceil_count(double x) { return static_cast<std::int64_t>(std::ceil(snap(x))); }

double variance_of(double a, double b, double n, double k) { return a / n + b / k; }

IntegerDesign make_design(double a, double b, const CostModel& costs, const AssayMethod& method,
                          std::int64_t n, std::int64_t k) {
  IntegerDesign d;
  d.n = n;
  d.k = k;
  d.variance = variance_of(a, b, static_cast<double>(n), static_cast<double>(k));
  d.se = std::sqrt(d.variance);
  d.cost = total_cost(costs, method, Design{n, k});
  return d;
}

void validate_inputs(const PlotParameters& plot, const AssayMethod& method,
                     const CostModel& costs) {
  validate_plot(plot);
  validate_method(method);
  validate_costs(costs);
}

// sqrt(a cost_core) + sqrt(b (cost_prep + cost_assay)): numerator of the
// optimal SE.
double se_numerator(const PlotParameters& plot, const AssayMethod& method,
                    const CostModel& costs) {
  return std::sqrt(sampling_term(plot, method) * costs.cost_core) +
         std::sqrt(assay_term(plot, method) * method.cost_per_sample());
}

std::pair<std::int64_t, std::int64_t> scan_window(double k_real, std::int64_t k_max) {
  if (k_max <= kMaxScan) return {1, k_max};
  const auto centre = static_cast<std::int64_t>(std::llround(std::clamp(k_real, 1.0, double(k_max))));
  return {std::max<std::int64_t>(1, centre - kMaxScan / 2),
          std::min<std::int64_t>(k_max, centre + kMaxScan / 2)};
}

}  // namespace

std::string to_string(BoundaryCase b) {
  switch (b) {
    case BoundaryCase::kInterior:
      return "interior";
    case BoundaryCase::kFullComposite:
      return "full_composite";
    case BoundaryCase::kNoComposite:
      return "no_composite";
  }
  return "interior";
}

double sampling_term(const PlotParameters& plot, const AssayMethod& method) {
  return plot.sigma_p * plot.sigma_p * (1.0 + method.sigma_delta * method.sigma_delta);
}

double assay_term(const PlotParameters& plot, const AssayMethod& method) {
  return plot.mu * plot.mu * method.sigma_delta * method.sigma_delta;
}

double estimator_variance(const PlotParameters& plot, const AssayMethod& method,
                          const Design& design) {
  validate_plot(plot);
  validate_method(method);
  validate_design(design);
  return variance_of(sampling_term(plot, method), assay_term(plot, method),
                     static_cast<double>(design.n), static_cast<double>(design.k));
}

double total_cost(const CostModel& costs, const AssayMethod& method, const Design& design) {
  return costs.cost_fixed + static_cast<double>(design.n) * costs.cost_core +
         static_cast<double>(design.k) * method.cost_per_sample();
}

CompositeSize optimal_composite_size(const PlotParameters& plot, const AssayMethod& method,
                                     const CostModel& costs) {
  validate_inputs(plot, method, costs);
  const double a = sampling_term(plot, method);
  const double b = assay_term(plot, method);
  const double cpa = method.cost_per_sample();

  CompositeSize out;
  out.compositing_gain = a * cpa > b * costs.cost_core;
  if (!out.compositing_gain) {
    out.continuous = 1.0;
    out.boundary = BoundaryCase::kNoComposite;
    out.floor_size = out.nearest_size = 1;
    return out;
  }
  if (b == 0.0) {
    out.continuous = std::numeric_limits<double>::infinity();
    out.boundary = BoundaryCase::kFullComposite;
    out.floor_size = out.nearest_size = 0;
    return out;
  }
  out.continuous = std::sqrt(a / b) * std::sqrt(cpa / costs.cost_core);
  out.boundary = BoundaryCase::kInterior;
  out.floor_size = std::max<std::int64_t>(1, floor_count(out.continuous));
  out.nearest_size = std::max<std::int64_t>(1, std::llround(out.continuous));
  return out;
}

OptimalAllocation optimize_for_budget(const PlotParameters& plot, const AssayMethod& method,
                                      const CostModel& costs, const Budget& budget) {
  validate_inputs(plot, method, costs);
  validate_budget(budget, costs);

  const double a = sampling_term(plot, method);
  const double b = assay_term(plot, method);
  const double cc = costs.cost_core;
  const double cpa = method.cost_per_sample();
  const double avail = budget.total - costs.cost_fixed;
  if (snap(avail) < cc + cpa) {
    throw InfeasibleError("budget", "budget cannot afford one core and one assay (needs " +
                                        std::to_string(costs.cost_fixed + cc + cpa) + ")");
  }

  OptimalAllocation out;
  auto full_composite = [&] {
    out.k_real = 1.0;
    out.n_real = (avail - cpa) / cc;
    out.boundary = BoundaryCase::kFullComposite;
  };
  auto no_composite = [&] {
    out.k_real = out.n_real = avail / (cc + cpa);
    out.boundary = BoundaryCase::kNoComposite;
  };

  if (b == 0.0) {
    full_composite();
  } else if (a == 0.0 || cpa == 0.0) {
    no_composite();
  } else {
    const double denom = std::sqrt(a * cc) + std::sqrt(b * cpa);
    out.n_real = avail * std::sqrt(a) / (denom * std::sqrt(cc));
    out.k_real = avail * std::sqrt(b) / (denom * std::sqrt(cpa));
    out.boundary = BoundaryCase::kInterior;
    if (out.k_real < 1.0) {
      full_composite();
    } else if (out.k_real > out.n_real) {
      no_composite();
    }
  }

  // Textbook rounding: both down.
  std::int64_t n_floor = floor_count(out.n_real);
  std::int64_t k_floor = std::max<std::int64_t>(1, floor_count(out.k_real));
  k_floor = std::min(k_floor, n_floor);
  if (n_floor < 1) {
    throw InfeasibleError("budget", "budget yields fewer than one core");
  }
  out.rounded = make_design(a, b, costs, method, n_floor, k_floor);

  // Integer optimum: for each k take the most cores the budget allows.
  const std::int64_t k_max = floor_count(avail / (cc + cpa));
  const auto [k_lo, k_hi] = scan_window(out.k_real, k_max);
  double best_var = std::numeric_limits<double>::infinity();
  std::int64_t best_n = n_floor, best_k = k_floor;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    const std::int64_t n = floor_count((avail - static_cast<double>(k) * cpa) / cc);
    if (n < k) continue;
    const double v = variance_of(a, b, static_cast<double>(n), static_cast<double>(k));
    if (v < best_var) {
      best_var = v;
      best_n = n;
      best_k = k;
    }
  }
  const IntegerDesign best = make_design(a, b, costs, method, best_n, best_k);
  out.n = best.n;
  out.k = best.k;
  out.achieved_variance = best.variance;
  out.achieved_se = best.se;
  out.total_cost = best.cost;
  return out;
}

double optimal_se(const PlotParameters& plot, const AssayMethod& method, const CostModel& costs,
                  const Budget& budget) {
  validate_inputs(plot, method, costs);
  validate_budget(budget, costs);
  return se_numerator(plot, method, costs) / std::sqrt(budget.total - costs.cost_fixed);
}

OptimalAllocation optimize_for_precision(const PlotParameters& plot, const AssayMethod& method,
                                         const CostModel& costs, const PrecisionTarget& target) {
  validate_inputs(plot, method, costs);
  validate_target(target);

  const double a = sampling_term(plot, method);
  const double b = assay_term(plot, method);
  const double cc = costs.cost_core;
  const double cpa = method.cost_per_sample();
  const double v_max = target.max_variance;

  OptimalAllocation out;
  if (b == 0.0) {
    out.k_real = 1.0;
    out.n_real = a / v_max;
    out.boundary = BoundaryCase::kFullComposite;
  } else if (a == 0.0 || cpa == 0.0) {
    out.k_real = out.n_real = (a + b) / v_max;
    out.boundary = BoundaryCase::kNoComposite;
  } else {
    // Lagrange stationarity: n = sqrt(lambda a / cc), k = sqrt(lambda b / cpa).
    const double s = std::sqrt(a * b);
    out.n_real = (a + s * std::sqrt(cpa / cc)) / v_max;
    out.k_real = (b + s * std::sqrt(cc / cpa)) / v_max;
    out.boundary = BoundaryCase::kInterior;
    if (out.k_real < 1.0) {
      // With one assay the assay term is b itself; b < V here.
      out.k_real = 1.0;
      out.n_real = a / (v_max - b);
      out.boundary = BoundaryCase::kFullComposite;
    } else if (out.k_real >= out.n_real) {
      out.k_real = out.n_real = (a + b) / v_max;
      out.boundary = BoundaryCase::kNoComposite;
    }
  }

  // Textbook rounding: both up.
  std::int64_t n_ceil = std::max<std::int64_t>(1, ceil_count(out.n_real));
  std::int64_t k_ceil = std::max<std::int64_t>(1, ceil_count(out.k_real));
  n_ceil = std::max(n_ceil, k_ceil);
  out.rounded = make_design(a, b, costs, method, n_ceil, k_ceil);

  // Integer optimum: for each k take the fewest cores meeting the target.
  const std::int64_t k_max = std::max<std::int64_t>(1, ceil_count((a + b) / v_max));
  const auto [k_lo, k_hi] = scan_window(out.k_real, k_max);
  double best_cost = std::numeric_limits<double>::infinity();
  double best_var = std::numeric_limits<double>::infinity();
  std::int64_t best_n = n_ceil, best_k = k_ceil;
  for (std::int64_t k = k_lo; k <= k_hi; ++k) {
    const double slack = v_max - b / static_cast<double>(k);
    if (slack < 0.0 || (slack == 0.0 && a > 0.0)) continue;
    const std::int64_t needed = a == 0.0 ? 1 : ceil_count(a / slack);
    const std::int64_t n = std::max({needed, k, std::int64_t{1}});
    const double cost = costs.cost_fixed + static_cast<double>(n) * cc + static_cast<double>(k) * cpa;
    const double v = variance_of(a, b, static_cast<double>(n), static_cast<double>(k));
    if (cost < best_cost || (cost == best_cost && v < best_var)) {
      best_cost = cost;
      best_var = v;
      best_n = n;
      best_k = k;
    }
  }
  const IntegerDesign best = make_design(a, b, costs, method, best_n, best_k);
  out.n = best.n;
  out.k = best.k;
  out.achieved_variance = best.variance;
  out.achieved_se = best.se;
  out.total_cost = best.cost;
  return out;
}

double relative_efficiency(const PlotParameters& plot, const AssayMethod& method1,
                           const AssayMethod& method2, const CostModel& costs) {
  validate_plot(plot);
  validate_method(method1, "method1");
  validate_method(method2, "method2");
  validate_costs(costs);
  const double num = se_numerator(plot, method1, costs);
  const double den = se_numerator(plot, method2, costs);
  if (num == den) return 1.0;
  if (den == 0.0) {
    throw ValidationError("method2", "method2 attains zero optimal SE; efficiency undefined");
  }
  return num / den;
}

AssayMethod baseline_method() { return AssayMethod{"no-error baseline", 0.0, 0.0, 0.0}; }

std::vector<CurveSeries> se_budget_curve(const PlotParameters& plot,
                                         std::span<const AssayMethod> methods,
                                         const CostModel& costs, std::span<const double> budgets) {
  validate_plot(plot);
  validate_costs(costs);
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    const std::string field = "budgets[" + std::to_string(i) + "]";
    require_finite(budgets[i], field);
    if (!(budgets[i] > costs.cost_fixed)) {
      throw ValidationError(field, field + " must exceed the fixed cost");
    }
  }

  std::vector<AssayMethod> all(methods.begin(), methods.end());
  all.push_back(baseline_method());

  std::vector<CurveSeries> out;
  out.reserve(all.size());
  for (std::size_t m = 0; m < all.size(); ++m) {
    validate_method(all[m], "methods[" + std::to_string(m) + "]");
    CurveSeries series{all[m].name, {}};
    const double num = se_numerator(plot, all[m], costs);
    for (double budget : budgets) {
      CurvePoint p;
      p.abscissa = budget;
      p.se = num / std::sqrt(budget - costs.cost_fixed);
      p.cv = plot.mu > 0.0 ? p.se / plot.mu : std::numeric_limits<double>::quiet_NaN();
      p.cost = budget;
      series.points.push_back(p);
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::vector<CurvePoint> tradeoff_curve(const PlotParameters& plot, const AssayMethod& method,
                                       const CostModel& costs, std::int64_t n,
                                       std::span<const std::int64_t> k_grid) {
  validate_inputs(plot, method, costs);
  std::vector<CurvePoint> out;
  out.reserve(k_grid.size());
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    const Design design =
        validate_design(Design{n, k_grid[i]}, nullptr, "k_grid[" + std::to_string(i) + "]");
    CurvePoint p;
    p.abscissa = static_cast<double>(design.k);
    p.se = std::sqrt(estimator_variance(plot, method, design));
    p.cv = plot.mu > 0.0 ? p.se / plot.mu : std::numeric_limits<double>::quiet_NaN();
    p.cost = total_cost(costs, method, design);
    out.push_back(p);
  }
  return out;
}

double stock_from_concentration(const StockGeometry& geom, double mu) {
  validate_geometry(geom);
  require_finite(mu, "mu");
  if (mu < 0.0 || mu > kMaxPercent) throw ValidationError("mu", "mu must lie in [0, 100]");
  return 1e4 * geom.depth_m * geom.area_m2 * mu * geom.bulk_density;
}

double expected_shortest_path(std::int64_t n, double area_m2, double beta) {
  if (n < 2) throw ValidationError("n", "path length needs at least 2 cores");
  require_finite(area_m2, "area");
  if (!(area_m2 > 0.0)) throw ValidationError("area", "area must be strictly positive");
  require_finite(beta, "beta");
  if (!(beta > 0.0)) throw ValidationError("beta", "beta must be strictly positive");
  return beta * std::sqrt(static_cast<double>(n) * area_m2);
}

double transect_length(double width_m, double height_m) {
  require_finite(width_m, "width");
  require_finite(height_m, "height");
  if (!(width_m > 0.0) || !(height_m > 0.0)) {
    throw ValidationError("width", "plot sides must be strictly positive");
  }
  return std::hypot(width_m, height_m);
}

std::int64_t snap_to_divisor(std::int64_t n, std::int64_t k) {
  validate_design(Design{n, k});
  std::int64_t best = 1;
  for (std::int64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    for (std::int64_t c : {d, n / d}) {
      const auto dist = std::llabs(c - k);
      const auto best_dist = std::llabs(best - k);
      if (dist < best_dist || (dist == best_dist && c > best)) best = c;
    }
  }
  return best;
}

}  // namespace socplan
