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

#include "socplan/domain.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace socplan {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void require_range(double value, double lo, double hi, const std::string& field) {
  require_finite(value, field);
  if (value < lo) {
    throw ValidationError(field, field + " is below " + fmt_num(lo) + " (got " +
                                     fmt_num(value) + ")");
  }
  if (value > hi) {
    throw ValidationError(field, field + " exceeds " + fmt_num(hi) + " (got " +
                                     fmt_num(value) + ")");
  }
}

void require_nonnegative(double value, const std::string& field) {
  require_range(value, 0.0, std::numeric_limits<double>::max(), field);
}

void require_positive(double value, const std::string& field) {
  require_finite(value, field);
  if (!(value > 0.0)) {
    throw ValidationError(field, field + " must be strictly positive (got " + fmt_num(value) + ")");
  }
}

}  // namespace

void require_finite(double value, const std::string& field) {
  if (!std::isfinite(value)) {
    throw ValidationError(field, field + " must be a finite number");
  }
}

std::int64_t require_count(double value, const std::string& field) {
  require_finite(value, field);
  if (value != std::floor(value) || std::fabs(value) > 9.0e15) {
    throw ValidationError(field, field + " must be an integer (got " + fmt_num(value) + ")");
  }
  return static_cast<std::int64_t>(value);
}

std::int64_t Design::composite_numerator() const {
  return n / std::gcd(n, k);
}

std::int64_t Design::composite_denominator() const {
  return k / std::gcd(n, k);
}

PlotParameters validate_plot(const PlotParameters& plot, const std::string& path) {
  require_range(plot.mu, 0.0, kMaxPercent, path + ".mu");
  require_range(plot.sigma_p, 0.0, kMaxSigmaP, path + ".sigma_p");
  return plot;
}

AssayMethod validate_method(const AssayMethod& method, const std::string& path) {
  require_nonnegative(method.sigma_delta, path + ".sigma_delta");
  require_nonnegative(method.cost_prep, path + ".cost_prep");
  require_nonnegative(method.cost_assay, path + ".cost_assay");
  return method;
}

CostModel validate_costs(const CostModel& costs, const std::string& path) {
  require_nonnegative(costs.cost_fixed, path + ".cost_fixed");
  require_positive(costs.cost_core, path + ".cost_core");
  return costs;
}

StockGeometry validate_geometry(const StockGeometry& geom, const std::string& path) {
  require_positive(geom.depth_m, path + ".depth_m");
  require_positive(geom.area_m2, path + ".area_m2");
  require_positive(geom.bulk_density, path + ".bulk_density");
  return geom;
}

Budget validate_budget(const Budget& budget, const CostModel& costs, const std::string& path) {
  require_positive(budget.total, path);
  if (!(budget.total > costs.cost_fixed)) {
    throw InfeasibleError(path, "budget " + fmt_num(budget.total) +
                                    " does not exceed the fixed cost " +
                                    fmt_num(costs.cost_fixed));
  }
  return budget;
}

PrecisionTarget validate_target(const PrecisionTarget& target, const std::string& path) {
  require_positive(target.max_variance, path + ".max_variance");
  return target;
}

Design validate_design(const Design& design, std::vector<std::string>* warnings,
                       const std::string& path) {
  if (design.k < 1) {
    throw ValidationError(path + ".k", "k must be at least 1");
  }
  if (design.n < 1) {
    throw ValidationError(path + ".n", "n must be at least 1");
  }
  if (design.k > design.n) {
    throw ValidationError(path + ".k", "k exceeds n (k=" + std::to_string(design.k) +
                                           ", n=" + std::to_string(design.n) + ")");
  }
  if (warnings != nullptr && !design.divisible()) {
    warnings->push_back("n=" + std::to_string(design.n) + " is not divisible by k=" +
                        std::to_string(design.k) + "; composite size " +
                        std::to_string(design.composite_numerator()) + "/" +
                        std::to_string(design.composite_denominator()));
  }
  return design;
}

}  // namespace socplan
