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

// Shared domain types for soil organic carbon survey design.
//
// Units: concentrations are %SOC everywhere (g/kg inputs are divided by 10 at
// ingestion). Currency is a unitless nonnegative decimal. All types are plain
// immutable values once validated.

#ifndef SOCPLAN_DOMAIN_HPP_
#define SOCPLAN_DOMAIN_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace socplan {

// Input violates a documented range or structural invariant. `field` is a
// dotted path to the offending value (e.g. "plot.sigma_p").
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Input is well-formed but the optimization problem has no solution.
// `constraint` names the binding constraint ("budget", "target", ...).
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string constraint, const std::string& message)
      : std::runtime_error(message), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

// A bounded computation exceeded its replication or wall-clock cap.
class LimitExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlotParameters {
  double mu = 0.0;       // %SOC
  double sigma_p = 0.0;  // %SOC
  std::string label;
};

struct AssayMethod {
  std::string name;
  double sigma_delta = 0.0;
  double cost_prep = 0.0;
  double cost_assay = 0.0;

  double cost_per_sample() const { return cost_prep + cost_assay; }
};

struct CostModel {
  double cost_fixed = 0.0;
  double cost_core = 1.0;
};

struct Design {
  std::int64_t n = 1;
  std::int64_t k = 1;

  // Composite size n/k as a reduced fraction.
  std::int64_t composite_numerator() const;
  std::int64_t composite_denominator() const;
  double composite_size() const { return static_cast<double>(n) / static_cast<double>(k); }
  bool divisible() const { return k > 0 && n % k == 0; }
};

struct Budget {
  double total = 0.0;
};

struct PrecisionTarget {
  double max_variance = 0.0;  // (%SOC)^2

  static PrecisionTarget from_se(double max_se) { return {max_se * max_se}; }
};

struct StockGeometry {
  double depth_m = 0.0;
  double area_m2 = 0.0;
  double bulk_density = 0.0;  // g/cm^3
};

inline constexpr double kMaxPercent = 100.0;
// Largest possible plot SD: half the plot at 0 %, half at 100 %.
inline constexpr double kMaxSigmaP = 50.0;

// Throws ValidationError naming `field` unless `value` is finite.
void require_finite(double value, const std::string& field);

PlotParameters validate_plot(const PlotParameters& plot, const std::string& path = "plot");
AssayMethod validate_method(const AssayMethod& method, const std::string& path = "method");
CostModel validate_costs(const CostModel& costs, const std::string& path = "costs");
StockGeometry validate_geometry(const StockGeometry& geom, const std::string& path = "geometry");
Budget validate_budget(const Budget& budget, const CostModel& costs,
                       const std::string& path = "budget");
PrecisionTarget validate_target(const PrecisionTarget& target,
                                const std::string& path = "target");

// Accepts 1 <= k <= n. Non-divisible n/k is reported through `warnings`
// rather than rejected.
Design validate_design(const Design& design, std::vector<std::string>* warnings = nullptr,
                       const std::string& path = "design");

// Integer-valued double check used when designs arrive as JSON numbers.
std::int64_t require_count(double value, const std::string& field);

}  // namespace socplan

#endif  // SOCPLAN_DOMAIN_HPP_
