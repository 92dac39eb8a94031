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
#include <limits>

#include <gtest/gtest.h>

namespace socplan {
namespace {

std::string field_of(auto&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.field();
  } catch (const InfeasibleError& e) {
    return "infeasible:" + e.constraint();
  }
  return "";
}

TEST(Validate, PlotRanges) {
  EXPECT_NO_THROW(validate_plot(PlotParameters{3.57, 0.68, ""}));
  EXPECT_EQ(field_of([] { validate_plot(PlotParameters{-1.0, 0.1, ""}); }), "plot.mu");
  EXPECT_EQ(field_of([] { validate_plot(PlotParameters{101.0, 0.1, ""}); }), "plot.mu");
  EXPECT_EQ(field_of([] { validate_plot(PlotParameters{1.0, std::nan(""), ""}); }),
            "plot.sigma_p");
  EXPECT_EQ(field_of([] {
              validate_plot(PlotParameters{1.0, std::numeric_limits<double>::infinity(), ""});
            }),
            "plot.sigma_p");
}

TEST(Validate, MethodAndCosts) {
  EXPECT_EQ(field_of([] { validate_method(AssayMethod{"m", -0.1, 1, 1}, "methods[2]"); }),
            "methods[2].sigma_delta");
  EXPECT_EQ(field_of([] { validate_costs(CostModel{0.0, 0.0}); }), "costs.cost_core");
  EXPECT_EQ(field_of([] { validate_costs(CostModel{-1.0, 5.0}); }), "costs.cost_fixed");
  EXPECT_NO_THROW(validate_method(AssayMethod{"free", 0.0, 0.0, 0.0}));
}

TEST(Validate, BudgetMustExceedFixedCost) {
  const CostModel c{200.0, 5.0};
  EXPECT_EQ(field_of([&] { validate_budget(Budget{200.0}, c); }), "infeasible:budget");
  EXPECT_EQ(field_of([&] { validate_budget(Budget{-5.0}, c); }), "budget");
  EXPECT_NO_THROW(validate_budget(Budget{200.5}, c));
}

TEST(Validate, Target) {
  EXPECT_EQ(field_of([] { validate_target(PrecisionTarget{0.0}); }), "target.max_variance");
}

TEST(Validate, DesignOrderingAndDivisibility) {
  EXPECT_EQ(field_of([] { validate_design(Design{10, 0}); }), "design.k");
  EXPECT_EQ(field_of([] { validate_design(Design{0, 1}); }), "design.n");
  EXPECT_EQ(field_of([] { validate_design(Design{4, 5}); }), "design.k");
  std::vector<std::string> warnings;
  validate_design(Design{10, 4}, &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("5/2"), std::string::npos);
  warnings.clear();
  validate_design(Design{12, 4}, &warnings);
  EXPECT_TRUE(warnings.empty());
}

TEST(Design, CompositeFraction) {
  const Design d{10, 4};
  EXPECT_EQ(d.composite_numerator(), 5);
  EXPECT_EQ(d.composite_denominator(), 2);
  EXPECT_DOUBLE_EQ(d.composite_size(), 2.5);
  EXPECT_FALSE(d.divisible());
}

TEST(Validate, Counts) {
  EXPECT_EQ(require_count(12.0, "n"), 12);
  EXPECT_THROW(require_count(12.5, "n"), ValidationError);
  EXPECT_THROW(require_count(1e300, "n"), ValidationError);
}

}  // namespace
}  // namespace socplan
