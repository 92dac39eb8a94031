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

#include "socplan/service.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace socplan {
namespace {

Json topsoil() { return Json::parse(testing::topsoil_request()); }

ErrorInfo failure(std::string_view op, const Json& req, const ServiceLimits& limits = {}) {
  try {
    execute(op, req, limits);
  } catch (...) {
    return classify(std::current_exception());
  }
  return ErrorInfo{ErrorKind::kInternal, "none", "", ""};
}

TEST(Optimize, PerMethodResults) {
  Json req = topsoil();
  req["target"] = {{"max_se", 0.07}};
  const OrderedJson r = execute("optimize", req);
  EXPECT_EQ(r["schema_version"], 1);
  EXPECT_EQ(r["problem"], "budget");
  ASSERT_EQ(r["results"].size(), 3u);
  const auto& dcea = r["results"][0];
  EXPECT_EQ(dcea["method"], "DC-EA");
  EXPECT_EQ(dcea["n"], 128);
  EXPECT_EQ(dcea["k"], 6);
  EXPECT_EQ(dcea["rounded"]["n"], 129);
  EXPECT_EQ(dcea["rounded"]["k"], 5);
  EXPECT_EQ(r["precision"]["results"].size(), 3u);
  EXPECT_NEAR(r["precision"]["max_variance"].get<double>(), 0.0049, 1e-15);
}

TEST(Optimize, MethodFilterAndWarnings) {
  Json req = topsoil();
  req["method"] = "DC-EA";
  const OrderedJson r = execute("optimize", req);
  ASSERT_EQ(r["results"].size(), 1u);
  // 128 cores into 6 composites is uneven.
  ASSERT_EQ(r["warnings"].size(), 1u);
}

TEST(Optimize, Errors) {
  Json req = topsoil();
  req["budget"] = 150;
  ErrorInfo e = failure("optimize", req);
  EXPECT_EQ(e.kind, ErrorKind::kInfeasible);
  EXPECT_EQ(e.field_path, "budget");
  req = topsoil();
  req.erase("budget");
  e = failure("optimize", req);
  EXPECT_EQ(e.kind, ErrorKind::kValidation);
  EXPECT_EQ(e.field_path, "budget");
  req = topsoil();
  req["extra"] = 1;
  EXPECT_EQ(failure("optimize", req).field_path, "extra");
  req = topsoil();
  req["methods"][1]["sigma_delta"] = -1;
  EXPECT_EQ(failure("optimize", req).field_path, "methods[1].sigma_delta");
}

TEST(MinCost, NeedsTarget) {
  Json req = topsoil();
  EXPECT_EQ(failure("min-cost", req).field_path, "target");
  req["target"] = {{"max_variance", 0.005}};
  const OrderedJson r = execute("min-cost", req);
  EXPECT_EQ(r["problem"], "precision");
  for (const auto& row : r["results"]) EXPECT_LE(row["achieved_variance"].get<double>(), 0.005);
}

TEST(CompositeSize, CostGrid) {
  Json req = topsoil();
  req["cost_cores"] = {5, 20, 40};
  req["method"] = "DC-EA";
  const OrderedJson r = execute("composite-size", req);
  ASSERT_EQ(r["results"].size(), 3u);
  EXPECT_NEAR(r["results"][2]["continuous"].get<double>(), 7.67988, 1e-5);
  EXPECT_EQ(r["results"][2]["floor"], 7);
}

TEST(Efficiency, NeedsPairWhenMoreThanTwo) {
  Json req = topsoil();
  EXPECT_EQ(failure("efficiency", req).field_path, "method1");
  req["method1"] = "DC-EA";
  req["method2"] = "LOI";
  EXPECT_NEAR(execute("efficiency", req)["relative_efficiency"].get<double>(), 0.691948, 1e-6);
  req["method2"] = "XRF";
  EXPECT_EQ(failure("efficiency", req).field_path, "method2");
}

TEST(Curves, BudgetAndTradeoff) {
  Json req = topsoil();
  req["budgets"] = {500, 1000};
  OrderedJson r = execute("curves", req);
  EXPECT_EQ(r["kind"], "se_vs_budget");
  EXPECT_EQ(r["series"].size(), 4u);
  req.erase("budgets");
  req["fixed_n"] = 100;
  req["k_grid"] = {1, 100};
  req["method"] = "LOI";
  req["cv"] = true;
  r = execute("curves", req);
  ASSERT_EQ(r["series"].size(), 1u);
  EXPECT_FALSE(r["series"][0]["points"][0].contains("se"));
  EXPECT_TRUE(r["series"][0]["points"][0].contains("cv"));
  req["budgets"] = {500};
  EXPECT_EQ(failure("curves", req).field_path, "budgets");
}

TEST(Estimate, SigmaSources) {
  Json req = {{"composites", {{"plot_id", "A"}, {"n", 12}, {"values", {3.4, 3.8, 3.5, 3.7}}}},
              {"sigma_delta", 0.11}};
  OrderedJson r = execute("estimate", req);
  EXPECT_EQ(r["sigma_delta_source"], "given");
  EXPECT_EQ(r["estimates"][0]["df"], 11);
  req.erase("sigma_delta");
  req["replicates"] = {{3.5, 3.6, 3.4}, {2.0, 2.1}};
  r = execute("estimate", req);
  EXPECT_EQ(r["sigma_delta_source"], "replicates");
  EXPECT_TRUE(r.contains("assay_error"));
  req["sigma_delta"] = 0.1;
  EXPECT_EQ(failure("estimate", req).field_path, "sigma_delta");
}

TEST(Diff, ExactForSmallSamples) {
  const Json req = {{"composites1", {{"n", 12}, {"values", {3.4, 3.8, 3.5, 3.7}}}},
                    {"composites2", {{"n", 12}, {"values", {3.0, 3.1, 3.2, 3.3}}}},
                    {"sigma_delta", 0.05}};
  const OrderedJson r = execute("diff", req);
  EXPECT_TRUE(r["p_value_exact"].get<bool>());
  EXPECT_EQ(r["permutations"], 70);
  EXPECT_NEAR(r["p_value"].get<double>(), 2.0 / 70.0, 1e-12);
}

TEST(Simulate, CapOnlyUnderLimits) {
  Json req = topsoil();
  req["simulation"]["reps"] = 200;
  req["simulation"]["grid_rows"] = 20;
  req["simulation"]["grid_cols"] = 20;
  const OrderedJson r = execute("simulate", req);
  EXPECT_EQ(r["method"], "LOI");
  EXPECT_EQ(r["reps"], 200);
  req["simulation"]["reps"] = 200000;
  EXPECT_EQ(failure("simulate", req, http_limits()).kind, ErrorKind::kLimit);
}

TEST(Stock, UsesPlotMean) {
  Json req = topsoil();
  req["geometry"] = {{"depth_m", 0.1}, {"area_m2", 10000}, {"bulk_density", 1.2}};
  const OrderedJson r = execute("stock", req);
  EXPECT_NEAR(r["stock_t_per_ha"].get<double>(), 42.84, 1e-9);
}

TEST(PathLength, Square) {
  const OrderedJson r = execute("path-length", Json{{"n", 10}, {"area_m2", 4096}});
  EXPECT_NEAR(r["expected_path_m"].get<double>(), 145.718, 1e-3);
  EXPECT_NEAR(r["transect_m"].get<double>(), 90.51, 1e-2);
}

TEST(Tables, StudiesFieldPrefix) {
  Json bad = topsoil();
  bad["plot"]["mu"] = -1;
  const ErrorInfo e = failure("tables", Json{{"studies", {topsoil(), bad}}});
  EXPECT_EQ(e.field_path, "studies[1].plot.mu");
}

TEST(Execute, MalformedAndUnknown) {
  try {
    execute("optimize", std::string_view("{oops"));
    FAIL();
  } catch (...) {
    const ErrorInfo e = classify(std::current_exception());
    EXPECT_EQ(e.kind, ErrorKind::kMalformed);
    EXPECT_EQ(e.code, "malformed_json");
    const OrderedJson env = error_envelope(e);
    EXPECT_TRUE(env["field_path"].is_null());
  }
  EXPECT_FALSE(is_operation("explode"));
  EXPECT_TRUE(is_operation("health"));
}

TEST(Render, FormatsAgree) {
  Json req = topsoil();
  const OrderedJson r = execute("optimize", req);
  EXPECT_EQ(render("optimize", r, OutputFormat::kJson), emit_json(r));
  const std::string csv = render("optimize", r, OutputFormat::kCsv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const std::string text = render("optimize", r, OutputFormat::kText);
  EXPECT_NE(text.find("DC-EA"), std::string::npos);
  EXPECT_THROW(parse_output_format("xml"), ValidationError);
}

}  // namespace
}  // namespace socplan
