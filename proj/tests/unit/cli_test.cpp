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

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "test_support.hpp"

namespace socplan {
namespace {

using testing::run;

const std::string kCli = SOCPLAN_CLI_PATH;
const std::string kTopsoil = std::string(SOCPLAN_DATA_DIR) + "/topsoil.json";
const std::string kData = SOCPLAN_TEST_DATA_DIR;

TEST(Cli, OptimizeJson) {
  const auto r = run(kCli + " optimize --config " + kTopsoil + " --output json");
  ASSERT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["results"][0]["n"], 128);
}

TEST(Cli, InfeasibleExitsThree) {
  const auto r = run(kCli + " optimize --config " + kTopsoil + " --budget 150 --output json");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(nlohmann::json::parse(r.out)["field_path"], "budget");
}

TEST(Cli, ValidationExitsTwo) {
  EXPECT_EQ(run(kCli + " optimize --config " + kTopsoil + " --mu -3").exit_code, 2);
  EXPECT_EQ(run(kCli + " optimize --frobnicate").exit_code, 2);
  EXPECT_EQ(run(kCli + " optimize --config /nonexistent.json").exit_code, 2);
  EXPECT_EQ(run(kCli + " estimate --composites " + kData + "/bad_row.csv --sigma-delta 0.1")
                .exit_code,
            2);
}

TEST(Cli, FlagsOnlyStudy) {
  const auto r = run(kCli +
                     " composite-size --mu 3.57 --sigma-p 0.68 --cost-fixed 200 --cost-core 40"
                     " --add-method DC-EA:0.02:11:15 --output csv");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("7.679876"), std::string::npos);
}

TEST(Cli, EstimateAndDiff) {
  auto r = run(kCli + " estimate --composites " + kData + "/composites.csv --replicates " + kData +
               "/replicates.csv --output json");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["estimates"].size(), 2u);
  r = run(kCli + " diff " + kData + "/plot_a.csv " + kData + "/plot_b.csv --sigma-delta 0.05");
  EXPECT_EQ(r.exit_code, 0);
  r = run(kCli + " diff " + kData + "/composites.csv " + kData + "/plot_b.csv --sigma-delta 0.05");
  EXPECT_EQ(r.exit_code, 2);
}

TEST(Cli, PathLengthText) {
  const auto r = run(kCli + " path-length --n 10 --area 4096");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("145.7"), std::string::npos);
}

}  // namespace
}  // namespace socplan
