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

#include "socplan/data_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace socplan {
namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kHeader = "plot_id,composite_id,n_cores_total,measurement\n";

TEST(CompositesCsv, ReadsPlotsInFileOrder) {
  const AssayDataset d =
      parse_composites_csv(slurp(SOCPLAN_TEST_DATA_DIR "/composites.csv"), "composites.csv");
  ASSERT_EQ(d.composites.size(), 2u);
  EXPECT_EQ(d.composites[0].plot_id, "A");
  EXPECT_EQ(d.composites[0].k(), 4);
  EXPECT_EQ(d.composites[0].n, 12);
  EXPECT_DOUBLE_EQ(d.composites[1].values[2], 3.25);
  EXPECT_TRUE(d.source.warnings.empty());
  EXPECT_EQ(d.source.data_rows, 7u);
}

TEST(CompositesCsv, ShortRowReportsItsLine) {
  try {
    parse_composites_csv(slurp(SOCPLAN_TEST_DATA_DIR "/bad_row.csv"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(CompositesCsv, EmptyAndHeaderOnly) {
  try {
    parse_composites_csv(kHeader);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_STREQ(e.what(), "no data rows");
  }
  EXPECT_THROW(parse_composites_csv(""), ParseError);
  EXPECT_THROW(parse_composites_csv("plot,composite,n,value\nA,1,2,3\n"), ParseError);
}

TEST(CompositesCsv, BomCrlfUnitsAndBlankLines) {
  const std::string text = "\xEF\xBB\xBF# units=g_per_kg\r\n" + std::string("plot_id,composite_id,n_cores_total,measurement\r\n") +
                           "\r\nP,1,4,35.7\r\nP,2,4,30.1\r\n";
  const AssayDataset d = parse_composites_csv(text);
  ASSERT_EQ(d.composites.size(), 1u);
  EXPECT_DOUBLE_EQ(d.composites[0].values[0], 3.57);
  EXPECT_DOUBLE_EQ(d.composites[0].values[1], 3.01);
}

TEST(CompositesCsv, StrictNumbers) {
  EXPECT_THROW(parse_composites_csv(kHeader + "A,1,12,3.4x\n"), ParseError);
  EXPECT_THROW(parse_composites_csv(kHeader + "A,1,12,nan\n"), ParseError);
  EXPECT_THROW(parse_composites_csv(kHeader + "A,1,12.5,3.4\n"), ParseError);
  EXPECT_THROW(parse_composites_csv(kHeader + "A,1,12,-1\n"), ParseError);
}

TEST(CompositesCsv, InconsistentCoreCount) {
  try {
    parse_composites_csv(kHeader + "A,1,12,3.4\nA,2,10,3.5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "n_cores_total");
    EXPECT_EQ(e.row(), 3u);
  }
}

TEST(CompositesCsv, WarningsForDuplicatesAndDivisibility) {
  const AssayDataset d = parse_composites_csv(kHeader + "A,1,10,3.4\nA,1,10,3.5\nA,3,10,3.6\n");
  ASSERT_EQ(d.source.warnings.size(), 2u);
  EXPECT_NE(d.source.warnings[0].find("duplicate composite_id"), std::string::npos);
  EXPECT_NE(d.source.warnings[1].find("not divisible"), std::string::npos);
}

TEST(ReplicatesCsv, GroupsBySample) {
  const AssayDataset d = parse_replicates_csv(slurp(SOCPLAN_TEST_DATA_DIR "/replicates.csv"));
  ASSERT_EQ(d.replicates.groups.size(), 3u);
  EXPECT_EQ(d.replicates.sample_ids[2], "S3");
  EXPECT_EQ(d.replicates.groups[1].size(), 2u);
}

TEST(ReplicatesCsv, SingletonsDroppedWithWarning) {
  const AssayDataset d = parse_replicates_csv(
      "sample_id,replicate_id,measurement\nS1,1,3.5\nS1,2,3.6\nS2,1,2.0\n");
  EXPECT_EQ(d.replicates.groups.size(), 1u);
  ASSERT_EQ(d.source.warnings.size(), 1u);
  EXPECT_THROW(parse_replicates_csv("sample_id,replicate_id,measurement\nS1,1,3.5\n"),
               ParseError);
  EXPECT_THROW(parse_replicates_csv("sample_id,replicate_id,measurement\nS1,1,0\nS1,2,1\n"),
               ParseError);
}

TEST(Config, ShippedFilesRoundTrip) {
  for (const char* name : {"/topsoil.json", "/deep.json"}) {
    const StudyConfig c = parse_config(slurp(std::string(SOCPLAN_DATA_DIR) + name));
    EXPECT_EQ(c.methods.size(), 3u);
    const std::string once = emit_json(config_to_json(c));
    const std::string twice = emit_json(config_to_json(parse_config(once)));
    EXPECT_EQ(once, twice);
  }
}

TEST(Config, FieldPathsOnErrors) {
  const auto field = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("none");
  };
  const std::string base =
      R"("plot":{"mu":3.57,"sigma_p":0.68},"methods":[{"name":"LOI","sigma_delta":0.11,"cost_prep":8,"cost_assay":1.25}],"costs":{"cost_fixed":200,"cost_core":5})";
  EXPECT_EQ(field("{" + base + "}"), "none");
  EXPECT_EQ(field("{" + base + R"(,"colour":1})"), "colour");
  EXPECT_EQ(field("{" + base + R"(,"schema_version":2})"), "schema_version");
  EXPECT_EQ(field(R"({"plot":{"mu":3.57},"methods":[],"costs":{}})"), "plot.sigma_p");
  EXPECT_EQ(field("{" + base + R"(,"target":{"max_se":0.1,"max_variance":0.01}})"), "target");
  EXPECT_EQ(field("{" + base + R"(,"simulation":{"n":30,"k":7}})"), "simulation.k");
  EXPECT_EQ(field("{" + base + R"(,"simulation":{"method":"XRF"}})"), "simulation.method");
  EXPECT_EQ(field(R"({"plot":{"mu":"3"}})"), "plot.mu");
  EXPECT_THROW(parse_config("{not json"), MalformedJsonError);
}

TEST(Config, MaxSeBecomesVariance) {
  const StudyConfig c = parse_config(
      R"({"plot":{"mu":3.57,"sigma_p":0.68},"methods":[{"name":"LOI","sigma_delta":0.11,"cost_prep":8,"cost_assay":1.25}],"costs":{"cost_fixed":200,"cost_core":5},"target":{"max_se":0.1}})");
  ASSERT_TRUE(c.target.has_value());
  EXPECT_NEAR(c.target->max_variance, 0.01, 1e-15);
}

TEST(Emit, NumbersAndCsv) {
  EXPECT_EQ(emit_json(OrderedJson{{"x", number(0.1 + 0.2)}}), "{\n  \"x\": 0.3\n}\n");
  EXPECT_EQ(format_number(2.5), "2.5");
  Table t{{"a", "b"}, {{"1", "x,y"}}};
  EXPECT_EQ(emit_csv(t), "a,b\n1,\"x,y\"\n");
}

}  // namespace
}  // namespace socplan
