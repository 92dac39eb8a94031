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

// Ingestion of assay CSV files and study configurations, and serialization
// of reports.
//
// CSV layouts (UTF-8, comma separated, '.' decimal, LF or CRLF):
//
//   plot_id,composite_id,n_cores_total,measurement
//   sample_id,replicate_id,measurement
//
// An optional first line "# units=g_per_kg" (or "# units=percent") sets the
// concentration unit; g/kg values are divided by 10 on ingestion. Row numbers
// in messages are 1-based physical line numbers, header included.
//
// Study configurations are JSON documents; unknown keys are rejected.

#ifndef SOCPLAN_DATA_IO_HPP_
#define SOCPLAN_DATA_IO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "socplan/design_math.hpp"
#include "socplan/domain.hpp"
#include "socplan/estimation.hpp"
#include "socplan/simulator.hpp"

namespace socplan {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Malformed input text. `row` is 0 when the problem is not tied to a row.
class ParseError : public ValidationError {
 public:
  ParseError(std::string field, std::size_t row, const std::string& message)
      : ValidationError(std::move(field), message), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Request text that is not JSON at all.
class MalformedJsonError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DatasetKind { kComposites, kReplicates };

struct SourceInfo {
  std::string name;
  std::size_t data_rows = 0;
  std::string units = "percent";
  std::vector<std::string> warnings;
};

struct AssayDataset {
  DatasetKind kind = DatasetKind::kComposites;
  std::vector<CompositeAssays> composites;  // one per plot_id, in file order
  ReplicateAssays replicates;
  SourceInfo source;
};

AssayDataset parse_composites_csv(std::string_view bytes, const std::string& source_name = "");
AssayDataset parse_replicates_csv(std::string_view bytes, const std::string& source_name = "");

struct SimulationSettings {
  std::int64_t n = 30;
  std::int64_t k = 6;
  std::int64_t reps = 10'000;
  std::uint64_t seed = 1;
  std::string method;  // empty: first method
  ErrorDistribution error_model = ErrorDistribution::kGamma;
  CompositingStrategy compositing = CompositingStrategy::kRandom;
  SpatialCorrelation spatial_correlation = SpatialCorrelation::kNone;
  Texture texture = Texture::kAuto;
  std::uint64_t texture_seed = 1;
  std::int64_t grid_rows = 100;
  std::int64_t grid_cols = 100;
  double alpha = 0.05;
};

struct StudyConfig {
  PlotParameters plot;
  std::vector<AssayMethod> methods;
  CostModel costs;
  std::optional<Budget> budget;
  std::optional<PrecisionTarget> target;
  std::optional<StockGeometry> geometry;
  std::optional<SimulationSettings> simulation;

  const AssayMethod& method(const std::string& name, const std::string& field) const;
};

Json parse_json_text(std::string_view bytes);

StudyConfig parse_config(std::string_view bytes);
StudyConfig parse_config(const Json& doc);
inline StudyConfig parse_config(const std::string& bytes) {
  return parse_config(std::string_view(bytes));
}
inline StudyConfig parse_config(const char* bytes) { return parse_config(std::string_view(bytes)); }
OrderedJson config_to_json(const StudyConfig& config);

// Field-level readers shared with request handling. `path` prefixes error
// field paths.
void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& path);
const Json& require_key(const Json& obj, std::string_view key, const std::string& path);
double read_number(const Json& v, const std::string& path);
std::int64_t read_count(const Json& v, const std::string& path);
std::string read_string(const Json& v, const std::string& path);
bool read_bool(const Json& v, const std::string& path);
std::vector<double> read_number_array(const Json& v, const std::string& path);
PlotParameters read_plot(const Json& v, const std::string& path = "plot");
AssayMethod read_method(const Json& v, const std::string& path);
std::vector<AssayMethod> read_methods(const Json& v, const std::string& path = "methods");
CostModel read_costs(const Json& v, const std::string& path = "costs");
PrecisionTarget read_target(const Json& v, const std::string& path = "target");
StockGeometry read_geometry(const Json& v, const std::string& path = "geometry");
SimulationSettings read_simulation(const Json& v, const std::string& path = "simulation");
CompositeAssays read_composites(const Json& v, const std::string& path);
ReplicateAssays read_replicates(const Json& v, const std::string& path);

// Number rounded to 12 significant digits; null when not finite.
OrderedJson number(double v);

OrderedJson to_json(const PlotParameters& p);
OrderedJson to_json(const AssayMethod& m);
OrderedJson to_json(const CostModel& c);
OrderedJson to_json(const IntegerDesign& d);
OrderedJson to_json(const OptimalAllocation& a);
OrderedJson to_json(const CompositeSize& c);
OrderedJson to_json(const CurvePoint& p);
OrderedJson to_json(const EstimateReport& r);
OrderedJson to_json(const DifferenceReport& r);
OrderedJson to_json(const AssayErrorEstimate& e);
OrderedJson to_json(const SimulationResult& r);
OrderedJson to_json(const SourceInfo& s);
OrderedJson to_json(const AssayDataset& d);

// Pretty JSON with two-space indent and a trailing LF.
std::string emit_json(const OrderedJson& doc);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180 style CSV with LF line endings.
std::string emit_csv(const Table& table);
std::string format_number(double v);

// Header "abscissa,se,cv,cost".
Table curve_table(std::span<const CurvePoint> points);

}  // namespace socplan

#endif  // SOCPLAN_DATA_IO_HPP_
