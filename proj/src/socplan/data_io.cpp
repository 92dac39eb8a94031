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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace socplan {

namespace {

constexpr std::string_view kCompositesHeader = "plot_id,composite_id,n_cores_total,measurement";
constexpr std::string_view kReplicatesHeader = "sample_id,replicate_id,measurement";

struct CsvLine {
  std::size_t row = 0;  // physical line number, 1-based
  std::vector<std::string> fields;
};

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

std::vector<std::string> split_csv(std::string_view line, std::size_t row) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"' && cur.empty()) {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError("csv", row, row_prefix(row) + "unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

struct CsvDocument {
  std::string units = "percent";
  std::vector<CsvLine> rows;
};

// Splits into lines, handles the BOM, the optional units line and the
// header check.
CsvDocument read_csv(std::string_view bytes, std::string_view header) {
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t row = 0;
  while (!bytes.empty()) {
    ++row;
    const auto nl = bytes.find('\n');
    std::string_view line = bytes.substr(0, nl);
    bytes.remove_prefix(nl == std::string_view::npos ? bytes.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    lines.emplace_back(row, line);
  }

  CsvDocument doc;
  std::size_t i = 0;
  if (i < lines.size() && lines[i].second.starts_with('#')) {
    const std::string directive = trim(lines[i].second.substr(1));
    if (directive == "units=g_per_kg") {
      doc.units = "g_per_kg";
    } else if (directive == "units=percent") {
      doc.units = "percent";
    } else {
      throw ParseError("units", lines[i].first,
                       row_prefix(lines[i].first) + "unknown directive '" + directive +
                           "' (expected units=percent or units=g_per_kg)");
    }
    ++i;
  }
  if (i >= lines.size()) throw ParseError("header", 0, "missing header; expected '" +
                                                           std::string(header) + "'");
  if (trim(lines[i].second) != header) {
    throw ParseError("header", lines[i].first,
                     row_prefix(lines[i].first) + "missing header; expected '" +
                         std::string(header) + "'");
  }
  const std::size_t columns = std::count(header.begin(), header.end(), ',') + 1;
  for (++i; i < lines.size(); ++i) {
    CsvLine line{lines[i].first, split_csv(lines[i].second, lines[i].first)};
    if (line.fields.size() != columns) {
      throw ParseError("csv", line.row,
                       row_prefix(line.row) + "expected " + std::to_string(columns) +
                           " fields, found " + std::to_string(line.fields.size()));
    }
    for (auto& f : line.fields) f = trim(f);
    doc.rows.push_back(std::move(line));
  }
  if (doc.rows.empty()) throw ParseError("csv", 0, "no data rows");
  return doc;
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(column, row,
                     row_prefix(row) + column + " '" + text + "' is not a valid number");
  }
  return v;
}

std::int64_t parse_int(const std::string& text, std::size_t row, const std::string& column) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(column, row,
                     row_prefix(row) + column + " '" + text + "' is not a valid integer");
  }
  return v;
}

double to_percent(double v, const std::string& units) { return units == "g_per_kg" ? v / 10.0 : v; }

std::string type_name(const Json& v) { return v.type_name(); }

template <typename Enum>
Enum read_enum(const Json& v, const std::string& path,
               std::initializer_list<std::pair<std::string_view, Enum>> options) {
  const std::string s = read_string(v, path);
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    names += names.empty() ? "" : ", ";
    names += name;
  }
  throw ValidationError(path, path + " must be one of: " + names);
}

std::uint64_t read_seed(const Json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t s = read_count(v, path);
  if (s < 0) throw ValidationError(path, path + " must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

}  // namespace

const AssayMethod& StudyConfig::method(const std::string& name, const std::string& field) const {
  for (const auto& m : methods) {
    if (m.name == name) return m;
  }
  throw ValidationError(field, "unknown method '" + name + "'");
}

AssayDataset parse_composites_csv(std::string_view bytes, const std::string& source_name) {
  const CsvDocument doc = read_csv(bytes, kCompositesHeader);
  AssayDataset out;
  out.kind = DatasetKind::kComposites;
  out.source.name = source_name;
  out.source.units = doc.units;
  out.source.data_rows = doc.rows.size();

  std::map<std::string, std::size_t> index;
  std::map<std::string, std::size_t> first_row;
  std::map<std::string, std::set<std::string>> seen_ids;
  for (const auto& line : doc.rows) {
    const std::string& plot = line.fields[0];
    if (plot.empty()) throw ParseError("plot_id", line.row, row_prefix(line.row) + "empty plot_id");
    const std::int64_t n = parse_int(line.fields[2], line.row, "n_cores_total");
    if (n < 1) {
      throw ParseError("n_cores_total", line.row, row_prefix(line.row) + "n_cores_total must be at least 1");
    }
    const double value = parse_double(line.fields[3], line.row, "measurement");
    if (value < 0.0) {
      throw ParseError("measurement", line.row, row_prefix(line.row) + "measurement is negative");
    }
    auto [it, inserted] = index.emplace(plot, out.composites.size());
    if (inserted) {
      out.composites.push_back(CompositeAssays{plot, {}, n});
      first_row[plot] = line.row;
    } else if (out.composites[it->second].n != n) {
      throw ParseError("n_cores_total", line.row,
                       row_prefix(line.row) + "n_cores_total " + std::to_string(n) +
                           " differs from " + std::to_string(out.composites[it->second].n) +
                           " given for plot " + plot + " on row " +
                           std::to_string(first_row[plot]));
    }
    if (!seen_ids[plot].insert(line.fields[1]).second) {
      out.source.warnings.push_back(row_prefix(line.row) + "duplicate composite_id '" +
                                    line.fields[1] + "' in plot " + plot);
    }
    out.composites[it->second].values.push_back(to_percent(value, doc.units));
  }
  for (const auto& plot : out.composites) {
    if (plot.n < plot.k()) {
      throw ParseError("n_cores_total", first_row[plot.plot_id],
                       "plot " + plot.plot_id + ": n_cores_total " + std::to_string(plot.n) +
                           " is smaller than its " + std::to_string(plot.k()) + " composites");
    }
    if (plot.n % plot.k() != 0) {
      out.source.warnings.push_back("plot " + plot.plot_id + ": n_cores_total " +
                                    std::to_string(plot.n) + " is not divisible by k=" +
                                    std::to_string(plot.k()));
    }
  }
  return out;
}

AssayDataset parse_replicates_csv(std::string_view bytes, const std::string& source_name) {
  const CsvDocument doc = read_csv(bytes, kReplicatesHeader);
  AssayDataset out;
  out.kind = DatasetKind::kReplicates;
  out.source.name = source_name;
  out.source.units = doc.units;
  out.source.data_rows = doc.rows.size();

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> groups;
  std::map<std::string, std::size_t> first_row;
  for (const auto& line : doc.rows) {
    const std::string& sample = line.fields[0];
    if (sample.empty()) {
      throw ParseError("sample_id", line.row, row_prefix(line.row) + "empty sample_id");
    }
    const double value = parse_double(line.fields[2], line.row, "measurement");
    if (!(value > 0.0)) {
      throw ParseError("measurement", line.row,
                       row_prefix(line.row) + "replicate measurements must be positive");
    }
    if (groups.find(sample) == groups.end()) {
      order.push_back(sample);
      first_row[sample] = line.row;
    }
    groups[sample].push_back(to_percent(value, doc.units));
  }
  for (const auto& sample : order) {
    auto& g = groups[sample];
    if (g.size() < 2) {
      out.source.warnings.push_back(row_prefix(first_row[sample]) + "sample " + sample +
                                    " has a single replicate; dropped");
      continue;
    }
    out.replicates.sample_ids.push_back(sample);
    out.replicates.groups.push_back(std::move(g));
  }
  if (out.replicates.groups.empty()) {
    throw ParseError("csv", 0, "no sample has at least 2 replicates");
  }
  return out;
}

Json parse_json_text(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedJsonError(std::string("malformed JSON: ") + e.what());
  }
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& path) {
  if (!obj.is_object()) {
    throw ValidationError(path.empty() ? "$" : path,
                          (path.empty() ? std::string("document") : path) + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      const std::string field = path.empty() ? key : path + "." + key;
      throw ValidationError(field, "unknown key '" + field + "'");
    }
  }
}

const Json& require_key(const Json& obj, std::string_view key, const std::string& path) {
  const std::string field = path.empty() ? std::string(key) : path + "." + std::string(key);
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ValidationError(field, "missing required field '" + field + "'");
  }
  return *it;
}

double read_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, path + " must be a number, got " + type_name(v));
  const double d = v.get<double>();
  require_finite(d, path);
  return d;
}

std::int64_t read_count(const Json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  return require_count(read_number(v, path), path);
}

std::string read_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ValidationError(path, path + " must be a string, got " + type_name(v));
  return v.get<std::string>();
}

bool read_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ValidationError(path, path + " must be a boolean, got " + type_name(v));
  return v.get<bool>();
}

std::vector<double> read_number_array(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, path + " must be an array, got " + type_name(v));
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(read_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

PlotParameters read_plot(const Json& v, const std::string& path) {
  reject_unknown_keys(v, {"label", "mu", "sigma_p", "units"}, path);
  PlotParameters p;
  p.mu = read_number(require_key(v, "mu", path), path + ".mu");
  p.sigma_p = read_number(require_key(v, "sigma_p", path), path + ".sigma_p");
  if (v.contains("label")) p.label = read_string(v["label"], path + ".label");
  if (v.contains("units")) {
    const std::string units = read_string(v["units"], path + ".units");
    if (units == "g_per_kg") {
      p.mu /= 10.0;
      p.sigma_p /= 10.0;
    } else if (units != "percent") {
      throw ValidationError(path + ".units", path + ".units must be percent or g_per_kg");
    }
  }
  return validate_plot(p, path);
}

AssayMethod read_method(const Json& v, const std::string& path) {
  reject_unknown_keys(v, {"name", "sigma_delta", "cost_prep", "cost_assay"}, path);
  AssayMethod m;
  m.name = read_string(require_key(v, "name", path), path + ".name");
  if (m.name.empty()) throw ValidationError(path + ".name", path + ".name must not be empty");
  m.sigma_delta = read_number(require_key(v, "sigma_delta", path), path + ".sigma_delta");
  m.cost_prep = read_number(require_key(v, "cost_prep", path), path + ".cost_prep");
  m.cost_assay = read_number(require_key(v, "cost_assay", path), path + ".cost_assay");
  return validate_method(m, path);
}

std::vector<AssayMethod> read_methods(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, path + " must be an array");
  if (v.empty()) throw ValidationError(path, path + " must list at least one method");
  std::vector<AssayMethod> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    out.push_back(read_method(v[i], p));
    if (!names.insert(out.back().name).second) {
      throw ValidationError(p + ".name", "duplicate method name '" + out.back().name + "'");
    }
  }
  return out;
}

CostModel read_costs(const Json& v, const std::string& path) {
  reject_unknown_keys(v, {"cost_fixed", "cost_core"}, path);
  CostModel c;
  c.cost_fixed = read_number(require_key(v, "cost_fixed", path), path + ".cost_fixed");
  c.cost_core = read_number(require_key(v, "cost_core", path), path + ".cost_core");
  return validate_costs(c, path);
}

PrecisionTarget read_target(const Json& v, const std::string& path) {
  reject_unknown_keys(v, {"max_variance", "max_se"}, path);
  const bool has_var = v.contains("max_variance");
  const bool has_se = v.contains("max_se");
  if (has_var == has_se) {
    throw ValidationError(path, path + " needs exactly one of max_variance or max_se");
  }
  if (has_var) {
    return validate_target(
        PrecisionTarget{read_number(v["max_variance"], path + ".max_variance")}, path);
  }
  const double se = read_number(v["max_se"], path + ".max_se");
  if (!(se > 0.0)) throw ValidationError(path + ".max_se", path + ".max_se must be strictly positive");
  return validate_target(PrecisionTarget::from_se(se), path);
}

StockGeometry read_geometry(const Json& v, const std::string& path) {
  reject_unknown_keys(v, {"depth_m", "area_m2", "bulk_density"}, path);
  StockGeometry g;
  g.depth_m = read_number(require_key(v, "depth_m", path), path + ".depth_m");
  g.area_m2 = read_number(require_key(v, "area_m2", path), path + ".area_m2");
  g.bulk_density = read_number(require_key(v, "bulk_density", path), path + ".bulk_density");
  return validate_geometry(g, path);
}

SimulationSettings read_simulation(const Json& v, const std::string& path) {
  reject_unknown_keys(v,
                      {"n", "k", "reps", "seed", "method", "error_model", "compositing",
                       "spatial_correlation", "texture", "texture_seed", "grid_rows", "grid_cols",
                       "alpha"},
                      path);
  SimulationSettings s;
  auto field = [&](const char* key) { return path + "." + key; };
  if (v.contains("n")) s.n = read_count(v["n"], field("n"));
  if (v.contains("k")) s.k = read_count(v["k"], field("k"));
  if (v.contains("reps")) s.reps = read_count(v["reps"], field("reps"));
  if (v.contains("seed")) s.seed = read_seed(v["seed"], field("seed"));
  if (v.contains("method")) s.method = read_string(v["method"], field("method"));
  if (v.contains("error_model")) {
    s.error_model = read_enum<ErrorDistribution>(
        v["error_model"], field("error_model"),
        {{"gamma", ErrorDistribution::kGamma}, {"lognormal", ErrorDistribution::kLognormal}});
  }
  if (v.contains("compositing")) {
    s.compositing = read_enum<CompositingStrategy>(
        v["compositing"], field("compositing"),
        {{"random", CompositingStrategy::kRandom}, {"adjacent", CompositingStrategy::kAdjacent}});
  }
  if (v.contains("spatial_correlation")) {
    s.spatial_correlation = read_enum<SpatialCorrelation>(
        v["spatial_correlation"], field("spatial_correlation"),
        {{"none", SpatialCorrelation::kNone},
         {"smooth_gradient", SpatialCorrelation::kSmoothGradient}});
  }
  if (v.contains("texture")) {
    s.texture = read_enum<Texture>(v["texture"], field("texture"),
                                   {{"auto", Texture::kAuto},
                                    {"gaussian", Texture::kGaussian},
                                    {"uniform", Texture::kUniform},
                                    {"two_point", Texture::kTwoPoint}});
  }
  if (v.contains("texture_seed")) s.texture_seed = read_seed(v["texture_seed"], field("texture_seed"));
  if (v.contains("grid_rows")) s.grid_rows = read_count(v["grid_rows"], field("grid_rows"));
  if (v.contains("grid_cols")) s.grid_cols = read_count(v["grid_cols"], field("grid_cols"));
  if (v.contains("alpha")) s.alpha = read_number(v["alpha"], field("alpha"));

  validate_design(Design{s.n, s.k}, nullptr, path);
  if (s.n % s.k != 0) {
    throw ValidationError(field("k"), "simulation requires n divisible by k");
  }
  if (s.reps < 1) throw ValidationError(field("reps"), field("reps") + " must be at least 1");
  if (s.grid_rows < 1 || s.grid_cols < 1) {
    throw ValidationError(field("grid_rows"), "grid dimensions must be positive");
  }
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) {
    throw ValidationError(field("alpha"), field("alpha") + " must lie in (0, 1)");
  }
  return s;
}

CompositeAssays read_composites(const Json& v, const std::string& path) {
  reject_unknown_keys(v, {"plot_id", "n", "values"}, path);
  CompositeAssays c;
  if (v.contains("plot_id")) c.plot_id = read_string(v["plot_id"], path + ".plot_id");
  c.values = read_number_array(require_key(v, "values", path), path + ".values");
  c.n = v.contains("n") ? read_count(v["n"], path + ".n") : c.k();
  validate_composites(c, path);
  return c;
}

ReplicateAssays read_replicates(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ValidationError(path, path + " must be an array of arrays");
  ReplicateAssays r;
  for (std::size_t i = 0; i < v.size(); ++i) {
    r.sample_ids.push_back(std::to_string(i + 1));
    r.groups.push_back(read_number_array(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return r;
}

StudyConfig parse_config(std::string_view bytes) { return parse_config(parse_json_text(bytes)); }

StudyConfig parse_config(const Json& doc) {
  reject_unknown_keys(doc,
                      {"schema_version", "plot", "methods", "costs", "budget", "target",
                       "geometry", "simulation"},
                      "");
  if (doc.contains("schema_version") &&
      read_count(doc["schema_version"], "schema_version") != kSchemaVersion) {
    throw ValidationError("schema_version", "unsupported schema_version");
  }
  StudyConfig c;
  c.plot = read_plot(require_key(doc, "plot", ""));
  c.methods = read_methods(require_key(doc, "methods", ""));
  c.costs = read_costs(require_key(doc, "costs", ""));
  if (doc.contains("budget") && !doc["budget"].is_null()) {
    const double b = read_number(doc["budget"], "budget");
    if (!(b > 0.0)) throw ValidationError("budget", "budget must be strictly positive");
    c.budget = Budget{b};
  }
  if (doc.contains("target") && !doc["target"].is_null()) c.target = read_target(doc["target"]);
  if (doc.contains("geometry") && !doc["geometry"].is_null()) {
    c.geometry = read_geometry(doc["geometry"]);
  }
  if (doc.contains("simulation") && !doc["simulation"].is_null()) {
    c.simulation = read_simulation(doc["simulation"]);
    if (!c.simulation->method.empty()) c.method(c.simulation->method, "simulation.method");
  }
  return c;
}

OrderedJson config_to_json(const StudyConfig& c) {
  OrderedJson j;
  j["schema_version"] = kSchemaVersion;
  j["plot"] = to_json(c.plot);
  j["methods"] = OrderedJson::array();
  for (const auto& m : c.methods) j["methods"].push_back(to_json(m));
  j["costs"] = to_json(c.costs);
  if (c.budget) j["budget"] = number(c.budget->total);
  if (c.target) j["target"] = OrderedJson{{"max_variance", number(c.target->max_variance)}};
  if (c.geometry) {
    j["geometry"] = OrderedJson{{"depth_m", number(c.geometry->depth_m)},
                                {"area_m2", number(c.geometry->area_m2)},
                                {"bulk_density", number(c.geometry->bulk_density)}};
  }
  if (c.simulation) {
    const auto& s = *c.simulation;
    OrderedJson sim;
    sim["n"] = s.n;
    sim["k"] = s.k;
    sim["reps"] = s.reps;
    sim["seed"] = s.seed;
    if (!s.method.empty()) sim["method"] = s.method;
    sim["error_model"] = to_string(s.error_model);
    sim["compositing"] = to_string(s.compositing);
    sim["spatial_correlation"] = to_string(s.spatial_correlation);
    sim["texture"] = to_string(s.texture);
    sim["texture_seed"] = s.texture_seed;
    sim["grid_rows"] = s.grid_rows;
    sim["grid_cols"] = s.grid_cols;
    sim["alpha"] = number(s.alpha);
    j["simulation"] = std::move(sim);
  }
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

OrderedJson number(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

OrderedJson to_json(const PlotParameters& p) {
  OrderedJson j;
  if (!p.label.empty()) j["label"] = p.label;
  j["mu"] = number(p.mu);
  j["sigma_p"] = number(p.sigma_p);
  return j;
}

OrderedJson to_json(const AssayMethod& m) {
  return OrderedJson{{"name", m.name},
                     {"sigma_delta", number(m.sigma_delta)},
                     {"cost_prep", number(m.cost_prep)},
                     {"cost_assay", number(m.cost_assay)}};
}

OrderedJson to_json(const CostModel& c) {
  return OrderedJson{{"cost_fixed", number(c.cost_fixed)}, {"cost_core", number(c.cost_core)}};
}

OrderedJson to_json(const IntegerDesign& d) {
  return OrderedJson{{"n", d.n},
                     {"k", d.k},
                     {"variance", number(d.variance)},
                     {"se", number(d.se)},
                     {"cost", number(d.cost)}};
}

OrderedJson to_json(const OptimalAllocation& a) {
  const Design design{a.n, a.k};
  OrderedJson j;
  j["n_opt"] = number(a.n_real);
  j["k_opt"] = number(a.k_real);
  j["boundary_case"] = to_string(a.boundary);
  j["n"] = a.n;
  j["k"] = a.k;
  j["composite_size"] = number(design.composite_size());
  j["divisible"] = design.divisible();
  j["achieved_variance"] = number(a.achieved_variance);
  j["achieved_se"] = number(a.achieved_se);
  j["total_cost"] = number(a.total_cost);
  j["rounded"] = to_json(a.rounded);
  return j;
}

OrderedJson to_json(const CompositeSize& c) {
  OrderedJson j;
  j["continuous"] = number(c.continuous);
  j["floor"] = c.floor_size > 0 ? OrderedJson(c.floor_size) : OrderedJson(nullptr);
  j["nearest"] = c.nearest_size > 0 ? OrderedJson(c.nearest_size) : OrderedJson(nullptr);
  j["boundary_case"] = to_string(c.boundary);
  j["compositing_gain"] = c.compositing_gain;
  return j;
}

OrderedJson to_json(const CurvePoint& p) {
  return OrderedJson{{"abscissa", number(p.abscissa)},
                     {"se", number(p.se)},
                     {"cv", number(p.cv)},
                     {"cost", number(p.cost)}};
}

OrderedJson to_json(const EstimateReport& r) {
  OrderedJson j;
  j["plot_id"] = r.plot_id;
  j["n"] = r.n;
  j["k"] = r.k;
  j["mu_hat"] = number(r.mu_hat);
  j["sigma_p_hat"] = number(r.sigma_p_hat);
  j["sigma_delta_hat"] = number(r.sigma_delta_hat);
  j["se_hat"] = number(r.se_hat);
  j["alpha"] = number(r.alpha);
  j["df"] = number(r.df);
  j["t_quantile"] = number(r.t_quantile);
  j["ci_low"] = number(r.ci_low);
  j["ci_high"] = number(r.ci_high);
  return j;
}

OrderedJson to_json(const DifferenceReport& r) {
  OrderedJson j;
  j["delta_hat"] = number(r.delta_hat);
  j["se_hat"] = number(r.se_hat);
  j["alpha"] = number(r.alpha);
  j["df"] = number(r.df);
  j["t_quantile"] = number(r.t_quantile);
  j["ci_low"] = number(r.ci_low);
  j["ci_high"] = number(r.ci_high);
  if (r.p_value) {
    j["p_value"] = number(*r.p_value);
    j["p_value_exact"] = r.p_value_exact;
    j["permutations"] = r.permutations;
  } else {
    j["p_value"] = nullptr;
  }
  return j;
}

OrderedJson to_json(const AssayErrorEstimate& e) {
  OrderedJson j;
  j["sigma_delta"] = number(e.sigma_delta);
  j["sigma_delta_sq"] = number(e.sigma_delta_sq);
  j["groups_used"] = e.groups_used;
  OrderedJson groups = OrderedJson::array();
  for (const auto& g : e.groups) {
    groups.push_back(OrderedJson{{"sample_id", g.sample_id},
                                 {"mean", number(g.mean)},
                                 {"sample_variance", number(g.sample_variance)},
                                 {"sigma_delta_sq", number(g.sigma_delta_sq)},
                                 {"excluded", g.excluded}});
  }
  j["groups"] = std::move(groups);
  j["warnings"] = e.warnings;
  return j;
}

OrderedJson to_json(const SimulationResult& r) {
  OrderedJson j;
  j["reps"] = r.reps;
  j["n"] = r.n;
  j["k"] = r.k;
  j["sigma_delta"] = number(r.sigma_delta);
  j["error_model"] = to_string(r.distribution);
  j["compositing"] = to_string(r.compositing);
  j["texture"] = to_string(r.texture);
  j["mu"] = number(r.mu);
  j["sigma_p"] = number(r.sigma_p);
  j["theoretical_variance"] = number(r.theoretical_variance);
  j["mean_mu_hat"] = number(r.mean_mu_hat);
  j["mc_se_mean"] = number(r.mc_se_mean);
  j["var_mu_hat"] = number(r.var_mu_hat);
  j["mc_se_var"] = number(r.mc_se_var);
  auto opt = [](const std::optional<double>& v) { return v ? number(*v) : OrderedJson(nullptr); };
  j["mean_sigma_p_sq_hat"] = opt(r.mean_sigma_p_sq_hat);
  j["expected_sigma_p_sq_hat"] = opt(r.expected_sigma_p_sq_hat);
  j["mc_se_sigma_p_sq"] = opt(r.mc_se_sigma_p_sq);
  j["ci_coverage"] = opt(r.ci_coverage);
  OrderedJson claims = OrderedJson::array();
  for (const auto& c : r.claims) {
    claims.push_back(OrderedJson{{"name", c.name},
                                 {"observed", number(c.observed)},
                                 {"expected", number(c.expected)},
                                 {"mc_se", number(c.mc_se)},
                                 {"pass", c.pass}});
  }
  j["claims"] = std::move(claims);
  return j;
}

OrderedJson to_json(const SourceInfo& s) {
  return OrderedJson{{"name", s.name},
                     {"data_rows", s.data_rows},
                     {"units", s.units},
                     {"warnings", s.warnings}};
}

OrderedJson to_json(const AssayDataset& d) {
  OrderedJson j;
  j["kind"] = d.kind == DatasetKind::kComposites ? "composites" : "replicates";
  if (d.kind == DatasetKind::kComposites) {
    OrderedJson plots = OrderedJson::array();
    for (const auto& c : d.composites) {
      OrderedJson values = OrderedJson::array();
      for (double v : c.values) values.push_back(number(v));
      plots.push_back(OrderedJson{{"plot_id", c.plot_id}, {"n", c.n}, {"values", values}});
    }
    j["composites"] = std::move(plots);
  } else {
    OrderedJson groups = OrderedJson::array();
    for (const auto& g : d.replicates.groups) {
      OrderedJson values = OrderedJson::array();
      for (double v : g) values.push_back(number(v));
      groups.push_back(std::move(values));
    }
    j["sample_ids"] = d.replicates.sample_ids;
    j["replicates"] = std::move(groups);
  }
  j["source"] = to_json(d.source);
  return j;
}

std::string emit_json(const OrderedJson& doc) {
  return doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string emit_csv(const Table& table) {
  auto escape = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out.push_back('"');
      out.push_back(ch);
    }
    out.push_back('"');
    return out;
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += escape(cells[i]);
    }
    out.push_back('\n');
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out;
}

Table curve_table(std::span<const CurvePoint> points) {
  Table t{{"abscissa", "se", "cv", "cost"}, {}};
  for (const auto& p : points) {
    t.rows.push_back({format_number(p.abscissa), format_number(p.se), format_number(p.cv),
                      format_number(p.cost)});
  }
  return t;
}

}  // namespace socplan
