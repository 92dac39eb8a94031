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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <new>

#include "socplan/design_math.hpp"
#include "socplan/estimation.hpp"
#include "socplan/simulator.hpp"

namespace socplan {

namespace {

using KeyList = std::vector<std::string_view>;

const KeyList kStudyKeys = {"schema_version", "plot",     "methods",  "costs",
                            "budget",         "target",   "geometry", "simulation"};

KeyList with_study_keys(KeyList extra) {
  extra.insert(extra.end(), kStudyKeys.begin(), kStudyKeys.end());
  return extra;
}

void check_keys(const Json& req, const KeyList& allowed) {
  for (const auto& [key, value] : req.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(key, "unknown key '" + key + "'");
    }
  }
  if (req.contains("schema_version") &&
      read_count(req["schema_version"], "schema_version") != kSchemaVersion) {
    throw ValidationError("schema_version", "unsupported schema_version");
  }
}

bool has(const Json& req, const char* key) { return req.contains(key) && !req[key].is_null(); }

OrderedJson response() {
  OrderedJson r;
  r["schema_version"] = kSchemaVersion;
  return r;
}

void merge(OrderedJson& into, const OrderedJson& from) {
  for (const auto& [key, value] : from.items()) into[key] = value;
}

const AssayMethod& find_method(const std::vector<AssayMethod>& methods, const std::string& name,
                               const std::string& field) {
  for (const auto& m : methods) {
    if (m.name == name) return m;
  }
  throw ValidationError(field, "unknown method '" + name + "'");
}

std::vector<AssayMethod> selected_methods(const Json& req, const std::vector<AssayMethod>& all) {
  if (!has(req, "method")) return all;
  return {find_method(all, read_string(req["method"], "method"), "method")};
}

double read_budget(const Json& req) {
  const double b = read_number(req["budget"], "budget");
  if (!(b > 0.0)) throw ValidationError("budget", "budget must be strictly positive");
  return b;
}

std::string design_warning(const std::string& who, std::int64_t n, std::int64_t k) {
  return who + ": n=" + std::to_string(n) + " is not a multiple of k=" + std::to_string(k) +
         "; composite sizes differ by one core";
}

OrderedJson allocation_results(const std::vector<AssayMethod>& methods,
                               const PlotParameters& plot,
                               const std::function<OptimalAllocation(const AssayMethod&)>& solve,
                               OrderedJson& warnings) {
  OrderedJson results = OrderedJson::array();
  for (const auto& m : methods) {
    const OptimalAllocation a = solve(m);
    OrderedJson entry;
    entry["method"] = m.name;
    merge(entry, to_json(a));
    entry["achieved_cv"] = plot.mu > 0.0 ? number(a.achieved_se / plot.mu) : OrderedJson(nullptr);
    if (a.n % a.k != 0) warnings.push_back(design_warning(m.name, a.n, a.k));
    results.push_back(std::move(entry));
  }
  return results;
}

OrderedJson precision_section(const std::vector<AssayMethod>& methods, const PlotParameters& plot,
                              const CostModel& costs, const PrecisionTarget& target,
                              OrderedJson& warnings) {
  OrderedJson out;
  out["max_variance"] = number(target.max_variance);
  out["max_se"] = number(std::sqrt(target.max_variance));
  out["results"] = allocation_results(
      methods, plot,
      [&](const AssayMethod& m) { return optimize_for_precision(plot, m, costs, target); },
      warnings);
  return out;
}

OrderedJson op_optimize(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"method"}));
  const PlotParameters plot = read_plot(require_key(req, "plot", ""));
  const auto methods = selected_methods(req, read_methods(require_key(req, "methods", "")));
  const CostModel costs = read_costs(require_key(req, "costs", ""));
  require_key(req, "budget", "");
  const Budget budget{read_budget(req)};

  OrderedJson warnings = OrderedJson::array();
  OrderedJson out = response();
  out["problem"] = "budget";
  out["budget"] = number(budget.total);
  out["results"] = allocation_results(
      methods, plot,
      [&](const AssayMethod& m) { return optimize_for_budget(plot, m, costs, budget); },
      warnings);
  if (has(req, "target")) {
    out["precision"] = precision_section(methods, plot, costs, read_target(req["target"]), warnings);
  }
  out["warnings"] = std::move(warnings);
  return out;
}

OrderedJson op_min_cost(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"method"}));
  const PlotParameters plot = read_plot(require_key(req, "plot", ""));
  const auto methods = selected_methods(req, read_methods(require_key(req, "methods", "")));
  const CostModel costs = read_costs(require_key(req, "costs", ""));
  const PrecisionTarget target = read_target(require_key(req, "target", ""));

  OrderedJson warnings = OrderedJson::array();
  OrderedJson out = response();
  out["problem"] = "precision";
  merge(out, precision_section(methods, plot, costs, target, warnings));
  out["warnings"] = std::move(warnings);
  return out;
}

std::vector<double> cost_core_grid(const Json& req, const CostModel& costs) {
  if (!has(req, "cost_cores")) return {costs.cost_core};
  auto grid = read_number_array(req["cost_cores"], "cost_cores");
  if (grid.empty()) throw ValidationError("cost_cores", "cost_cores must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    validate_costs(CostModel{costs.cost_fixed, grid[i]}, "cost_cores[" + std::to_string(i) + "]");
  }
  return grid;
}

OrderedJson op_composite_size(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"method", "cost_cores"}));
  const PlotParameters plot = read_plot(require_key(req, "plot", ""));
  const auto methods = selected_methods(req, read_methods(require_key(req, "methods", "")));
  const CostModel costs = read_costs(require_key(req, "costs", ""));

  OrderedJson results = OrderedJson::array();
  for (double cc : cost_core_grid(req, costs)) {
    for (const auto& m : methods) {
      OrderedJson entry;
      entry["method"] = m.name;
      entry["cost_core"] = number(cc);
      merge(entry, to_json(optimal_composite_size(plot, m, CostModel{costs.cost_fixed, cc})));
      results.push_back(std::move(entry));
    }
  }
  OrderedJson out = response();
  out["results"] = std::move(results);
  return out;
}

OrderedJson op_efficiency(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"method1", "method2"}));
  const PlotParameters plot = read_plot(require_key(req, "plot", ""));
  const auto methods = read_methods(require_key(req, "methods", ""));
  const CostModel costs = read_costs(require_key(req, "costs", ""));

  std::string name1, name2;
  if (has(req, "method1") || has(req, "method2")) {
    name1 = read_string(require_key(req, "method1", ""), "method1");
    name2 = read_string(require_key(req, "method2", ""), "method2");
  } else if (methods.size() == 2) {
    name1 = methods[0].name;
    name2 = methods[1].name;
  } else {
    throw ValidationError("method1", "method1 and method2 are required when methods has " +
                                         std::to_string(methods.size()) + " entries");
  }
  const AssayMethod& m1 = find_method(methods, name1, "method1");
  const AssayMethod& m2 = find_method(methods, name2, "method2");

  OrderedJson out = response();
  out["method1"] = m1.name;
  out["method2"] = m2.name;
  out["cost_core"] = number(costs.cost_core);
  out["relative_efficiency"] = number(relative_efficiency(plot, m1, m2, costs));
  return out;
}

OrderedJson points_json(const std::vector<CurvePoint>& points, bool cv_only) {
  OrderedJson arr = OrderedJson::array();
  for (const auto& p : points) {
    OrderedJson j = to_json(p);
    if (cv_only) j.erase("se");
    arr.push_back(std::move(j));
  }
  return arr;
}

OrderedJson op_curves(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"method", "budgets", "fixed_n", "k_grid", "cv"}));
  const PlotParameters plot = read_plot(require_key(req, "plot", ""));
  const auto methods = selected_methods(req, read_methods(require_key(req, "methods", "")));
  const CostModel costs = read_costs(require_key(req, "costs", ""));
  const bool cv_only = has(req, "cv") && read_bool(req["cv"], "cv");

  const bool by_budget = has(req, "budgets");
  const bool by_k = has(req, "fixed_n");
  if (by_budget == by_k) {
    throw ValidationError("budgets", "give exactly one of budgets or fixed_n");
  }
  if (has(req, "k_grid") && !by_k) throw ValidationError("k_grid", "k_grid needs fixed_n");

  OrderedJson out = response();
  OrderedJson series = OrderedJson::array();
  if (by_budget) {
    const auto budgets = read_number_array(req["budgets"], "budgets");
    if (budgets.empty()) throw ValidationError("budgets", "budgets must not be empty");
    out["kind"] = "se_vs_budget";
    for (const auto& s : se_budget_curve(plot, methods, costs, budgets)) {
      series.push_back(OrderedJson{{"name", s.name}, {"points", points_json(s.points, cv_only)}});
    }
  } else {
    const std::int64_t n = read_count(req["fixed_n"], "fixed_n");
    if (n < 1) throw ValidationError("fixed_n", "fixed_n must be at least 1");
    std::vector<std::int64_t> k_grid;
    if (has(req, "k_grid")) {
      const auto raw = read_number_array(req["k_grid"], "k_grid");
      if (raw.empty()) throw ValidationError("k_grid", "k_grid must not be empty");
      for (std::size_t i = 0; i < raw.size(); ++i) {
        k_grid.push_back(require_count(raw[i], "k_grid[" + std::to_string(i) + "]"));
      }
    } else {
      if (n > 100'000) {
        throw ValidationError("fixed_n", "fixed_n above 100000 needs an explicit k_grid");
      }
      for (std::int64_t k = 1; k <= n; ++k) k_grid.push_back(k);
    }
    out["kind"] = "tradeoff";
    out["n"] = n;
    for (const auto& m : methods) {
      series.push_back(OrderedJson{
          {"name", m.name}, {"points", points_json(tradeoff_curve(plot, m, costs, n, k_grid), cv_only)}});
    }
  }
  out["series"] = std::move(series);
  return out;
}

double read_alpha(const Json& req) {
  if (!has(req, "alpha")) return 0.05;
  const double a = read_number(req["alpha"], "alpha");
  if (!(a > 0.0 && a < 1.0)) throw ValidationError("alpha", "alpha must lie in (0, 1)");
  return a;
}

std::optional<double> read_df(const Json& req) {
  if (!has(req, "df")) return std::nullopt;
  return read_number(req["df"], "df");
}

double read_sigma_delta(const Json& v, const std::string& field) {
  const double s = read_number(v, field);
  if (s < 0.0) throw ValidationError(field, field + " must be nonnegative");
  return s;
}

std::vector<CompositeAssays> read_composite_list(const Json& v, const std::string& path) {
  std::vector<CompositeAssays> out;
  if (v.is_array()) {
    if (v.empty()) throw ValidationError(path, path + " must not be empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(read_composites(v[i], path + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(read_composites(v, path));
  }
  return out;
}

Aggregation read_aggregation(const Json& req) {
  if (!has(req, "aggregation")) return Aggregation::kMedian;
  const std::string s = read_string(req["aggregation"], "aggregation");
  if (s == "median") return Aggregation::kMedian;
  if (s == "mean") return Aggregation::kMean;
  throw ValidationError("aggregation", "aggregation must be median or mean");
}

OrderedJson op_estimate(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"method", "composites", "replicates", "replicate_ids",
                                   "sigma_delta", "alpha", "df", "aggregation"}));
  const auto plots = read_composite_list(require_key(req, "composites", ""), "composites");
  const double alpha = read_alpha(req);
  const auto df = read_df(req);

  const int sources = int{has(req, "sigma_delta")} + int{has(req, "replicates")} +
                      int{has(req, "method")};
  if (sources != 1) {
    throw ValidationError("sigma_delta",
                          "give exactly one of sigma_delta, replicates or method");
  }

  OrderedJson out = response();
  OrderedJson warnings = OrderedJson::array();
  double sigma_delta = 0.0;
  OrderedJson assay_error;
  if (has(req, "sigma_delta")) {
    sigma_delta = read_sigma_delta(req["sigma_delta"], "sigma_delta");
    out["sigma_delta_source"] = "given";
  } else if (has(req, "method")) {
    const auto methods = read_methods(require_key(req, "methods", ""));
    sigma_delta = find_method(methods, read_string(req["method"], "method"), "method").sigma_delta;
    out["sigma_delta_source"] = "method";
  } else {
    ReplicateAssays reps = read_replicates(req["replicates"], "replicates");
    if (has(req, "replicate_ids")) {
      const Json& ids = req["replicate_ids"];
      if (!ids.is_array() || ids.size() != reps.groups.size()) {
        throw ValidationError("replicate_ids", "replicate_ids must parallel replicates");
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        reps.sample_ids[i] = read_string(ids[i], "replicate_ids[" + std::to_string(i) + "]");
      }
    }
    const AssayErrorEstimate est = assay_error_from_replicates(reps, read_aggregation(req));
    sigma_delta = est.sigma_delta;
    for (const auto& w : est.warnings) warnings.push_back(w);
    assay_error = to_json(est);
    assay_error.erase("warnings");
    out["sigma_delta_source"] = "replicates";
  }
  out["sigma_delta"] = number(sigma_delta);
  if (!assay_error.is_null()) out["assay_error"] = std::move(assay_error);

  OrderedJson estimates = OrderedJson::array();
  for (std::size_t i = 0; i < plots.size(); ++i) {
    const auto& p = plots[i];
    estimates.push_back(to_json(confidence_interval(p, sigma_delta, alpha, df)));
    if (p.n % p.k() != 0) {
      warnings.push_back(design_warning(p.plot_id.empty() ? "composites[" + std::to_string(i) + "]"
                                                          : "plot " + p.plot_id,
                                        p.n, p.k()));
    }
  }
  out["estimates"] = std::move(estimates);
  out["warnings"] = std::move(warnings);
  return out;
}

std::uint64_t read_u64(const Json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const std::int64_t x = read_count(v, field);
  if (x < 0) throw ValidationError(field, field + " must be nonnegative");
  return static_cast<std::uint64_t>(x);
}

OrderedJson op_diff(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"composites1", "composites2", "sigma_delta", "sigma_delta1",
                                   "sigma_delta2", "alpha", "df", "permutations", "seed"}));
  const CompositeAssays c1 = read_composites(require_key(req, "composites1", ""), "composites1");
  const CompositeAssays c2 = read_composites(require_key(req, "composites2", ""), "composites2");
  auto sigma = [&](const char* specific) {
    if (has(req, specific)) return read_sigma_delta(req[specific], specific);
    return read_sigma_delta(require_key(req, "sigma_delta", ""), "sigma_delta");
  };
  const double sd1 = sigma("sigma_delta1");
  const double sd2 = sigma("sigma_delta2");
  const std::uint64_t perms = has(req, "permutations") ? read_u64(req["permutations"], "permutations")
                                                       : 10'000;
  if (perms > 10'000'000) {
    throw ValidationError("permutations", "permutations must not exceed 10000000");
  }
  const std::uint64_t seed = has(req, "seed") ? read_u64(req["seed"], "seed") : 1;

  DifferenceReport r = difference_estimate(c1, c2, sd1, sd2, read_alpha(req), read_df(req));
  const PermutationResult perm = permutation_test(c1.values, c2.values, perms, seed);
  r.p_value = perm.p_value;
  r.p_value_exact = perm.exact;
  r.permutations = perm.permutations;

  OrderedJson out = response();
  out["plot_id1"] = c1.plot_id;
  out["plot_id2"] = c2.plot_id;
  merge(out, to_json(r));
  out["seed"] = seed;
  return out;
}

OrderedJson op_simulate(const Json& req, const ServiceLimits& limits) {
  check_keys(req, with_study_keys({"method"}));
  const PlotParameters plot = read_plot(require_key(req, "plot", ""));
  const auto methods = read_methods(require_key(req, "methods", ""));
  const SimulationSettings sim =
      read_simulation(has(req, "simulation") ? req["simulation"] : Json::object());

  std::string name = methods.front().name;
  std::string field = "methods[0]";
  if (has(req, "method")) {
    name = read_string(req["method"], "method");
    field = "method";
  } else if (!sim.method.empty()) {
    name = sim.method;
    field = "simulation.method";
  }
  const AssayMethod& method = find_method(methods, name, field);

  if (limits.max_reps && sim.reps > *limits.max_reps) {
    throw LimitExceededError("simulation.reps " + std::to_string(sim.reps) + " exceeds the cap of " +
                             std::to_string(*limits.max_reps) + "; run larger experiments locally");
  }

  ExperimentConfig cfg;
  cfg.plot = plot;
  cfg.grid_rows = sim.grid_rows;
  cfg.grid_cols = sim.grid_cols;
  cfg.texture_seed = sim.texture_seed;
  cfg.texture = sim.texture;
  cfg.correlation = sim.spatial_correlation;
  cfg.design = Design{sim.n, sim.k};
  cfg.error = AssayErrorModel{sim.error_model, method.sigma_delta};
  cfg.compositing = sim.compositing;
  cfg.reps = sim.reps;
  cfg.seed = sim.seed;
  cfg.alpha = sim.alpha;
  if (limits.time_budget) cfg.deadline = std::chrono::steady_clock::now() + *limits.time_budget;

  OrderedJson out = response();
  out["method"] = method.name;
  out["seed"] = sim.seed;
  merge(out, to_json(run_survey_experiment(cfg)));
  return out;
}

OrderedJson op_stock(const Json& req, const ServiceLimits&) {
  check_keys(req, with_study_keys({"mu"}));
  const StockGeometry geom = read_geometry(require_key(req, "geometry", ""));
  double mu = 0.0;
  if (has(req, "mu")) {
    mu = read_number(req["mu"], "mu");
  } else {
    mu = read_plot(require_key(req, "plot", "")).mu;
  }
  const double grams = stock_from_concentration(geom, mu);
  OrderedJson out = response();
  out["depth_m"] = number(geom.depth_m);
  out["area_m2"] = number(geom.area_m2);
  out["bulk_density"] = number(geom.bulk_density);
  out["mu"] = number(mu);
  out["stock_g"] = number(grams);
  out["stock_t"] = number(grams / 1e6);
  out["stock_t_per_ha"] = number(grams / 1e6 / (geom.area_m2 / 1e4));
  return out;
}

OrderedJson op_path_length(const Json& req, const ServiceLimits&) {
  check_keys(req, {"schema_version", "n", "area_m2", "width_m", "height_m", "beta"});
  const std::int64_t n = read_count(require_key(req, "n", ""), "n");
  const bool has_sides = has(req, "width_m") || has(req, "height_m");
  double width = 0.0, height = 0.0, area = 0.0;
  if (has_sides) {
    width = read_number(require_key(req, "width_m", ""), "width_m");
    height = read_number(require_key(req, "height_m", ""), "height_m");
    if (!(width > 0.0 && height > 0.0)) {
      throw ValidationError("width_m", "plot sides must be strictly positive");
    }
    area = has(req, "area_m2") ? read_number(req["area_m2"], "area_m2") : width * height;
  } else {
    area = read_number(require_key(req, "area_m2", ""), "area_m2");
    if (!(area > 0.0)) throw ValidationError("area_m2", "area_m2 must be strictly positive");
    width = height = std::sqrt(area);
  }
  const double beta = has(req, "beta") ? read_number(req["beta"], "beta") : kBetaRounded;
  const double path = expected_shortest_path(n, area, beta);
  const double transect = transect_length(width, height);

  OrderedJson out = response();
  out["n"] = n;
  out["area_m2"] = number(area);
  out["width_m"] = number(width);
  out["height_m"] = number(height);
  out["beta"] = number(beta);
  out["expected_path_m"] = number(path);
  out["transect_m"] = number(transect);
  out["transect_to_path_ratio"] = number(transect / path);
  return out;
}

OrderedJson op_tables(const Json& req, const ServiceLimits&) {
  check_keys(req, {"schema_version", "studies", "cost_cores", "fixed_n", "budgets", "reference"});
  const Json& raw = require_key(req, "studies", "");
  if (!raw.is_array() || raw.empty()) {
    throw ValidationError("studies", "studies must be a nonempty array of study configurations");
  }
  std::vector<StudyConfig> studies;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::string prefix = "studies[" + std::to_string(i) + "]";
    try {
      studies.push_back(parse_config(raw[i]));
    } catch (const ValidationError& e) {
      throw ValidationError(prefix + "." + e.field(), e.what());
    }
    const std::string& label = studies.back().plot.label;
    labels.push_back(label.empty() ? "study" + std::to_string(i + 1) : label);
  }

  std::vector<double> cost_cores = {5.0, 20.0, 40.0};
  if (has(req, "cost_cores")) {
    cost_cores = read_number_array(req["cost_cores"], "cost_cores");
    if (cost_cores.empty()) throw ValidationError("cost_cores", "cost_cores must not be empty");
  }
  const std::int64_t fixed_n = has(req, "fixed_n") ? read_count(req["fixed_n"], "fixed_n") : 100;
  if (fixed_n < 1 || fixed_n > 100'000) {
    throw ValidationError("fixed_n", "fixed_n must lie in [1, 100000]");
  }
  std::vector<double> budgets;
  if (has(req, "budgets")) {
    budgets = read_number_array(req["budgets"], "budgets");
    if (budgets.empty()) throw ValidationError("budgets", "budgets must not be empty");
  } else {
    for (int b = 250; b <= 5000; b += 250) budgets.push_back(b);
  }
  const std::string reference = has(req, "reference") ? read_string(req["reference"], "reference")
                                                      : studies.front().methods.front().name;

  std::vector<std::int64_t> k_grid;
  for (std::int64_t k = 1; k <= fixed_n; ++k) k_grid.push_back(k);

  OrderedJson composite_sizes = OrderedJson::array();
  OrderedJson relative_efficiencies = OrderedJson::array();
  OrderedJson se_tradeoff = OrderedJson::array();
  OrderedJson budget_curves = OrderedJson::array();
  for (std::size_t s = 0; s < studies.size(); ++s) {
    const StudyConfig& st = studies[s];
    const AssayMethod& ref = find_method(st.methods, reference, "reference");
    for (std::size_t c = 0; c < cost_cores.size(); ++c) {
      const CostModel costs = validate_costs(CostModel{st.costs.cost_fixed, cost_cores[c]},
                                             "cost_cores[" + std::to_string(c) + "]");
      for (const auto& m : st.methods) {
        OrderedJson row{{"study", labels[s]}, {"method", m.name}, {"cost_core", number(costs.cost_core)}};
        merge(row, to_json(optimal_composite_size(st.plot, m, costs)));
        composite_sizes.push_back(std::move(row));
      }
      for (const auto& m : st.methods) {
        if (m.name == ref.name) continue;
        relative_efficiencies.push_back(OrderedJson{{"study", labels[s]},
                                     {"cost_core", number(costs.cost_core)},
                                     {"reference", ref.name},
                                     {"method", m.name},
                                     {"relative_efficiency",
                                      number(relative_efficiency(st.plot, ref, m, costs))}});
      }
      OrderedJson series = OrderedJson::array();
      for (const auto& cs : se_budget_curve(st.plot, st.methods, costs, budgets)) {
        series.push_back(OrderedJson{{"name", cs.name}, {"points", points_json(cs.points, false)}});
      }
      budget_curves.push_back(OrderedJson{{"study", labels[s]},
                                  {"cost_core", number(costs.cost_core)},
                                  {"series", std::move(series)}});
    }
    for (const auto& m : st.methods) {
      se_tradeoff.push_back(OrderedJson{
          {"study", labels[s]},
          {"method", m.name},
          {"n", fixed_n},
          {"cost_core", number(st.costs.cost_core)},
          {"points", points_json(tradeoff_curve(st.plot, m, st.costs, fixed_n, k_grid), false)}});
    }
  }

  OrderedJson out = response();
  OrderedJson cc = OrderedJson::array();
  for (double v : cost_cores) cc.push_back(number(v));
  out["cost_cores"] = std::move(cc);
  out["reference"] = reference;
  out["composite_sizes"] = std::move(composite_sizes);
  out["relative_efficiencies"] = std::move(relative_efficiencies);
  out["se_tradeoff"] = std::move(se_tradeoff);
  out["se_vs_budget"] = std::move(budget_curves);
  return out;
}

OrderedJson op_health(const Json& req, const ServiceLimits&) {
  check_keys(req, {"schema_version"});
  OrderedJson out = response();
  out["status"] = "ok";
  return out;
}

using Handler = OrderedJson (*)(const Json&, const ServiceLimits&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"optimize", op_optimize},         {"min-cost", op_min_cost},
      {"composite-size", op_composite_size}, {"efficiency", op_efficiency},
      {"curves", op_curves},             {"estimate", op_estimate},
      {"diff", op_diff},                 {"simulate", op_simulate},
      {"stock", op_stock},               {"path-length", op_path_length},
      {"tables", op_tables},             {"health", op_health},
  };
  return table;
}

// ---- rendering -------------------------------------------------------------

std::string scalar_text(const OrderedJson& v, bool compact) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) {
    if (!compact) return format_number(v.get<double>());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

bool is_scalar(const OrderedJson& v) { return !v.is_object() && !v.is_array(); }

// Scalar leaves of an object as (dotted key, value); arrays are skipped.
void flatten(const OrderedJson& obj, const std::string& prefix,
             std::vector<std::pair<std::string, const OrderedJson*>>& out) {
  for (const auto& [key, value] : obj.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, out);
    } else if (!value.is_array()) {
      out.emplace_back(name, &value);
    }
  }
}

Table rows_table(const OrderedJson& rows, const std::vector<std::pair<std::string, std::string>>& lead,
                 bool compact) {
  Table t;
  for (const auto& [name, value] : lead) t.header.push_back(name);
  bool header_done = false;
  for (const auto& row : rows) {
    std::vector<std::pair<std::string, const OrderedJson*>> cells;
    flatten(row, "", cells);
    if (!header_done) {
      for (const auto& [name, value] : cells) t.header.push_back(name);
      header_done = true;
    }
    std::vector<std::string> line;
    for (const auto& [name, value] : lead) line.push_back(value);
    for (const auto& [name, value] : cells) line.push_back(scalar_text(*value, compact));
    t.rows.push_back(std::move(line));
  }
  return t;
}

Table scalar_row(const OrderedJson& obj, bool compact) {
  Table t;
  std::vector<std::pair<std::string, const OrderedJson*>> cells;
  flatten(obj, "", cells);
  std::vector<std::string> line;
  for (const auto& [name, value] : cells) {
    t.header.push_back(name);
    line.push_back(scalar_text(*value, compact));
  }
  t.rows.push_back(std::move(line));
  return t;
}

void append_rows(Table& into, Table&& more) {
  if (into.header.empty()) into.header = std::move(more.header);
  for (auto& r : more.rows) into.rows.push_back(std::move(r));
}

// Curves of a series list; a series column is added when there are several.
Table series_table(const OrderedJson& series, std::vector<std::pair<std::string, std::string>> lead,
                   bool compact, bool force_series_column) {
  Table t;
  const bool named = force_series_column || series.size() > 1;
  for (const auto& s : series) {
    auto l = lead;
    if (named) l.emplace_back("series", s["name"].get<std::string>());
    append_rows(t, rows_table(s["points"], l, compact));
  }
  if (t.header.empty()) t.header = {"abscissa", "se", "cv", "cost"};
  return t;
}

std::vector<std::pair<std::string, Table>> tables_sections(const OrderedJson& r, bool compact) {
  std::vector<std::pair<std::string, Table>> out;
  out.emplace_back("composite_sizes", rows_table(r["composite_sizes"], {}, compact));
  out.emplace_back("relative_efficiencies", rows_table(r["relative_efficiencies"], {}, compact));
  Table se_tradeoff;
  for (const auto& f : r["se_tradeoff"]) {
    append_rows(se_tradeoff, rows_table(f["points"],
                                 {{"study", f["study"].get<std::string>()},
                                  {"method", f["method"].get<std::string>()},
                                  {"n", scalar_text(f["n"], compact)}},
                                 compact));
  }
  out.emplace_back("se_tradeoff", std::move(se_tradeoff));
  Table budget_curves;
  for (const auto& f : r["se_vs_budget"]) {
    append_rows(budget_curves, series_table(f["series"],
                                    {{"study", f["study"].get<std::string>()},
                                     {"cost_core", scalar_text(f["cost_core"], compact)}},
                                    compact, true));
  }
  out.emplace_back("se_vs_budget", std::move(budget_curves));
  return out;
}

// The main table of a response, for CSV output.
Table main_table(std::string_view op, const OrderedJson& r, bool compact) {
  if (op == "optimize" || op == "min-cost") {
    Table t = rows_table(r["results"], {{"problem", r["problem"].get<std::string>()}}, compact);
    if (r.contains("precision")) {
      append_rows(t, rows_table(r["precision"]["results"], {{"problem", "precision"}}, compact));
    }
    return t;
  }
  if (op == "composite-size") return rows_table(r["results"], {}, compact);
  if (op == "curves") return series_table(r["series"], {}, compact, false);
  if (op == "estimate") return rows_table(r["estimates"], {}, compact);
  OrderedJson scalars = r;
  scalars.erase("claims");
  return scalar_row(scalars, compact);
}

std::string text_table(const Table& t, const std::string& indent) {
  std::vector<std::size_t> width(t.header.size(), 0);
  for (std::size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size();
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l = indent;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) l += "  ";
      l += cells[c];
      if (c + 1 < cells.size()) l.append(width[c] - cells[c].size(), ' ');
    }
    out += l + "\n";
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out;
}

bool flat_objects(const OrderedJson& arr) {
  if (arr.empty()) return false;
  for (const auto& e : arr) {
    if (!e.is_object()) return false;
    for (const auto& [k, v] : e.items()) {
      if (v.is_array() && !v.empty() && v.front().is_object()) return false;
    }
  }
  return true;
}

void text_object(const OrderedJson& obj, const std::string& indent, std::string& out) {
  for (const auto& [key, value] : obj.items()) {
    // Warnings reach standard error through the caller.
    if (key == "schema_version" || key == "warnings") continue;
    if (is_scalar(value)) {
      out += indent + key + ": " + scalar_text(value, true) + "\n";
    } else if (value.is_object()) {
      out += indent + key + ":\n";
      text_object(value, indent + "  ", out);
    } else if (value.empty()) {
      out += indent + key + ": (none)\n";
    } else if (flat_objects(value)) {
      out += indent + key + ":\n" + text_table(rows_table(value, {}, true), indent + "  ");
    } else if (value.front().is_object()) {
      out += indent + key + ":\n";
      for (const auto& e : value) {
        out += indent + "  -\n";
        text_object(e, indent + "    ", out);
      }
    } else {
      std::string joined;
      for (const auto& e : value) {
        joined += (joined.empty() ? "" : ", ") + scalar_text(e, true);
      }
      out += indent + key + ": " + joined + "\n";
    }
  }
}

}  // namespace

ServiceLimits http_limits() { return ServiceLimits{100'000, std::chrono::milliseconds(10'000)}; }

const std::vector<std::string>& operations() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, handler] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

bool is_operation(std::string_view op) {
  const auto& ops = operations();
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

OrderedJson execute(std::string_view op, const Json& request, const ServiceLimits& limits) {
  if (!request.is_object()) throw ValidationError("$", "request must be a JSON object");
  for (const auto& [name, handler] : handlers()) {
    if (name == op) return handler(request, limits);
  }
  throw ValidationError("op", "unknown operation '" + std::string(op) + "'");
}

OrderedJson execute(std::string_view op, std::string_view request_text,
                    const ServiceLimits& limits) {
  return execute(op, parse_json_text(request_text), limits);
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "text") return OutputFormat::kText;
  if (name == "json") return OutputFormat::kJson;
  if (name == "csv") return OutputFormat::kCsv;
  throw ValidationError("output", "output must be text, json or csv");
}

std::string render(std::string_view op, const OrderedJson& r, OutputFormat format) {
  if (format == OutputFormat::kJson) return emit_json(r);
  if (op == "tables") {
    std::string out;
    for (const auto& [name, table] : tables_sections(r, format == OutputFormat::kText)) {
      if (!out.empty()) out += "\n";
      if (format == OutputFormat::kCsv) {
        out += "# " + name + "\n" + emit_csv(table);
      } else {
        out += name + "\n" + text_table(table, "  ");
      }
    }
    return out;
  }
  if (format == OutputFormat::kCsv) return emit_csv(main_table(op, r, false));
  std::string out;
  text_object(r, "", out);
  return out;
}

ErrorInfo classify(std::exception_ptr error) {
  ErrorInfo info;
  try {
    std::rethrow_exception(error);
  } catch (const MalformedJsonError& e) {
    info = {ErrorKind::kMalformed, "malformed_json", e.what(), ""};
  } catch (const ValidationError& e) {
    info = {ErrorKind::kValidation, "validation_error", e.what(), e.field()};
  } catch (const InfeasibleError& e) {
    info = {ErrorKind::kInfeasible, "infeasible", e.what(), e.constraint()};
  } catch (const LimitExceededError& e) {
    info = {ErrorKind::kLimit, "limit_exceeded", e.what(), ""};
  } catch (const std::bad_alloc&) {
    info = {ErrorKind::kInternal, "internal_error", "out of memory", ""};
  } catch (const std::exception& e) {
    info = {ErrorKind::kInternal, "internal_error", e.what(), ""};
  } catch (...) {
    info = {ErrorKind::kInternal, "internal_error", "unknown error", ""};
  }
  return info;
}

OrderedJson error_envelope(const ErrorInfo& info) {
  OrderedJson j;
  j["schema_version"] = kSchemaVersion;
  j["code"] = info.code;
  j["message"] = info.message;
  j["field_path"] = info.field_path.empty() ? OrderedJson(nullptr) : OrderedJson(info.field_path);
  return j;
}

}  // namespace socplan
