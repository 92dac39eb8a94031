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

// socplan: command-line front end. Every subcommand turns its flags (and an
// optional --config file) into a JSON request and hands it to the library.
//
// Exit codes: 0 success, 1 internal error, 2 validation or parse error,
// 3 infeasible problem.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "socplan/socplan.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInfeasible = 3;

// Raised for problems detected in the tool itself (bad files, conflicting
// flags); maps to exit code 2.
struct UsageError {
  std::string message;
};

int exit_code(socplan_status s) {
  switch (s) {
    case SOCPLAN_OK:
      return kExitOk;
    case SOCPLAN_ERR_INFEASIBLE:
      return kExitInfeasible;
    case SOCPLAN_ERR_INVALID:
    case SOCPLAN_ERR_MALFORMED:
    case SOCPLAN_ERR_LIMIT:
    case SOCPLAN_ERR_NULL_ARG:
      return kExitInvalid;
    case SOCPLAN_ERR_INTERNAL:
      break;
  }
  return kExitInternal;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError{"cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_config(const std::string& path) {
  const std::string text = read_file(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw UsageError{path + ": malformed JSON"};
  if (!doc.is_object()) throw UsageError{path + ": configuration must be a JSON object"};
  return doc;
}

// Parses a CSV through the library and returns its JSON form. Warnings go to
// standard error.
json read_dataset(const char* kind, const std::string& path) {
  const std::string bytes = read_file(path);
  socplan_dataset* ds = nullptr;
  const socplan_status s =
      socplan_dataset_parse_csv(kind, bytes.data(), bytes.size(), path.c_str(), &ds);
  if (s != SOCPLAN_OK) throw UsageError{path + ": " + socplan_last_error()};
  for (size_t i = 0; i < socplan_dataset_warning_count(ds); ++i) {
    std::cerr << "warning: " << path << ": " << socplan_dataset_warning(ds, i) << "\n";
  }
  socplan_buffer* buf = nullptr;
  const socplan_status t = socplan_dataset_to_json(ds, &buf);
  socplan_dataset_free(ds);
  if (t != SOCPLAN_OK) throw UsageError{path + ": " + socplan_last_error()};
  json doc = json::parse(std::string(socplan_buffer_data(buf), socplan_buffer_size(buf)));
  socplan_buffer_free(buf);
  return doc;
}

// Options shared by the study-based subcommands.
struct StudyFlags {
  std::string config;
  std::optional<double> mu, sigma_p, cost_fixed, cost_core;
  std::optional<double> sigma_delta, cost_prep, cost_assay;
  std::string method;
  std::vector<std::string> add_methods;

  void add(CLI::App* app, bool method_flags) {
    app->add_option("--config", config, "Study configuration (JSON)")->check(CLI::ExistingFile);
    app->add_option("--mu", mu, "Plot mean concentration (%SOC)");
    app->add_option("--sigma-p", sigma_p, "Plot heterogeneity SD (%SOC)");
    app->add_option("--cost-fixed", cost_fixed, "Fixed survey cost");
    app->add_option("--cost-core", cost_core, "Cost per core");
    app->add_option("--method", method, "Assay method name");
    app->add_option("--add-method", add_methods,
                    "Extra method as name:sigma_delta:cost_prep:cost_assay (repeatable)");
    if (method_flags) {
      app->add_option("--sigma-delta", sigma_delta, "Assay error SD (relative)");
      app->add_option("--cost-prep", cost_prep, "Sample preparation cost per assay");
      app->add_option("--cost-assay", cost_assay, "Assay cost per sample");
    }
  }

  json base() const { return config.empty() ? json::object() : read_config(config); }

  void apply(json& req) const {
    if (mu) req["plot"]["mu"] = *mu;
    if (sigma_p) req["plot"]["sigma_p"] = *sigma_p;
    if (cost_fixed) req["costs"]["cost_fixed"] = *cost_fixed;
    if (cost_core) req["costs"]["cost_core"] = *cost_core;

    if (!req.contains("methods") || !req["methods"].is_array()) {
      if (!req.contains("methods")) req["methods"] = json::array();
    }
    for (const auto& spec : add_methods) req["methods"].push_back(parse_method_spec(spec));

    if (sigma_delta || cost_prep || cost_assay) {
      json& methods = req["methods"];
      if (!methods.is_array()) throw UsageError{"methods in the configuration is not an array"};
      json* target = nullptr;
      if (!method.empty()) {
        for (auto& m : methods) {
          if (m.is_object() && m.value("name", "") == method) target = &m;
        }
        if (target == nullptr) {
          methods.push_back(json{{"name", method}});
          target = &methods.back();
        }
      } else if (methods.empty()) {
        methods.push_back(json{{"name", "method"}});
        target = &methods.back();
      } else if (methods.size() == 1) {
        target = &methods.front();
      } else {
        throw UsageError{"--sigma-delta, --cost-prep and --cost-assay need --method when "
                         "the configuration lists several methods"};
      }
      if (sigma_delta) (*target)["sigma_delta"] = *sigma_delta;
      if (cost_prep) (*target)["cost_prep"] = *cost_prep;
      if (cost_assay) (*target)["cost_assay"] = *cost_assay;
    }
    if (req["methods"].is_array() && req["methods"].empty()) req.erase("methods");
    if (!method.empty()) req["method"] = method;
  }

  static json parse_method_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 4 || parts[0].empty()) {
      throw UsageError{"--add-method expects name:sigma_delta:cost_prep:cost_assay, got '" + spec +
                       "'"};
    }
    json m{{"name", parts[0]}};
    const char* keys[] = {"sigma_delta", "cost_prep", "cost_assay"};
    for (int i = 0; i < 3; ++i) {
      try {
        size_t used = 0;
        const double v = std::stod(parts[i + 1], &used);
        if (used != parts[i + 1].size()) throw std::invalid_argument("trailing");
        m[keys[i]] = v;
      } catch (const std::exception&) {
        throw UsageError{"--add-method: '" + parts[i + 1] + "' is not a number"};
      }
    }
    return m;
  }
};

struct Invocation {
  std::string op;
  json request;
};

socplan_format format_of(const std::string& name) {
  if (name == "json") return SOCPLAN_FORMAT_JSON;
  if (name == "csv") return SOCPLAN_FORMAT_CSV;
  return SOCPLAN_FORMAT_TEXT;
}

int run_request(const Invocation& inv, const std::string& output) {
  const std::string body = inv.request.dump();
  socplan_buffer* buf = nullptr;
  const socplan_status s =
      socplan_execute(inv.op.c_str(), body.data(), body.size(), SOCPLAN_FORMAT_JSON, &buf);
  if (s != SOCPLAN_OK) {
    const std::string field = socplan_last_error_field();
    std::cerr << "error: " << socplan_last_error();
    if (!field.empty()) std::cerr << " [" << field << "]";
    std::cerr << "\n";
    if (output == "json" && buf != nullptr) {
      std::fwrite(socplan_buffer_data(buf), 1, socplan_buffer_size(buf), stdout);
    }
    socplan_buffer_free(buf);
    return exit_code(s);
  }
  const std::string response(socplan_buffer_data(buf), socplan_buffer_size(buf));
  socplan_buffer_free(buf);

  const json parsed = json::parse(response);
  if (parsed.contains("warnings")) {
    for (const auto& w : parsed["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  }

  if (output == "json") {
    std::fwrite(response.data(), 1, response.size(), stdout);
    return kExitOk;
  }
  socplan_buffer* rendered = nullptr;
  const socplan_status r = socplan_render(inv.op.c_str(), response.data(), response.size(),
                                          format_of(output), &rendered);
  if (r != SOCPLAN_OK) {
    std::cerr << "error: " << socplan_last_error() << "\n";
    return exit_code(r);
  }
  std::fwrite(socplan_buffer_data(rendered), 1, socplan_buffer_size(rendered), stdout);
  socplan_buffer_free(rendered);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survey design and estimation for composited soil organic carbon assays", "socplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(socplan_version()));

  std::string output = "text";
  auto add_output = [&output](CLI::App* sub) {
    sub->add_option("--output", output, "Output format")
        ->check(CLI::IsMember({"text", "json", "csv"}));
  };

  // optimize / min-cost
  StudyFlags opt_flags;
  std::optional<double> budget, target_se, target_variance;
  auto add_targets = [&](CLI::App* sub) {
    auto* se = sub->add_option("--target-se", target_se, "Maximum standard error (%SOC)");
    auto* var = sub->add_option("--target-variance", target_variance, "Maximum variance (%SOC^2)");
    se->excludes(var);
  };
  auto* optimize = app.add_subcommand("optimize", "Minimum-variance design under a budget");
  opt_flags.add(optimize, true);
  optimize->add_option("--budget", budget, "Total budget");
  add_targets(optimize);
  add_output(optimize);

  StudyFlags mc_flags;
  auto* min_cost = app.add_subcommand("min-cost", "Cheapest design meeting a precision target");
  mc_flags.add(min_cost, true);
  add_targets(min_cost);
  add_output(min_cost);

  StudyFlags cs_flags;
  std::vector<double> cost_cores;
  auto* comp_size = app.add_subcommand("composite-size", "Optimal number of cores per composite");
  cs_flags.add(comp_size, true);
  comp_size->add_option("--cost-cores", cost_cores, "Grid of per-core costs")->delimiter(',');
  add_output(comp_size);

  StudyFlags eff_flags;
  std::string method1, method2;
  auto* efficiency = app.add_subcommand("efficiency", "Relative efficiency of two assay methods");
  eff_flags.add(efficiency, false);
  efficiency->add_option("--method1", method1, "Numerator method name");
  efficiency->add_option("--method2", method2, "Denominator method name");
  add_output(efficiency);

  StudyFlags curve_flags;
  std::vector<double> budgets;
  std::optional<long long> fixed_n;
  std::vector<long long> k_grid;
  bool cv = false;
  auto* curves = app.add_subcommand("curves", "SE-versus-budget or trade-off curves");
  curve_flags.add(curves, true);
  auto* budgets_opt = curves->add_option("--budgets", budgets, "Budgets")->delimiter(',');
  auto* fixed_opt = curves->add_option("--fixed-n", fixed_n, "Fixed number of cores");
  curves->add_option("--k-grid", k_grid, "Numbers of assays for --fixed-n")->delimiter(',');
  curves->add_flag("--cv", cv, "Report coefficients of variation instead of SEs");
  budgets_opt->excludes(fixed_opt);
  add_output(curves);

  std::string est_config, composites_file, replicates_file, est_method, aggregation;
  std::optional<double> est_sigma, alpha, df;
  auto* estimate = app.add_subcommand("estimate", "Mean, SE and confidence interval from assays");
  estimate->add_option("--config", est_config, "Study configuration (JSON)")
      ->check(CLI::ExistingFile);
  estimate->add_option("--composites", composites_file, "Composite assay CSV")->required();
  auto* rep_opt = estimate->add_option("--replicates", replicates_file, "Replicate assay CSV");
  auto* sd_opt = estimate->add_option("--sigma-delta", est_sigma, "Known assay error SD");
  estimate->add_option("--method", est_method, "Take the assay error from a configured method");
  estimate->add_option("--aggregation", aggregation, "Replicate aggregation")
      ->check(CLI::IsMember({"median", "mean"}));
  estimate->add_option("--alpha", alpha, "Two-sided error rate of the interval");
  estimate->add_option("--df", df, "Override the t degrees of freedom");
  rep_opt->excludes(sd_opt);
  add_output(estimate);

  std::vector<std::string> diff_files;
  std::optional<double> sd_both, sd1, sd2;
  std::optional<unsigned long long> permutations, seed;
  auto* diff = app.add_subcommand("diff", "Difference of two plot means with a permutation test");
  diff->add_option("files", diff_files, "Two composite assay CSV files")->expected(2)->required();
  diff->add_option("--sigma-delta", sd_both, "Assay error SD for both files");
  diff->add_option("--sigma-delta1", sd1, "Assay error SD for the first file");
  diff->add_option("--sigma-delta2", sd2, "Assay error SD for the second file");
  diff->add_option("--permutations", permutations, "Monte Carlo permutations");
  diff->add_option("--seed", seed, "Permutation seed");
  diff->add_option("--alpha", alpha, "Two-sided error rate of the interval");
  diff->add_option("--df", df, "Override the t degrees of freedom");
  add_output(diff);

  StudyFlags sim_flags;
  std::optional<long long> reps, sim_n, sim_k, texture_seed, grid_rows, grid_cols;
  std::optional<unsigned long long> sim_seed;
  std::string error_model, compositing, texture, correlation;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the variance model");
  sim_flags.add(simulate, true);
  simulate->add_option("--reps", reps, "Replications");
  simulate->add_option("--seed", sim_seed, "Master seed");
  simulate->add_option("--n", sim_n, "Cores per survey");
  simulate->add_option("--k", sim_k, "Composites per survey");
  simulate->add_option("--error-model", error_model, "Assay error distribution")
      ->check(CLI::IsMember({"gamma", "lognormal"}));
  simulate->add_option("--compositing", compositing, "Compositing strategy")
      ->check(CLI::IsMember({"random", "adjacent"}));
  simulate->add_option("--texture", texture, "Field value distribution")
      ->check(CLI::IsMember({"auto", "gaussian", "uniform", "two_point"}));
  simulate->add_option("--spatial-correlation", correlation, "Field layout")
      ->check(CLI::IsMember({"none", "smooth_gradient"}));
  simulate->add_option("--texture-seed", texture_seed, "Field seed");
  simulate->add_option("--grid-rows", grid_rows, "Field rows");
  simulate->add_option("--grid-cols", grid_cols, "Field columns");
  add_output(simulate);

  std::string stock_config;
  std::optional<double> depth, area, density, stock_mu;
  auto* stock = app.add_subcommand("stock", "SOC stock from a mean concentration");
  stock->add_option("--config", stock_config, "Study configuration (JSON)")
      ->check(CLI::ExistingFile);
  stock->add_option("--depth", depth, "Depth (m)");
  stock->add_option("--area", area, "Area (m^2)");
  stock->add_option("--density", density, "Bulk density (g/cm^3)");
  stock->add_option("--mu", stock_mu, "Mean concentration (%SOC)");
  add_output(stock);

  std::optional<long long> path_n;
  std::optional<double> path_area, width, height, beta;
  auto* path = app.add_subcommand("path-length", "Expected walking distance through n cores");
  path->add_option("--n", path_n, "Number of cores")->required();
  path->add_option("--area", path_area, "Plot area (m^2)");
  path->add_option("--width", width, "Plot width (m)");
  path->add_option("--height", height, "Plot height (m)");
  path->add_option("--beta", beta, "Shortest-path constant");
  add_output(path);

  std::vector<std::string> table_configs;
  std::vector<double> table_cost_cores, table_budgets;
  std::optional<long long> table_n;
  std::string reference;
  auto* tables = app.add_subcommand("tables", "Composite-size and efficiency tables, curve data");
  tables->add_option("--config", table_configs, "Study configurations (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  tables->add_option("--cost-cores", table_cost_cores, "Per-core costs")->delimiter(',');
  tables->add_option("--budgets", table_budgets, "Budgets for the SE curves")->delimiter(',');
  tables->add_option("--fixed-n", table_n, "Cores for the trade-off curve");
  tables->add_option("--reference", reference, "Reference method for efficiencies");
  add_output(tables);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    CLI::App* failing = &app;
    for (CLI::App* sub : app.get_subcommands()) failing = sub;
    std::cerr << "error: " << e.what() << "\n\n" << failing->help();
    return kExitInvalid;
  }

  try {
    Invocation inv;
    auto set = [](json& obj, const char* key, const auto& value) {
      if (value) obj[key] = *value;
    };
    auto targets = [&](json& req) {
      if (target_se) req["target"] = json{{"max_se", *target_se}};
      if (target_variance) req["target"] = json{{"max_variance", *target_variance}};
    };

    if (optimize->parsed()) {
      inv.op = "optimize";
      inv.request = opt_flags.base();
      opt_flags.apply(inv.request);
      set(inv.request, "budget", budget);
      targets(inv.request);
    } else if (min_cost->parsed()) {
      inv.op = "min-cost";
      inv.request = mc_flags.base();
      mc_flags.apply(inv.request);
      targets(inv.request);
    } else if (comp_size->parsed()) {
      inv.op = "composite-size";
      inv.request = cs_flags.base();
      cs_flags.apply(inv.request);
      if (!cost_cores.empty()) inv.request["cost_cores"] = cost_cores;
    } else if (efficiency->parsed()) {
      inv.op = "efficiency";
      inv.request = eff_flags.base();
      eff_flags.apply(inv.request);
      inv.request.erase("method");
      if (!method1.empty()) inv.request["method1"] = method1;
      if (!method2.empty()) inv.request["method2"] = method2;
    } else if (curves->parsed()) {
      inv.op = "curves";
      inv.request = curve_flags.base();
      curve_flags.apply(inv.request);
      if (!budgets.empty()) inv.request["budgets"] = budgets;
      set(inv.request, "fixed_n", fixed_n);
      if (!k_grid.empty()) inv.request["k_grid"] = k_grid;
      if (cv) inv.request["cv"] = true;
    } else if (estimate->parsed()) {
      inv.op = "estimate";
      json& req = inv.request;
      req = est_config.empty() ? json::object() : read_config(est_config);
      req["composites"] = read_dataset("composites", composites_file)["composites"];
      if (!replicates_file.empty()) {
        const json reps = read_dataset("replicates", replicates_file);
        req["replicates"] = reps["replicates"];
        req["replicate_ids"] = reps["sample_ids"];
      }
      set(req, "sigma_delta", est_sigma);
      if (!est_method.empty()) req["method"] = est_method;
      set(req, "alpha", alpha);
      set(req, "df", df);
      if (!aggregation.empty()) req["aggregation"] = aggregation;
    } else if (diff->parsed()) {
      inv.op = "diff";
      json& req = inv.request;
      const char* keys[] = {"composites1", "composites2"};
      for (int i = 0; i < 2; ++i) {
        const json plots = read_dataset("composites", diff_files[i])["composites"];
        if (plots.size() != 1) {
          throw UsageError{diff_files[i] + ": expected exactly one plot_id, found " +
                           std::to_string(plots.size())};
        }
        req[keys[i]] = plots.front();
      }
      set(req, "sigma_delta", sd_both);
      set(req, "sigma_delta1", sd1);
      set(req, "sigma_delta2", sd2);
      set(req, "permutations", permutations);
      set(req, "seed", seed);
      set(req, "alpha", alpha);
      set(req, "df", df);
    } else if (simulate->parsed()) {
      inv.op = "simulate";
      inv.request = sim_flags.base();
      sim_flags.apply(inv.request);
      json& s = inv.request["simulation"];
      if (s.is_null()) s = json::object();
      set(s, "reps", reps);
      set(s, "seed", sim_seed);
      set(s, "n", sim_n);
      set(s, "k", sim_k);
      set(s, "texture_seed", texture_seed);
      set(s, "grid_rows", grid_rows);
      set(s, "grid_cols", grid_cols);
      if (!error_model.empty()) s["error_model"] = error_model;
      if (!compositing.empty()) s["compositing"] = compositing;
      if (!texture.empty()) s["texture"] = texture;
      if (!correlation.empty()) s["spatial_correlation"] = correlation;
    } else if (stock->parsed()) {
      inv.op = "stock";
      json& req = inv.request;
      req = stock_config.empty() ? json::object() : read_config(stock_config);
      set(req["geometry"], "depth_m", depth);
      set(req["geometry"], "area_m2", area);
      set(req["geometry"], "bulk_density", density);
      set(req, "mu", stock_mu);
    } else if (path->parsed()) {
      inv.op = "path-length";
      json& req = inv.request;
      req = json::object();
      set(req, "n", path_n);
      set(req, "area_m2", path_area);
      set(req, "width_m", width);
      set(req, "height_m", height);
      set(req, "beta", beta);
    } else if (tables->parsed()) {
      inv.op = "tables";
      json& req = inv.request;
      req = json::object();
      req["studies"] = json::array();
      for (const auto& f : table_configs) req["studies"].push_back(read_config(f));
      if (!table_cost_cores.empty()) req["cost_cores"] = table_cost_cores;
      if (!table_budgets.empty()) req["budgets"] = table_budgets;
      set(req, "fixed_n", table_n);
      if (!reference.empty()) req["reference"] = reference;
    }
    return run_request(inv, output);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
