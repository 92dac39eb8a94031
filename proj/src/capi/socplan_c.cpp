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

#include "socplan/socplan.h"

#include <memory>
#include <string>
#include <thread>

#include "socplan/data_io.hpp"
#include "socplan/design_math.hpp"
#include "socplan/estimation.hpp"
#include "socplan/http_service.hpp"
#include "socplan/service.hpp"

struct socplan_config {
  socplan::StudyConfig config;
};

struct socplan_dataset {
  socplan::AssayDataset dataset;
};

struct socplan_buffer {
  std::string bytes;
};

struct socplan_server {
  std::unique_ptr<socplan::HttpServer> server;
  std::thread thread;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_field;

void clear_error() {
  g_error.clear();
  g_field.clear();
}

socplan_status status_for(socplan::ErrorKind kind) {
  switch (kind) {
    case socplan::ErrorKind::kMalformed:
      return SOCPLAN_ERR_MALFORMED;
    case socplan::ErrorKind::kValidation:
      return SOCPLAN_ERR_INVALID;
    case socplan::ErrorKind::kInfeasible:
      return SOCPLAN_ERR_INFEASIBLE;
    case socplan::ErrorKind::kLimit:
      return SOCPLAN_ERR_LIMIT;
    case socplan::ErrorKind::kInternal:
      break;
  }
  return SOCPLAN_ERR_INTERNAL;
}

socplan_status record(const socplan::ErrorInfo& info) {
  g_error = info.message;
  g_field = info.field_path;
  return status_for(info.kind);
}

socplan_status null_arg(const char* name) {
  g_error = std::string(name) + " is NULL";
  g_field = name;
  return SOCPLAN_ERR_NULL_ARG;
}

// Runs `body`, translating exceptions into a status and the thread-local
// error slots.
template <typename F>
socplan_status guarded(F&& body) {
  clear_error();
  try {
    body();
    return SOCPLAN_OK;
  } catch (...) {
    return record(socplan::classify(std::current_exception()));
  }
}

socplan::PlotParameters to_plot(const socplan_plot* p) {
  return socplan::validate_plot(socplan::PlotParameters{p->mu, p->sigma_p, ""});
}

socplan::AssayMethod to_method(const socplan_method* m, const char* path = "method") {
  return socplan::validate_method(
      socplan::AssayMethod{"method", m->sigma_delta, m->cost_prep, m->cost_assay}, path);
}

socplan::CostModel to_costs(const socplan_costs* c) {
  return socplan::validate_costs(socplan::CostModel{c->cost_fixed, c->cost_core});
}

socplan_boundary to_boundary(socplan::BoundaryCase b) {
  switch (b) {
    case socplan::BoundaryCase::kFullComposite:
      return SOCPLAN_BOUNDARY_FULL_COMPOSITE;
    case socplan::BoundaryCase::kNoComposite:
      return SOCPLAN_BOUNDARY_NO_COMPOSITE;
    case socplan::BoundaryCase::kInterior:
      break;
  }
  return SOCPLAN_BOUNDARY_INTERIOR;
}

void fill(const socplan::OptimalAllocation& a, socplan_allocation* out) {
  out->n_real = a.n_real;
  out->k_real = a.k_real;
  out->boundary = to_boundary(a.boundary);
  out->n = a.n;
  out->k = a.k;
  out->achieved_variance = a.achieved_variance;
  out->achieved_se = a.achieved_se;
  out->total_cost = a.total_cost;
  out->rounded_n = a.rounded.n;
  out->rounded_k = a.rounded.k;
}

socplan_buffer* make_buffer(std::string bytes) {
  auto* b = new socplan_buffer;
  b->bytes = std::move(bytes);
  return b;
}

socplan::OutputFormat to_format(socplan_format f) {
  switch (f) {
    case SOCPLAN_FORMAT_JSON:
      return socplan::OutputFormat::kJson;
    case SOCPLAN_FORMAT_CSV:
      return socplan::OutputFormat::kCsv;
    case SOCPLAN_FORMAT_TEXT:
      break;
  }
  return socplan::OutputFormat::kText;
}

socplan_status run_execute(const char* op, const char* request, size_t length,
                           socplan_format format, socplan_buffer** out,
                           const socplan::ServiceLimits& limits) {
  if (op == nullptr) return null_arg("op");
  if (request == nullptr && length > 0) return null_arg("request");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  clear_error();
  try {
    const std::string_view text(request == nullptr ? "" : request, length);
    const auto response = socplan::execute(op, text, limits);
    *out = make_buffer(socplan::render(op, response, to_format(format)));
    return SOCPLAN_OK;
  } catch (...) {
    const auto info = socplan::classify(std::current_exception());
    const socplan_status status = record(info);
    if (status != SOCPLAN_ERR_INTERNAL) {
      try {
        *out = make_buffer(socplan::emit_json(socplan::error_envelope(info)));
      } catch (...) {
        *out = nullptr;
      }
    }
    return status;
  }
}

}  // namespace

extern "C" {

const char* socplan_version(void) { return "1.0.0"; }

const char* socplan_last_error(void) { return g_error.c_str(); }

const char* socplan_last_error_field(void) { return g_field.c_str(); }

const char* socplan_status_name(socplan_status status) {
  switch (status) {
    case SOCPLAN_OK:
      return "ok";
    case SOCPLAN_ERR_INTERNAL:
      return "internal_error";
    case SOCPLAN_ERR_INVALID:
      return "validation_error";
    case SOCPLAN_ERR_INFEASIBLE:
      return "infeasible";
    case SOCPLAN_ERR_MALFORMED:
      return "malformed_json";
    case SOCPLAN_ERR_LIMIT:
      return "limit_exceeded";
    case SOCPLAN_ERR_NULL_ARG:
      return "null_argument";
  }
  return "unknown";
}

socplan_status socplan_variance(const socplan_plot* plot, const socplan_method* method,
                                socplan_design design, double* out_variance) {
  if (plot == nullptr) return null_arg("plot");
  if (method == nullptr) return null_arg("method");
  if (out_variance == nullptr) return null_arg("out_variance");
  return guarded([&] {
    *out_variance = socplan::estimator_variance(to_plot(plot), to_method(method),
                                                socplan::Design{design.n, design.k});
  });
}

socplan_status socplan_cost(const socplan_costs* costs, const socplan_method* method,
                            socplan_design design, double* out_cost) {
  if (costs == nullptr) return null_arg("costs");
  if (method == nullptr) return null_arg("method");
  if (out_cost == nullptr) return null_arg("out_cost");
  return guarded([&] {
    *out_cost = socplan::total_cost(to_costs(costs), to_method(method),
                                    socplan::Design{design.n, design.k});
  });
}

socplan_status socplan_optimal_composite_size(const socplan_plot* plot,
                                              const socplan_method* method,
                                              const socplan_costs* costs,
                                              socplan_composite_size* out) {
  if (plot == nullptr) return null_arg("plot");
  if (method == nullptr) return null_arg("method");
  if (costs == nullptr) return null_arg("costs");
  if (out == nullptr) return null_arg("out");
  return guarded([&] {
    const auto c =
        socplan::optimal_composite_size(to_plot(plot), to_method(method), to_costs(costs));
    out->continuous = c.continuous;
    out->boundary = to_boundary(c.boundary);
    out->compositing_gain = c.compositing_gain ? 1 : 0;
    out->floor_size = c.floor_size;
    out->nearest_size = c.nearest_size;
  });
}

socplan_status socplan_optimize_budget(const socplan_plot* plot, const socplan_method* method,
                                       const socplan_costs* costs, double budget,
                                       socplan_allocation* out) {
  if (plot == nullptr) return null_arg("plot");
  if (method == nullptr) return null_arg("method");
  if (costs == nullptr) return null_arg("costs");
  if (out == nullptr) return null_arg("out");
  return guarded([&] {
    fill(socplan::optimize_for_budget(to_plot(plot), to_method(method), to_costs(costs),
                                      socplan::Budget{budget}),
         out);
  });
}

socplan_status socplan_optimize_precision(const socplan_plot* plot, const socplan_method* method,
                                          const socplan_costs* costs, double max_variance,
                                          socplan_allocation* out) {
  if (plot == nullptr) return null_arg("plot");
  if (method == nullptr) return null_arg("method");
  if (costs == nullptr) return null_arg("costs");
  if (out == nullptr) return null_arg("out");
  return guarded([&] {
    fill(socplan::optimize_for_precision(to_plot(plot), to_method(method), to_costs(costs),
                                         socplan::PrecisionTarget{max_variance}),
         out);
  });
}

socplan_status socplan_relative_efficiency(const socplan_plot* plot,
                                           const socplan_method* method1,
                                           const socplan_method* method2,
                                           const socplan_costs* costs, double* out_ratio) {
  if (plot == nullptr) return null_arg("plot");
  if (method1 == nullptr) return null_arg("method1");
  if (method2 == nullptr) return null_arg("method2");
  if (costs == nullptr) return null_arg("costs");
  if (out_ratio == nullptr) return null_arg("out_ratio");
  return guarded([&] {
    *out_ratio = socplan::relative_efficiency(to_plot(plot), to_method(method1, "method1"),
                                              to_method(method2, "method2"), to_costs(costs));
  });
}

socplan_status socplan_expected_path_length(int64_t n, double area_m2, double* out_meters) {
  if (out_meters == nullptr) return null_arg("out_meters");
  return guarded([&] { *out_meters = socplan::expected_shortest_path(n, area_m2); });
}

socplan_status socplan_se_estimate(const double* values, size_t k, int64_t n, double sigma_delta,
                                   double* out_se) {
  if (values == nullptr && k > 0) return null_arg("values");
  if (out_se == nullptr) return null_arg("out_se");
  return guarded([&] {
    socplan::CompositeAssays data{"", std::vector<double>(values, values + k), n};
    *out_se = socplan::se_estimate(data, sigma_delta);
  });
}

socplan_status socplan_permutation_test(const double* values1, size_t n1, const double* values2,
                                        size_t n2, uint64_t permutations, uint64_t seed,
                                        double* out_p_value, int* out_exact) {
  if (values1 == nullptr && n1 > 0) return null_arg("values1");
  if (values2 == nullptr && n2 > 0) return null_arg("values2");
  if (out_p_value == nullptr) return null_arg("out_p_value");
  return guarded([&] {
    const auto r = socplan::permutation_test(std::span<const double>(values1, n1),
                                             std::span<const double>(values2, n2), permutations,
                                             seed);
    *out_p_value = r.p_value;
    if (out_exact != nullptr) *out_exact = r.exact ? 1 : 0;
  });
}

const char* socplan_buffer_data(const socplan_buffer* buffer) {
  return buffer == nullptr ? nullptr : buffer->bytes.data();
}

size_t socplan_buffer_size(const socplan_buffer* buffer) {
  return buffer == nullptr ? 0 : buffer->bytes.size();
}

void socplan_buffer_free(socplan_buffer* buffer) { delete buffer; }

socplan_status socplan_config_parse(const char* text, size_t length, socplan_config** out) {
  if (text == nullptr && length > 0) return null_arg("text");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto cfg = std::make_unique<socplan_config>();
    cfg->config = socplan::parse_config(std::string_view(text == nullptr ? "" : text, length));
    *out = cfg.release();
  });
}

socplan_status socplan_config_to_json(const socplan_config* config, socplan_buffer** out) {
  if (config == nullptr) return null_arg("config");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    *out = make_buffer(socplan::emit_json(socplan::config_to_json(config->config)));
  });
}

size_t socplan_config_method_count(const socplan_config* config) {
  return config == nullptr ? 0 : config->config.methods.size();
}

void socplan_config_free(socplan_config* config) { delete config; }

socplan_status socplan_dataset_parse_csv(const char* kind, const char* bytes, size_t length,
                                         const char* source_name, socplan_dataset** out) {
  if (kind == nullptr) return null_arg("kind");
  if (bytes == nullptr && length > 0) return null_arg("bytes");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const std::string_view text(bytes == nullptr ? "" : bytes, length);
    const std::string name = source_name == nullptr ? "" : source_name;
    auto ds = std::make_unique<socplan_dataset>();
    const std::string_view k(kind);
    if (k == "composites") {
      ds->dataset = socplan::parse_composites_csv(text, name);
    } else if (k == "replicates") {
      ds->dataset = socplan::parse_replicates_csv(text, name);
    } else {
      throw socplan::ValidationError("kind", "kind must be composites or replicates");
    }
    *out = ds.release();
  });
}

socplan_status socplan_dataset_to_json(const socplan_dataset* dataset, socplan_buffer** out) {
  if (dataset == nullptr) return null_arg("dataset");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded(
      [&] { *out = make_buffer(socplan::emit_json(socplan::to_json(dataset->dataset))); });
}

size_t socplan_dataset_warning_count(const socplan_dataset* dataset) {
  return dataset == nullptr ? 0 : dataset->dataset.source.warnings.size();
}

const char* socplan_dataset_warning(const socplan_dataset* dataset, size_t index) {
  if (dataset == nullptr || index >= dataset->dataset.source.warnings.size()) return nullptr;
  return dataset->dataset.source.warnings[index].c_str();
}

void socplan_dataset_free(socplan_dataset* dataset) { delete dataset; }

socplan_status socplan_execute(const char* op, const char* request, size_t length,
                               socplan_format format, socplan_buffer** out) {
  return run_execute(op, request, length, format, out, socplan::ServiceLimits{});
}

socplan_status socplan_render(const char* op, const char* response, size_t length,
                              socplan_format format, socplan_buffer** out) {
  if (op == nullptr) return null_arg("op");
  if (response == nullptr) return null_arg("response");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    socplan::OrderedJson doc;
    try {
      doc = socplan::OrderedJson::parse(response, response + length);
    } catch (const nlohmann::json::parse_error& e) {
      throw socplan::MalformedJsonError(std::string("malformed JSON: ") + e.what());
    }
    *out = make_buffer(socplan::render(op, doc, to_format(format)));
  });
}

socplan_status socplan_execute_limited(const char* op, const char* request, size_t length,
                                       socplan_format format, socplan_buffer** out) {
  return run_execute(op, request, length, format, out, socplan::http_limits());
}

socplan_status socplan_server_create(const char* bind_address, int port, const char* cors_origin,
                                     socplan_server** out) {
  if (bind_address == nullptr) return null_arg("bind_address");
  if (out == nullptr) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    socplan::HttpServerOptions options;
    options.bind_address = bind_address;
    options.port = port;
    if (cors_origin != nullptr) options.cors_origin = cors_origin;
    auto s = std::make_unique<socplan_server>();
    s->server = std::make_unique<socplan::HttpServer>(options);
    s->server->bind();
    *out = s.release();
  });
}

int socplan_server_port(const socplan_server* server) {
  return server == nullptr ? -1 : server->server->port();
}

socplan_status socplan_server_start(socplan_server* server) {
  if (server == nullptr) return null_arg("server");
  return guarded([&] {
    if (server->thread.joinable()) throw std::logic_error("server already started");
    server->thread = std::thread([s = server->server.get()] { s->listen(); });
    server->server->wait_until_ready();
  });
}

socplan_status socplan_server_run(socplan_server* server) {
  if (server == nullptr) return null_arg("server");
  return guarded([&] { server->server->listen(); });
}

void socplan_server_stop(socplan_server* server) {
  if (server == nullptr) return;
  server->server->stop();
  if (server->thread.joinable()) server->thread.join();
}

void socplan_server_free(socplan_server* server) {
  if (server == nullptr) return;
  socplan_server_stop(server);
  delete server;
}

}  // extern "C"
