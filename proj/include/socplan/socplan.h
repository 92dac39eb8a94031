/*
 * Copyright 2026 The socplan Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to libsocplan: survey design, estimation and simulation for
 * composited soil organic carbon assays.
 *
 * Every function returns a socplan_status. On failure a thread-local message
 * and field path are available from socplan_last_error() and
 * socplan_last_error_field() until the next call on the same thread.
 * Concentrations are in %SOC, costs in any single currency.
 */

#ifndef SOCPLAN_SOCPLAN_H_
#define SOCPLAN_SOCPLAN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SOCPLAN_BUILDING_LIBRARY)
#define SOCPLAN_API __declspec(dllexport)
#else
#define SOCPLAN_API __declspec(dllimport)
#endif
#else
#define SOCPLAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum socplan_status {
  SOCPLAN_OK = 0,
  SOCPLAN_ERR_INTERNAL = 1,
  SOCPLAN_ERR_INVALID = 2,    /* validation or parse failure */
  SOCPLAN_ERR_INFEASIBLE = 3, /* budget or precision target cannot be met */
  SOCPLAN_ERR_MALFORMED = 4,  /* request text is not JSON */
  SOCPLAN_ERR_LIMIT = 5,      /* replication cap or time budget exceeded */
  SOCPLAN_ERR_NULL_ARG = 6
} socplan_status;

typedef enum socplan_format {
  SOCPLAN_FORMAT_TEXT = 0,
  SOCPLAN_FORMAT_JSON = 1,
  SOCPLAN_FORMAT_CSV = 2
} socplan_format;

typedef enum socplan_boundary {
  SOCPLAN_BOUNDARY_INTERIOR = 0,
  SOCPLAN_BOUNDARY_FULL_COMPOSITE = 1, /* k = 1 */
  SOCPLAN_BOUNDARY_NO_COMPOSITE = 2    /* k = n */
} socplan_boundary;

typedef struct socplan_plot {
  double mu;
  double sigma_p;
} socplan_plot;

typedef struct socplan_method {
  double sigma_delta;
  double cost_prep;
  double cost_assay;
} socplan_method;

typedef struct socplan_costs {
  double cost_fixed;
  double cost_core;
} socplan_costs;

typedef struct socplan_design {
  int64_t n;
  int64_t k;
} socplan_design;

typedef struct socplan_allocation {
  double n_real;
  double k_real;
  socplan_boundary boundary;
  int64_t n;
  int64_t k;
  double achieved_variance;
  double achieved_se;
  double total_cost;
  int64_t rounded_n; /* relaxation rounded down (budget) or up (precision) */
  int64_t rounded_k;
} socplan_allocation;

typedef struct socplan_composite_size {
  double continuous; /* +inf when full compositing is optimal */
  socplan_boundary boundary;
  int compositing_gain;
  int64_t floor_size; /* 0 when continuous is infinite */
  int64_t nearest_size;
} socplan_composite_size;

typedef struct socplan_config socplan_config;
typedef struct socplan_dataset socplan_dataset;
typedef struct socplan_buffer socplan_buffer;
typedef struct socplan_server socplan_server;

SOCPLAN_API const char* socplan_version(void);
SOCPLAN_API const char* socplan_last_error(void);
SOCPLAN_API const char* socplan_last_error_field(void);
SOCPLAN_API const char* socplan_status_name(socplan_status status);

/* Closed-form design results. */
SOCPLAN_API socplan_status socplan_variance(const socplan_plot* plot, const socplan_method* method,
                                            socplan_design design, double* out_variance);
SOCPLAN_API socplan_status socplan_cost(const socplan_costs* costs, const socplan_method* method,
                                        socplan_design design, double* out_cost);
SOCPLAN_API socplan_status socplan_optimal_composite_size(const socplan_plot* plot,
                                                          const socplan_method* method,
                                                          const socplan_costs* costs,
                                                          socplan_composite_size* out);
SOCPLAN_API socplan_status socplan_optimize_budget(const socplan_plot* plot,
                                                   const socplan_method* method,
                                                   const socplan_costs* costs, double budget,
                                                   socplan_allocation* out);
SOCPLAN_API socplan_status socplan_optimize_precision(const socplan_plot* plot,
                                                      const socplan_method* method,
                                                      const socplan_costs* costs,
                                                      double max_variance,
                                                      socplan_allocation* out);
SOCPLAN_API socplan_status socplan_relative_efficiency(const socplan_plot* plot,
                                                       const socplan_method* method1,
                                                       const socplan_method* method2,
                                                       const socplan_costs* costs,
                                                       double* out_ratio);
SOCPLAN_API socplan_status socplan_expected_path_length(int64_t n, double area_m2,
                                                        double* out_meters);

/* Estimation from composite assays. */
SOCPLAN_API socplan_status socplan_se_estimate(const double* values, size_t k, int64_t n,
                                               double sigma_delta, double* out_se);
SOCPLAN_API socplan_status socplan_permutation_test(const double* values1, size_t n1,
                                                    const double* values2, size_t n2,
                                                    uint64_t permutations, uint64_t seed,
                                                    double* out_p_value, int* out_exact);

/* Byte buffers returned by the library. */
SOCPLAN_API const char* socplan_buffer_data(const socplan_buffer* buffer);
SOCPLAN_API size_t socplan_buffer_size(const socplan_buffer* buffer);
SOCPLAN_API void socplan_buffer_free(socplan_buffer* buffer);

/* Study configuration documents (JSON). */
SOCPLAN_API socplan_status socplan_config_parse(const char* text, size_t length,
                                                socplan_config** out);
SOCPLAN_API socplan_status socplan_config_to_json(const socplan_config* config,
                                                  socplan_buffer** out);
SOCPLAN_API size_t socplan_config_method_count(const socplan_config* config);
SOCPLAN_API void socplan_config_free(socplan_config* config);

/* Assay CSV files. kind is "composites" or "replicates". */
SOCPLAN_API socplan_status socplan_dataset_parse_csv(const char* kind, const char* bytes,
                                                     size_t length, const char* source_name,
                                                     socplan_dataset** out);
SOCPLAN_API socplan_status socplan_dataset_to_json(const socplan_dataset* dataset,
                                                   socplan_buffer** out);
SOCPLAN_API size_t socplan_dataset_warning_count(const socplan_dataset* dataset);
SOCPLAN_API const char* socplan_dataset_warning(const socplan_dataset* dataset, size_t index);
SOCPLAN_API void socplan_dataset_free(socplan_dataset* dataset);

/*
 * Runs an operation ("optimize", "min-cost", "composite-size", "efficiency",
 * "curves", "estimate", "diff", "simulate", "stock", "path-length",
 * "tables", "health") on a JSON request and renders the response. On
 * failure with SOCPLAN_ERR_INVALID, _INFEASIBLE, _MALFORMED or _LIMIT, *out
 * receives the JSON error envelope. No replication cap applies.
 */
SOCPLAN_API socplan_status socplan_execute(const char* op, const char* request, size_t length,
                                           socplan_format format, socplan_buffer** out);

/* Renders a JSON response of `op` (as returned in SOCPLAN_FORMAT_JSON). */
SOCPLAN_API socplan_status socplan_render(const char* op, const char* response, size_t length,
                                          socplan_format format, socplan_buffer** out);

/* Same as socplan_execute with the HTTP service's limits. */
SOCPLAN_API socplan_status socplan_execute_limited(const char* op, const char* request,
                                                   size_t length, socplan_format format,
                                                   socplan_buffer** out);

/* HTTP service. cors_origin may be NULL. port 0 picks a free port. */
SOCPLAN_API socplan_status socplan_server_create(const char* bind_address, int port,
                                                 const char* cors_origin, socplan_server** out);
SOCPLAN_API int socplan_server_port(const socplan_server* server);
/* Serves on a background thread and returns once the socket is accepting. */
SOCPLAN_API socplan_status socplan_server_start(socplan_server* server);
/* Serves on the calling thread until socplan_server_stop. */
SOCPLAN_API socplan_status socplan_server_run(socplan_server* server);
SOCPLAN_API void socplan_server_stop(socplan_server* server);
SOCPLAN_API void socplan_server_free(socplan_server* server);

#ifdef __cplusplus
}
#endif

#endif /* SOCPLAN_SOCPLAN_H_ */
