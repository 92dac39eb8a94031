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

// Request dispatch shared by the command-line tool and the HTTP service.
// A request is a JSON object shaped like a study configuration plus
// operation-specific keys; the response is an ordered JSON document that
// always carries schema_version. Both front ends call execute(), which is
// what keeps their JSON output identical.

#ifndef SOCPLAN_SERVICE_HPP_
#define SOCPLAN_SERVICE_HPP_

#include <chrono>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socplan/data_io.hpp"

namespace socplan {

struct ServiceLimits {
  std::optional<std::int64_t> max_reps;
  std::optional<std::chrono::milliseconds> time_budget;
};

// 10^5 replications and 10 s of wall clock.
ServiceLimits http_limits();

// Known operation names, in a fixed order.
const std::vector<std::string>& operations();
bool is_operation(std::string_view op);

/// Runs `op` on `request`. Throws ValidationError, InfeasibleError,
/// LimitExceededError or MalformedJsonError.
OrderedJson execute(std::string_view op, const Json& request, const ServiceLimits& limits = {});
OrderedJson execute(std::string_view op, std::string_view request_text,
                    const ServiceLimits& limits = {});

enum class OutputFormat { kText, kJson, kCsv };

OutputFormat parse_output_format(std::string_view name);

// Renders a response. Text is for people; JSON is emit_json of the
// response; CSV flattens the main table of the response.
std::string render(std::string_view op, const OrderedJson& response, OutputFormat format);

enum class ErrorKind { kMalformed, kValidation, kInfeasible, kLimit, kInternal };

struct ErrorInfo {
  ErrorKind kind = ErrorKind::kInternal;
  std::string code;  // "malformed_json", "validation_error", ...
  std::string message;
  std::string field_path;
};

ErrorInfo classify(std::exception_ptr error);

// {schema_version, code, message, field_path}.
OrderedJson error_envelope(const ErrorInfo& info);

}  // namespace socplan

#endif  // SOCPLAN_SERVICE_HPP_
