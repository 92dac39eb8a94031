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

#include "socplan/http_service.hpp"

#include <stdexcept>

#include <httplib.h>

#include "socplan/service.hpp"

namespace socplan {

namespace {

constexpr const char* kJsonType = "application/json";
constexpr std::size_t kMaxBodyBytes = 16u << 20;

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformed:
      return 400;
    case ErrorKind::kValidation:
    case ErrorKind::kInfeasible:
    case ErrorKind::kLimit:
      return 422;
    case ErrorKind::kInternal:
      break;
  }
  return 500;
}

void send_error(httplib::Response& res, int status, const ErrorInfo& info) {
  res.status = status;
  res.set_content(emit_json(error_envelope(info)), kJsonType);
}

}  // namespace

struct HttpServer::Impl {
  HttpServerOptions options;
  httplib::Server server;
  int port = -1;
};

HttpServer::HttpServer(HttpServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  auto& svr = impl_->server;
  const std::string origin = impl_->options.cors_origin;

  svr.set_payload_max_length(kMaxBodyBytes);
  svr.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Vary", "Origin");
  });
  svr.Options(R"(/v1/.*)", [origin](const httplib::Request&, httplib::Response& res) {
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Max-Age", "600");
    }
    res.status = 204;
  });

  svr.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(emit_json(execute("health", Json::object())), kJsonType);
  });

  svr.Post(R"(/v1/([a-z\-]+))", [](const httplib::Request& req, httplib::Response& res) {
    const std::string op = req.matches[1];
    if (!is_operation(op) || op == "health") {
      send_error(res, 404,
                 ErrorInfo{ErrorKind::kValidation, "not_found", "unknown endpoint /v1/" + op, ""});
      return;
    }
    try {
      res.set_content(emit_json(execute(op, std::string_view(req.body), http_limits())), kJsonType);
    } catch (...) {
      const ErrorInfo info = classify(std::current_exception());
      send_error(res, status_for(info.kind), info);
    }
  });

  svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string message = res.status == 404 ? "unknown endpoint " + req.path
                                                  : "request rejected (HTTP " +
                                                        std::to_string(res.status) + ")";
    res.set_content(emit_json(error_envelope(
                        ErrorInfo{ErrorKind::kValidation,
                                  res.status == 404 ? "not_found" : "bad_request", message, ""})),
                    kJsonType);
  });
  svr.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        send_error(res, 500, classify(ep));
      });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (impl_->port >= 0) return impl_->port;
  const auto& o = impl_->options;
  if (o.port < 0 || o.port > 65535) throw std::runtime_error("port out of range");
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.bind_address);
  } else if (impl_->server.bind_to_port(o.bind_address, o.port)) {
    impl_->port = o.port;
  }
  if (impl_->port < 0) {
    throw std::runtime_error("cannot bind " + o.bind_address + ":" + std::to_string(o.port));
  }
  return impl_->port;
}

void HttpServer::listen() {
  bind();
  impl_->server.listen_after_bind();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

int HttpServer::port() const { return impl_->port; }

}  // namespace socplan
