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

// JSON-over-HTTP front end. GET /v1/health and POST /v1/<operation>, where
// the body is the same request document the command-line tool builds.

#ifndef SOCPLAN_HTTP_SERVICE_HPP_
#define SOCPLAN_HTTP_SERVICE_HPP_

#include <memory>
#include <string>

namespace socplan {

struct HttpServerOptions {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin;  // empty: no CORS headers
};

class HttpServer {
 public:
  explicit HttpServer(HttpServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds the socket; returns the bound port. Throws std::runtime_error.
  int bind();
  // Serves until stop(); binds first if needed.
  void listen();
  // Blocks until a concurrent listen() is accepting connections.
  void wait_until_ready() const;
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace socplan

#endif  // SOCPLAN_HTTP_SERVICE_HPP_
