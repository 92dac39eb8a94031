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

// socplan-server: JSON-over-HTTP service on top of libsocplan.

#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "socplan/socplan.h"

namespace {

socplan_server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server != nullptr) socplan_server_stop(g_server);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HTTP service for composite sampling design", "socplan-server"};
  std::string bind = "127.0.0.1";
  int port = 8080;
  std::string cors_origin;
  app.add_option("--bind", bind, "Address to listen on");
  app.add_option("--port", port, "TCP port (0 picks a free port)")->check(CLI::Range(0, 65535));
  app.add_option("--cors-origin", cors_origin, "Origin allowed to call the API from a browser");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  socplan_server* server = nullptr;
  if (socplan_server_create(bind.c_str(), port, cors_origin.empty() ? nullptr : cors_origin.c_str(),
                            &server) != SOCPLAN_OK) {
    std::cerr << "error: " << socplan_last_error() << "\n";
    return 1;
  }
  g_server = server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on http://" << bind << ":" << socplan_server_port(server) << std::endl;
  const socplan_status s = socplan_server_run(server);
  g_server = nullptr;
  socplan_server_free(server);
  return s == SOCPLAN_OK ? 0 : 1;
}
