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

#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "socplan/service.hpp"
#include "test_support.hpp"

namespace socplan {
namespace {

class HttpTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    server_ = new HttpServer(HttpServerOptions{"127.0.0.1", 0, "http://localhost:3000"});
    server_->bind();
    thread_ = new std::thread([] { server_->listen(); });
    server_->wait_until_ready();
  }
  static void TearDownTestSuite() {
    server_->stop();
    thread_->join();
    delete thread_;
    delete server_;
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", server_->port()); }

  static HttpServer* server_;
  static std::thread* thread_;
};

HttpServer* HttpTest::server_ = nullptr;
std::thread* HttpTest::thread_ = nullptr;

TEST_F(HttpTest, Health) {
  auto res = client().Get("/v1/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body)["status"], "ok");
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "http://localhost:3000");
}

TEST_F(HttpTest, InfeasibleBudgetIs422) {
  Json req = Json::parse(testing::topsoil_request());
  req["budget"] = 150;
  auto res = client().Post("/v1/optimize", req.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  const Json body = Json::parse(res->body);
  EXPECT_EQ(body["field_path"], "budget");
  EXPECT_EQ(body["schema_version"], 1);
}

TEST_F(HttpTest, MalformedIs400) {
  auto res = client().Post("/v1/optimize", "{nope", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(Json::parse(res->body)["code"], "malformed_json");
}

TEST_F(HttpTest, UnknownOperationIs404) {
  auto res = client().Post("/v1/explode", "{}", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(HttpTest, SimulationCapIs422) {
  Json req = Json::parse(testing::topsoil_request());
  req["simulation"]["reps"] = 1000000;
  auto res = client().Post("/v1/simulate", req.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
}

TEST_F(HttpTest, BodyMatchesLibrary) {
  const std::string req = testing::topsoil_request();
  auto res = client().Post("/v1/optimize", req, "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, emit_json(execute("optimize", std::string_view(req))));
}

TEST_F(HttpTest, Preflight) {
  auto res = client().Options("/v1/optimize");
  ASSERT_TRUE(res);
  EXPECT_LT(res->status, 300);
}

}  // namespace
}  // namespace socplan
