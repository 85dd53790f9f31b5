// Copyright 2026 The Help Desk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <atomic>
#include <future>
#include <thread>

#include <httplib.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/service/http_server.hpp"
#include "helpdesk/service/service.hpp"
#include "test_support.hpp"

namespace helpdesk::service {
namespace {

ServiceConfig crash_config() {
  ServiceConfig c;
  c.scenario = testing::data_path("scenarios/fault_suite.yaml");
  c.scenario_name = "node_crash";
  return c;
}

struct Frame {
  std::uint64_t id = 0;
  std::string event;
  nlohmann::json data;
};

std::vector<Frame> parse_sse(const std::string& body) {
  std::vector<Frame> frames;
  std::size_t pos = 0;
  while (true) {
    const auto end = body.find("\n\n", pos);
    if (end == std::string::npos) break;
    const auto block = body.substr(pos, end - pos);
    pos = end + 2;
    Frame f;
    bool any = false;
    std::size_t lp = 0;
    while (lp <= block.size()) {
      auto le = block.find('\n', lp);
      if (le == std::string::npos) le = block.size();
      const auto line = block.substr(lp, le - lp);
      lp = le + 1;
      if (line.rfind("id: ", 0) == 0) {
        f.id = std::stoull(line.substr(4));
        any = true;
      } else if (line.rfind("event: ", 0) == 0) {
        f.event = line.substr(7);
      } else if (line.rfind("data: ", 0) == 0) {
        f.data = nlohmann::json::parse(line.substr(6));
      }
    }
    if (any) frames.push_back(std::move(f));
  }
  return frames;
}

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<Service>(crash_config());
    http_ = std::make_unique<HttpServer>(*service_);
    port_ = http_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { http_->listen_after_bind(); });
    for (int i = 0; i < 200 && !http_->running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  void TearDown() override {
    service_->shutdown();
    http_->stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(10, 0);
    return c;
  }
  nlohmann::json post(const std::string& path, const nlohmann::json& body, int expect) {
    auto res = client().Post(path.c_str(), body.dump(), "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return nlohmann::json::parse(res->body);
  }
  std::vector<Frame> stream(const std::string& sid, std::uint64_t after = 0) {
    auto res = client().Get(("/sessions/" + sid + "/events?follow=0&after_seq=" + std::to_string(after)).c_str());
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "text/event-stream");
    return parse_sse(res->body);
  }

  std::unique_ptr<Service> service_;
  std::unique_ptr<HttpServer> http_;
  std::thread thread_;
  int port_ = -1;
};

TEST_F(HttpFixture, HealthAndSessionLifecycle) {
  auto res = client().Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);

  const auto bad = post("/sessions", {{"level", "guru"}}, 400);
  EXPECT_EQ(bad["error"], "validation-error");
  EXPECT_EQ(bad["field"], "level");
  EXPECT_NE(bad["message"].get<std::string>().find("beginner"), std::string::npos);

  const auto s = post("/sessions", {{"level", "beginner"}}, 201);
  EXPECT_EQ(s["level"], "beginner");
  EXPECT_EQ(s["status"], "active");
  auto got = client().Get(("/sessions/" + s["id"].get<std::string>()).c_str());
  ASSERT_TRUE(got);
  EXPECT_EQ(nlohmann::json::parse(got->body)["id"], s["id"]);

  auto missing = client().Get("/sessions/s-404");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  auto missing_stream = client().Get("/sessions/s-404/events?follow=0");
  ASSERT_TRUE(missing_stream);
  EXPECT_EQ(missing_stream->status, 404);

  auto malformed = client().Post("/sessions", "{nope", "application/json");
  ASSERT_TRUE(malformed);
  EXPECT_EQ(malformed->status, 400);
  post("/sessions/" + s["id"].get<std::string>() + "/messages", {{"text", 7}}, 400);
  post("/sim/advance", {{"ms", "soon"}}, 400);
}

TEST_F(HttpFixture, TwoClientsSeeIdenticalOrderedStreams) {
  const auto sid = post("/sessions", {{"level", "intermediate"}}, 201)["id"].get<std::string>();
  post("/sim/advance", {{"ms", 6000}}, 200);
  post("/sessions/" + sid + "/messages", {{"text", "what happened to the lidar?"}}, 200);

  auto a = std::async(std::launch::async, [&] { return stream(sid); });
  auto b = std::async(std::launch::async, [&] { return stream(sid); });
  const auto fa = a.get();
  const auto fb = b.get();
  ASSERT_GE(fa.size(), 3U);
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    EXPECT_EQ(fa[i].id, i + 1);
    EXPECT_EQ(fa[i].id, fb[i].id);
    EXPECT_EQ(fa[i].data, fb[i].data);
    EXPECT_EQ(fa[i].event, fa[i].data["kind"]);
  }
  EXPECT_EQ(fa.front().event, "system");
  const auto diag = std::find_if(fa.begin(), fa.end(), [](const Frame& f) { return f.event == "diagnosis"; });
  ASSERT_NE(diag, fa.end());
  EXPECT_EQ(diag->data["payload"]["event"]["category"], "node_crash");
  EXPECT_EQ(fa.back().event, "agent_reply");

  // Resume from a cursor, via query and via Last-Event-ID.
  const auto tail = stream(sid, 2);
  ASSERT_EQ(tail.size(), fa.size() - 2);
  EXPECT_EQ(tail.front().id, 3U);
  httplib::Headers h = {{"Last-Event-ID", "2"}};
  auto res = client().Get(("/sessions/" + sid + "/events?follow=0").c_str(), h);
  ASSERT_TRUE(res);
  EXPECT_EQ(parse_sse(res->body).front().id, 3U);
}

TEST_F(HttpFixture, FollowStreamDeliversNewEnvelopes) {
  const auto sid = post("/sessions", {{"level", "expert"}}, 201)["id"].get<std::string>();
  std::promise<std::vector<Frame>> done;
  std::thread reader([&] {
    std::string buffer;
    auto c = client();
    c.Get(("/sessions/" + sid + "/events?follow=1").c_str(), [&](const char* data, std::size_t n) {
      buffer.append(data, n);
      auto frames = parse_sse(buffer);
      if (!frames.empty() && frames.back().event == "diagnosis") {
        done.set_value(frames);
        return false;
      }
      return true;
    });
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  post("/sim/advance", {{"ms", 6000}}, 200);
  auto fut = done.get_future();
  ASSERT_EQ(fut.wait_for(std::chrono::seconds(10)), std::future_status::ready);
  const auto frames = fut.get();
  EXPECT_EQ(frames.front().id, 1U);
  EXPECT_EQ(frames.back().data["payload"]["event"]["category"], "node_crash");
  reader.join();
}

TEST_F(HttpFixture, FixLoopAndConflicts) {
  const auto sid = post("/sessions", {{"level", "intermediate"}}, 201)["id"].get<std::string>();
  post("/sim/advance", {{"ms", 6000}}, 200);
  const auto frames = stream(sid);
  const auto diag = std::find_if(frames.begin(), frames.end(), [](const Frame& f) {
    return f.event == "diagnosis" && f.data["payload"]["event"]["category"] == "node_crash";
  });
  ASSERT_NE(diag, frames.end());
  const auto eid = diag->data["payload"]["event"]["id"].get<std::string>();
  EXPECT_EQ(diag->data["payload"]["fix_token"], "fix:" + eid);

  post("/sessions/" + sid + "/events/evt-9999/fix", nlohmann::json::object(), 404);
  const auto fix = post("/sessions/" + sid + "/events/" + eid + "/fix", nlohmann::json::object(), 200);
  EXPECT_EQ(fix["kind"], "fix_result");
  EXPECT_EQ(fix["payload"]["fixed"], true);
  EXPECT_EQ(fix["payload"]["status"], "fixed");
  EXPECT_TRUE(fix["payload"]["kb_record"].is_number());

  const auto again = post("/sessions/" + sid + "/events/" + eid + "/fix", nlohmann::json::object(), 409);
  EXPECT_EQ(again["error"], "already-resolved");
  post("/sessions/" + sid + "/messages", {{"text", "hello"}}, 409);
  auto s = client().Get(("/sessions/" + sid).c_str());
  EXPECT_EQ(nlohmann::json::parse(s->body)["status"], "resolved");
  const auto status = nlohmann::json::parse(client().Get("/sim/status")->body);
  EXPECT_GE(status["kb_records"].get<int>(), 1);
}

TEST(ServiceCore, ConcurrentPostsKeepSequenceGapless) {
  Service svc(crash_config());
  const auto sid = svc.create_session("expert").id;
  std::vector<std::thread> posters;
  for (int t = 0; t < 4; ++t) {
    posters.emplace_back([&] {
      for (int i = 0; i < 3; ++i) svc.post_message(sid, "status of lidar_src?");
    });
  }
  std::thread ticker([&] {
    for (int i = 0; i < 20; ++i) svc.advance(100);
  });
  for (auto& p : posters) p.join();
  ticker.join();
  const auto all = svc.events_after(sid, 0);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].seq, i + 1);
  EXPECT_GE(all.size(), 13U);
}

TEST(ServiceCore, WaitReturnsOnShutdown) {
  Service svc(crash_config());
  const auto sid = svc.create_session("beginner").id;
  const auto last = svc.events_after(sid, 0).back().seq;
  auto waiter = std::async(std::launch::async,
                           [&] { return svc.wait_for_events(sid, last, std::chrono::milliseconds(10'000)); });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  svc.shutdown();
  ASSERT_EQ(waiter.wait_for(std::chrono::seconds(5)), std::future_status::ready);
  EXPECT_FALSE(waiter.get());
}

TEST(ServiceCore, SessionsSurviveRestart) {
  const auto dir = testing::scratch_dir("session_store");
  auto cfg = crash_config();
  cfg.session_store = dir / "sessions.json";
  std::vector<nlohmann::json> before;
  std::string sid;
  {
    Service svc(cfg);
    sid = svc.create_session("expert").id;
    svc.advance(6000);
    svc.post_message(sid, "what broke?");
    for (const auto& e : svc.events_after(sid, 0)) before.push_back(to_json(e));
  }
  Service svc(cfg);
  const auto s = svc.session(sid);
  EXPECT_EQ(s.level, agent::Level::expert);
  std::vector<nlohmann::json> after;
  for (const auto& e : svc.events_after(sid, 0)) after.push_back(to_json(e));
  EXPECT_EQ(after, before);
  EXPECT_NE(svc.create_session("beginner").id, sid);
  const auto reply = svc.post_message(sid, "and now?");
  EXPECT_EQ(reply.seq, before.size() + 1);
}

TEST(ServiceCore, StatusCodesForErrors) {
  EXPECT_EQ(http_status(Errc::validation_error), 400);
  EXPECT_EQ(http_status(Errc::path_outside_workspace), 400);
  EXPECT_EQ(http_status(Errc::not_found), 404);
  EXPECT_EQ(http_status(Errc::already_resolved), 409);
  EXPECT_EQ(http_status(Errc::provider_unavailable), 502);
  EXPECT_EQ(http_status(Errc::storage_error), 500);
}

TEST(ServiceCore, EnvelopeJsonRoundTrip) {
  Envelope e{4, EnvelopeKind::fix_result, {{"event_id", "evt-0001"}, {"fixed", true}}};
  const auto back = envelope_from_json(to_json(e));
  EXPECT_EQ(back.seq, 4U);
  EXPECT_EQ(back.kind, EnvelopeKind::fix_result);
  EXPECT_EQ(back.payload, e.payload);
  EXPECT_THROW(parse_envelope_kind("gossip"), Error);
}

}  // namespace
}  // namespace helpdesk::service
