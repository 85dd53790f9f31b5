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

#include <algorithm>
#include <map>
#include <sstream>

#include "helpdesk/common/error.hpp"
#include "helpdesk/sim/bus.hpp"
#include "helpdesk/sim/trace.hpp"
#include "helpdesk/sim/workload.hpp"

namespace helpdesk::sim {
namespace {

std::vector<LogEntry> logs_at_level(const MessageBus& bus, LogLevel level) {
  std::vector<LogEntry> out;
  for (const auto& e : bus.log_tail(10'000)) {
    if (e.level == level) out.push_back(e);
  }
  return out;
}

TEST(Bus, FirstPublishStartsAtSeqZero) {
  MessageBus bus;
  bus.register_node("lidar_src");
  bus.advance(250);
  const auto m = bus.publish("lidar_src", "/scan", LaserScan{});
  EXPECT_EQ(m.seq, 0U);
  EXPECT_EQ(m.stamp, SimTime{250});
  EXPECT_EQ(m.topic, "/scan");
  EXPECT_EQ(bus.publish("lidar_src", "/scan", LaserScan{}).seq, 1U);
}

TEST(Bus, PublishErrors) {
  MessageBus bus;
  EXPECT_THROW(
      {
        try {
          bus.publish("ghost", "/scan", LaserScan{});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::unknown_node);
          throw;
        }
      },
      Error);
  bus.register_node("lidar_src");
  bus.kill_node("lidar_src");
  try {
    bus.publish("lidar_src", "/scan", LaserScan{});
    FAIL() << "publish from a dead node must fail";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::dead_node);
  }
  try {
    bus.publish("supervisor", "/rosout", LaserScan{});
    FAIL() << "/rosout only carries logs";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::type_mismatch);
  }
}

TEST(Bus, FanOutDeliversIdenticalPayloads) {
  MessageBus bus;
  bus.register_node("src");
  bus.register_node("a");
  bus.register_node("b");
  std::vector<Message> got_a;
  std::vector<Message> got_b;
  bus.subscribe("a", "/scan", [&](const Message& m, SimTime) { got_a.push_back(m); });
  bus.subscribe("b", "/scan", [&](const Message& m, SimTime) { got_b.push_back(m); });
  LaserScan scan;
  scan.ranges = {1.0F, 2.0F, 3.0F};
  bus.publish("src", "/scan", scan);
  bus.advance(0);
  ASSERT_EQ(got_a.size(), 1U);
  ASSERT_EQ(got_b.size(), 1U);
  EXPECT_EQ(payload_digest(got_a[0].payload), payload_digest(got_b[0].payload));
  EXPECT_EQ(got_a[0], got_b[0]);
}

TEST(Bus, SubscriberSeesFifoOrder) {
  MessageBus bus;
  bus.register_node("src");
  bus.register_node("sink");
  std::vector<std::uint64_t> seqs;
  bus.subscribe("sink", "/t", [&](const Message& m, SimTime) { seqs.push_back(m.seq); });
  for (int i = 0; i < 5; ++i) bus.publish("src", "/t", LogEntry{LogLevel::info, "src", "x"});
  bus.advance(10);
  EXPECT_EQ(seqs, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
}

TEST(Bus, NoPublisherMeansNoDeliveries) {
  MessageBus bus;
  bus.register_node("sink");
  int n = 0;
  bus.subscribe("sink", "/nothing", [&](const Message&, SimTime) { ++n; });
  bus.advance(60'000);
  EXPECT_EQ(n, 0);
}

TEST(Bus, AdvanceZeroRunsNoTimers) {
  MessageBus bus;
  SourceSpec s{"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7};
  spawn_sensor_source(bus, s);
  bus.advance(0);
  EXPECT_EQ(bus.published_count("/scan"), 0U);
  EXPECT_EQ(bus.now(), SimTime{0});
  bus.advance(1000);
  EXPECT_EQ(bus.now(), SimTime{1000});
  EXPECT_EQ(bus.published_count("/scan"), 10U);
  EXPECT_THROW(bus.advance(-1), Error);
}

TEST(Bus, TenHzSourceDeliversTenPerSecond) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
  bus.register_node("sink");
  int n = 0;
  bus.subscribe("sink", "/scan", [&](const Message&, SimTime) { ++n; });
  bus.advance(1000);
  EXPECT_EQ(n, 10);
}

// Oracle: merge the two arithmetic timelines by hand (k*100 and k*250 ms,
// ties broken by source registration order).
TEST(Bus, TwoRatesMergeByDueTime) {
  MessageBus bus;
  spawn_sensor_source(bus, {"fast", SensorKind::lidar, "/a", 10.0, {}, 1});
  spawn_sensor_source(bus, {"slow", SensorKind::lidar, "/b", 4.0, {}, 2});
  bus.register_node("sink");
  std::vector<std::pair<Millis, std::string>> seen;
  auto h = [&](const Message& m, SimTime t) { seen.emplace_back(t.millis, m.publisher); };
  bus.subscribe("sink", "/a", h);
  bus.subscribe("sink", "/b", h);
  bus.advance(1000);

  std::vector<std::pair<Millis, std::string>> expected;
  for (Millis t = 100; t <= 1000; t += 100) expected.emplace_back(t, "fast");
  for (Millis t = 250; t <= 1000; t += 250) expected.emplace_back(t, "slow");
  std::stable_sort(expected.begin(), expected.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  EXPECT_EQ(seen.size(), 14U);
  EXPECT_EQ(seen, expected);
}

TEST(Bus, TiesOnOneTopicFollowRegistrationOrder) {
  MessageBus bus;
  spawn_sensor_source(bus, {"second", SensorKind::lidar, "/shared", 5.0, {}, 3});
  spawn_sensor_source(bus, {"first", SensorKind::lidar, "/shared", 5.0, {}, 4});
  bus.register_node("sink");
  std::vector<std::string> order;
  bus.subscribe("sink", "/shared", [&](const Message& m, SimTime) { order.push_back(m.publisher); });
  bus.advance(600);
  EXPECT_EQ(order, (std::vector<std::string>{"second", "first", "second", "first", "second", "first"}));
}

TEST(Bus, KillStopsDeliveriesAndLogsOnce) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
  bus.register_node("nav_consumer");
  int n = 0;
  bus.subscribe("nav_consumer", "/scan", [&](const Message&, SimTime) { ++n; });
  bus.advance(500);
  const int before = n;
  const auto receipt = bus.kill_node("nav_consumer");
  EXPECT_FALSE(receipt.already_dead);
  bus.advance(500);
  EXPECT_EQ(n, before);

  const auto fatals = logs_at_level(bus, LogLevel::fatal);
  ASSERT_EQ(fatals.size(), 1U);
  EXPECT_EQ(fatals[0].node, "supervisor");
  EXPECT_NE(fatals[0].text.find("process died"), std::string::npos);
  EXPECT_NE(fatals[0].text.find("nav_consumer"), std::string::npos);

  const auto again = bus.kill_node("nav_consumer");
  EXPECT_TRUE(again.already_dead);
  EXPECT_FALSE(again.warning.empty());
  EXPECT_EQ(logs_at_level(bus, LogLevel::fatal).size(), 1U);
}

// Oracle: the same seeded run without the kill, truncated at the kill time.
TEST(Bus, KilledSourceFreezesDownstreamCount) {
  auto run = [](bool kill) {
    MessageBus bus;
    spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
    bus.advance(3050);
    if (kill) bus.kill_node("lidar_src");
    bus.advance(3000);
    return bus.published_count("/scan");
  };
  EXPECT_EQ(run(true), 30U);
  EXPECT_EQ(run(false), 60U);
}

TEST(Bus, RestartRearmsTimersFromNow) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
  bus.advance(1000);
  bus.kill_node("lidar_src");
  bus.advance(1000);
  EXPECT_TRUE(bus.restart_node("lidar_src"));
  EXPECT_FALSE(bus.restart_node("lidar_src"));
  bus.advance(1000);
  EXPECT_EQ(bus.published_count("/scan"), 20U);
  EXPECT_EQ(bus.arrivals_between("/scan", SimTime{2000}, SimTime{3000}), 10U);
}

TEST(Bus, SameSeedRunsAreByteIdentical) {
  auto run = [](std::uint64_t seed) {
    MessageBus bus;
    spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, seed});
    bus.register_node("sink");
    std::vector<Message> got;
    bus.subscribe("sink", "/scan", [&](const Message& m, SimTime) { got.push_back(m); });
    bus.advance(2000);
    return std::make_pair(stream_digest(got), bus.trace_digest());
  };
  EXPECT_EQ(run(7), run(7));
  EXPECT_NE(run(7).first, run(8).first);
}

TEST(Workload, ScanRangesWithinLimits) {
  PayloadPattern p;
  for (std::uint64_t seed : {1ULL, 7ULL, 99ULL}) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto scan = generate_scan(p, seed, i);
      ASSERT_EQ(scan.ranges.size(), p.beams);
      for (float r : scan.ranges) {
        ASSERT_GE(r, p.range_min);
        ASSERT_LE(r, p.range_max);
      }
    }
  }
}

TEST(Workload, CameraFramesHaveVariance) {
  MessageBus bus;
  spawn_sensor_source(bus, {"camera_src", SensorKind::camera, "/image_raw", 5.0, {}, 11});
  bus.register_node("sink");
  std::vector<Image> frames;
  bus.subscribe("sink", "/image_raw",
                [&](const Message& m, SimTime) { frames.push_back(std::get<Image>(m.payload)); });
  bus.advance(2000);
  ASSERT_EQ(frames.size(), 10U);
  for (const auto& img : frames) {
    ASSERT_TRUE(img.well_formed());
    double mean = 0;
    for (auto px : img.pixels) mean += px;
    mean /= static_cast<double>(img.pixels.size());
    double var = 0;
    for (auto px : img.pixels) var += (px - mean) * (px - mean);
    var /= static_cast<double>(img.pixels.size());
    EXPECT_GT(var, 0.0);
  }
}

TEST(Workload, SeqIsGaplessAndDeliveryNeverPrecedesStamp) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 3});
  spawn_sensor_source(bus, {"camera_src", SensorKind::camera, "/image_raw", 5.0, {}, 4});
  bus.register_node("sink");
  std::map<std::string, std::vector<std::uint64_t>> seqs;
  SimTime last;
  auto h = [&](const Message& m, SimTime t) {
    seqs[m.topic].push_back(m.seq);
    EXPECT_GE(t, m.stamp);
    EXPECT_GE(t, last);
    last = t;
  };
  bus.subscribe("sink", "/scan", h);
  bus.subscribe("sink", "/image_raw", h);
  bus.advance(5000);
  for (const auto& [topic, s] : seqs) {
    for (std::size_t i = 0; i < s.size(); ++i) ASSERT_EQ(s[i], i) << topic;
  }
  // Conservation: every published message reached the one subscriber.
  EXPECT_EQ(seqs["/scan"].size(), bus.published_count("/scan"));
  EXPECT_EQ(seqs["/image_raw"].size(), bus.published_count("/image_raw"));
}

TEST(Workload, HealthyFeedNeverLogsStall) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
  spawn_consumer(bus, {"scan_consumer", "/scan", 1000, ""});
  bus.advance(60'000);
  EXPECT_TRUE(logs_at_level(bus, LogLevel::error).empty());
}

// Oracle: the last message lands at 5000 ms, so 1000 ms of silence is first
// reached at 6000 ms.
TEST(Workload, StallAfterKillLogsOnceAtSixSeconds) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
  spawn_consumer(bus, {"scan_consumer", "/scan", 1000, ""});
  std::vector<SimTime> error_times;
  bus.register_node("log_tap");
  bus.subscribe("log_tap", "/rosout", [&](const Message& m, SimTime t) {
    if (std::get<LogEntry>(m.payload).level == LogLevel::error) error_times.push_back(t);
  });
  bus.advance(5000);
  bus.kill_node("lidar_src");
  bus.advance(10'000);
  ASSERT_EQ(error_times.size(), 1U);
  EXPECT_EQ(error_times[0], SimTime{6000});
  EXPECT_EQ(logs_at_level(bus, LogLevel::error)[0].text, "no data on /scan");
}

TEST(Workload, OneStallLogPerEpisode) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
  spawn_consumer(bus, {"scan_consumer", "/scan", 1000, ""});
  for (int episode = 0; episode < 2; ++episode) {
    bus.advance(2000);
    bus.kill_node("lidar_src");
    bus.advance(3000);
    bus.restart_node("lidar_src");
  }
  bus.advance(2000);
  EXPECT_EQ(logs_at_level(bus, LogLevel::error).size(), 2U);
}

TEST(Trace, JsonLinesRoundTrip) {
  MessageBus bus;
  spawn_sensor_source(bus, {"lidar_src", SensorKind::lidar, "/scan", 10.0, {}, 7});
  bus.register_node("sink");
  bus.subscribe("sink", "/scan", nullptr);
  bus.advance(500);
  std::stringstream ss;
  write_trace_jsonl(ss, bus.trace());
  const auto back = read_trace_jsonl(ss);
  ASSERT_EQ(back.size(), bus.trace().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].t, bus.trace()[i].t);
    EXPECT_EQ(back[i].seq, bus.trace()[i].seq);
    EXPECT_EQ(back[i].payload_digest, bus.trace()[i].payload_digest);
  }
}

}  // namespace
}  // namespace helpdesk::sim
