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

#include <cmath>
#include <limits>

#include "helpdesk/common/error.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/fault/fault.hpp"
#include "helpdesk/sim/workload.hpp"

namespace helpdesk::diag {
namespace {

using sim::LaserScan;
using sim::LogEntry;
using sim::LogLevel;
using sim::Message;
using sim::SimTime;

LaserScan healthy_scan() { return sim::generate_scan({}, 7, 0); }

Message msg_at(const sim::Payload& p, Millis stamp, std::uint64_t seq = 0) {
  Message m;
  m.topic = "/scan";
  m.publisher = "lidar_src";
  m.seq = seq;
  m.stamp = SimTime{stamp};
  m.payload = p;
  return m;
}

TopicHealth fresh(Millis period = 100) {
  TopicHealth h;
  h.topic = "/scan";
  h.nominal_period = period;
  h.source_node = "lidar_src";
  return h;
}

TEST(ClassifyLog, SeverityAndPatterns) {
  EXPECT_FALSE(classify_log({LogLevel::info, "nav", "goal reached"}, SimTime{0}));
  EXPECT_FALSE(classify_log({LogLevel::debug, "nav", "Traceback in debug"}, SimTime{0}));
  EXPECT_FALSE(classify_log({LogLevel::warn, "nav", "battery low"}, SimTime{0}));
  const auto warn = classify_log({LogLevel::warn, "nav", "caught exception in planner"}, SimTime{0});
  ASSERT_TRUE(warn);
  EXPECT_EQ(warn->category, Category::log_error);
}

TEST(ClassifyLog, ProcessDiedIsNodeCrash) {
  const auto e = classify_log({LogLevel::fatal, "supervisor", "process died: lidar_src"}, SimTime{5000});
  ASSERT_TRUE(e);
  EXPECT_EQ(e->category, Category::node_crash);
  EXPECT_EQ(e->suspected_node, "lidar_src");
  EXPECT_FALSE(e->evidence.empty());
}

// The consumer's exact template, as emitted by spawn_consumer.
TEST(ClassifyLog, ExtractsTopicFromConsumerTemplate) {
  sim::MessageBus bus;
  sim::spawn_consumer(bus, {"scan_out_consumer", "/scan_out", 1000, ""});
  bus.advance(1500);
  const auto tail = bus.log_tail(1);
  ASSERT_EQ(tail.size(), 1U);
  const auto e = classify_log(tail[0], SimTime{1000});
  ASSERT_TRUE(e);
  EXPECT_EQ(e->category, Category::log_error);
  EXPECT_EQ(e->topic, "/scan_out");
  EXPECT_EQ(e->suspected_node, "scan_out_consumer");
  EXPECT_EQ(e->evidence["log_excerpt"], "no data on /scan_out");
}

TEST(CheckContent, Verdicts) {
  EXPECT_TRUE(std::holds_alternative<Clean>(check_content(healthy_scan())));
  EXPECT_TRUE(std::holds_alternative<Clean>(check_content(sim::generate_image({}, 3, 0))));

  sim::Image black{8, 8, 3, std::vector<std::uint8_t>(192, 0)};
  EXPECT_TRUE(std::holds_alternative<Blank>(check_content(black)));

  // Both predicates hold for an all-zero scan below range_min; precedence
  // reports InvalidValues.
  auto zeros = healthy_scan();
  std::fill(zeros.ranges.begin(), zeros.ranges.end(), 0.0F);
  const auto verdict = check_content(zeros);
  ASSERT_TRUE(std::holds_alternative<InvalidValues>(verdict));
  EXPECT_DOUBLE_EQ(std::get<InvalidValues>(verdict).fraction, 1.0);

  auto ones = healthy_scan();
  std::fill(ones.ranges.begin(), ones.ranges.end(), 1.0F);
  const auto rep = check_content(ones);
  ASSERT_TRUE(std::holds_alternative<RepeatedValues>(rep));
  EXPECT_DOUBLE_EQ(std::get<RepeatedValues>(rep).fraction, 1.0);

  // A few isolated outliers are tolerated.
  auto spotty = healthy_scan();
  for (std::size_t i = 0; i < spotty.ranges.size(); i += 20) spotty.ranges[i] = std::numeric_limits<float>::infinity();
  EXPECT_TRUE(std::holds_alternative<Clean>(check_content(spotty)));
}

TEST(CheckContent, FractionsStayInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto scan = sim::generate_scan({}, seed, seed);
    const auto k = seed % scan.ranges.size();
    for (std::size_t i = 0; i < k * 7 && i < scan.ranges.size(); ++i) scan.ranges[i] = 0.0F;
    std::visit(
        [](const auto& v) {
          using V = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<V, RepeatedValues> || std::is_same_v<V, InvalidValues>) {
            EXPECT_GE(v.fraction, 0.0);
            EXPECT_LE(v.fraction, 1.0);
          }
        },
        check_content(scan));
  }
}

TEST(ObserveMessage, OnTimeCleanStaysHealthy) {
  auto r = observe_message(fresh(), msg_at(healthy_scan(), 100), SimTime{100});
  EXPECT_FALSE(r.event);
  EXPECT_EQ(r.state.episode, Episode::healthy);
  r = observe_message(r.state, msg_at(healthy_scan(), 200, 1), SimTime{200});
  EXPECT_GT(r.state.ewma_period, 0.0);
}

TEST(ObserveMessage, DelaySustainedThreeMessages) {
  auto s = fresh();
  std::optional<DiagnosisEvent> event;
  int fired_on = 0;
  for (int i = 1; i <= 5 && !event; ++i) {
    const Millis stamp = i * 100;
    auto r = observe_message(s, msg_at(healthy_scan(), stamp, i), SimTime{stamp + 500});
    s = r.state;
    if (r.event) {
      event = r.event;
      fired_on = i;
    }
  }
  ASSERT_TRUE(event);
  EXPECT_EQ(fired_on, 3);
  EXPECT_EQ(event->category, Category::delay);
  EXPECT_EQ(event->evidence["staleness_ms"], 500);
  EXPECT_EQ(event->evidence["delay_threshold_ms"], 300);
}

TEST(ObserveMessage, StalenessAtThresholdIsNotDelay) {
  auto s = fresh();
  for (int i = 1; i <= 10; ++i) {
    auto r = observe_message(s, msg_at(healthy_scan(), i * 100, i), SimTime{i * 100 + 300});
    EXPECT_FALSE(r.event);
    s = r.state;
  }
}

TEST(ObserveMessage, ZeroScanIsCorrupt) {
  auto zeros = healthy_scan();
  std::fill(zeros.ranges.begin(), zeros.ranges.end(), 0.0F);
  const auto r = observe_message(fresh(), msg_at(zeros, 100), SimTime{100});
  ASSERT_TRUE(r.event);
  EXPECT_EQ(r.event->category, Category::corrupt);
  EXPECT_EQ(r.event->evidence["verdict"], "InvalidValues");
  EXPECT_EQ(r.state.episode, Episode::corrupted);
}

TEST(ObserveMessage, LearnsPeriodWhenUndeclared) {
  TopicHealth s;
  s.topic = "/scan";
  for (int i = 0; i <= 20; ++i) s = observe_message(s, msg_at(healthy_scan(), i * 250, i), SimTime{i * 250}).state;
  ASSERT_TRUE(s.nominal_period);
  EXPECT_EQ(*s.nominal_period, 250);
}

TEST(CheckSilence, ThresholdAndLiveness) {
  auto s = fresh();
  s.last_arrival = SimTime{1000};
  auto alive = [](std::string_view) { return true; };
  auto dead = [](std::string_view) { return false; };
  EXPECT_FALSE(check_silence(s, SimTime{1500}, alive).event);
  const auto drop = check_silence(s, SimTime{1600}, alive);
  ASSERT_TRUE(drop.event);
  EXPECT_EQ(drop.event->category, Category::drop);
  EXPECT_FALSE(check_silence(drop.state, SimTime{1700}, alive).event);  // first tick only

  const auto crash = check_silence(s, SimTime{1600}, dead);
  ASSERT_TRUE(crash.event);
  EXPECT_EQ(crash.event->category, Category::node_crash);
}

TEST(Debounce, SameKeySuppressedOtherCategoriesPass) {
  EpisodeTable table;
  DiagnosisEvent a;
  a.id = "evt-1";
  a.topic = "/scan";
  a.category = Category::corrupt;
  auto b = a;
  b.id = "evt-2";
  EXPECT_TRUE(debounce(a, table));
  EXPECT_FALSE(debounce(b, table));
  auto c = a;
  c.id = "evt-3";
  c.category = Category::drop;
  EXPECT_TRUE(debounce(c, table));
  table.close_topic("/scan");
  EXPECT_TRUE(debounce(b, table));
}

struct EngineRig {
  sim::MessageBus bus;
  fault::FaultInjector injector{bus};
  std::unique_ptr<DiagnosticsEngine> engine;

  void lidar(std::uint64_t seed = 42) {
    sim::spawn_sensor_source(bus, {"lidar_src", sim::SensorKind::lidar, "/scan", 10.0, {}, seed});
  }
  void fault(fault::ErrorType type, double value, Millis onset = 2000, std::uint64_t seed = 42) {
    fault::FaultSpec f;
    f.input_topic = "/scan";
    f.output_topic = "/scan_out";
    f.error_type = type;
    f.error_value = value;
    f.error_frequency = 1.0;
    f.seed = seed;
    fault::InjectorOptions o;
    o.active_from = SimTime{onset};
    injector.attach_injector(f, o);
  }
  void start() { engine = std::make_unique<DiagnosticsEngine>(bus); }
};

TEST(Engine, DropFiresAtOnsetPlusFivePeriods) {
  EngineRig rig;
  rig.lidar();
  rig.fault(fault::ErrorType::drop, 0);
  rig.start();
  rig.bus.advance(10'000);
  ASSERT_FALSE(rig.engine->events().empty());
  const auto& e = rig.engine->events().front();
  EXPECT_EQ(e.category, Category::drop);
  EXPECT_EQ(e.topic, "/scan_out");
  EXPECT_EQ(e.suspected_node, "lidar_src");
  // Last arrival 1900 ms; the first tick with a gap above 500 ms is 2500 ms.
  EXPECT_EQ(e.time, SimTime{2500});
}

TEST(Engine, ConsumerStallUnderDropIsNotASecondEvent) {
  EngineRig rig;
  rig.lidar();
  rig.fault(fault::ErrorType::drop, 0);
  sim::spawn_consumer(rig.bus, {"scan_out_consumer", "/scan_out", 1000, ""});
  rig.start();
  rig.bus.advance(10'000);
  ASSERT_EQ(rig.engine->events().size(), 1U);
  EXPECT_EQ(rig.engine->events().front().category, Category::drop);
}

TEST(Engine, ConsumerStallUnderCrashIsNotASecondEvent) {
  EngineRig rig;
  rig.lidar();
  sim::spawn_consumer(rig.bus, {"scan_consumer", "/scan", 1000, ""});
  rig.start();
  rig.injector.schedule_crash({"lidar_src", SimTime{5000}});
  rig.bus.advance(10'000);
  ASSERT_EQ(rig.engine->events().size(), 1U);
  EXPECT_EQ(rig.engine->events().front().category, Category::node_crash);
}

TEST(Engine, ConsumerStallWithoutEpisodeIsLogError) {
  EngineRig rig;
  rig.lidar();
  sim::spawn_consumer(rig.bus, {"odom_consumer", "/odom", 1000, ""});
  rig.start();
  rig.bus.advance(3000);
  ASSERT_EQ(rig.engine->events().size(), 1U);
  EXPECT_EQ(rig.engine->events().front().category, Category::log_error);
  EXPECT_EQ(rig.engine->events().front().topic, "/odom");
}

TEST(Engine, DelayFiresOnThirdStaleMessage) {
  EngineRig rig;
  rig.lidar();
  rig.fault(fault::ErrorType::delay, 500);
  rig.start();
  rig.bus.advance(10'000);
  std::vector<DiagnosisEvent> delays;
  for (const auto& e : rig.engine->events()) {
    if (e.category == Category::delay) delays.push_back(e);
  }
  ASSERT_EQ(delays.size(), 1U);
  // Held messages stamped 2000, 2100, 2200 arrive at 2500, 2600, 2700.
  EXPECT_EQ(delays[0].time, SimTime{2700});
  EXPECT_EQ(delays[0].evidence["staleness_ms"], 500);
  EXPECT_EQ(delays[0].topic, "/scan_out");
}

TEST(Engine, CrashIsNotDrop) {
  EngineRig rig;
  rig.lidar();
  rig.start();
  rig.injector.schedule_crash({"lidar_src", SimTime{5000}});
  rig.bus.advance(10'000);
  ASSERT_EQ(rig.engine->events().size(), 1U);
  const auto& e = rig.engine->events().front();
  EXPECT_EQ(e.category, Category::node_crash);
  EXPECT_EQ(e.suspected_node, "lidar_src");
  EXPECT_EQ(e.time, SimTime{5000});
}

// Scripted fault-on / off / on: a node publishes zero-filled scans during the
// two fault windows and healthy scans otherwise.
TEST(Engine, CorruptRecoverCorruptYieldsTwoEvents) {
  sim::MessageBus bus;
  bus.register_node("lidar_src");
  bus.declare_publisher("lidar_src", "/scan");
  bus.declare_period("/scan", 100);
  auto scan = healthy_scan();
  auto zeros = scan;
  std::fill(zeros.ranges.begin(), zeros.ranges.end(), 0.0F);
  bus.add_timer("lidar_src", 100, [&] {
    const auto t = bus.now().millis;
    const bool faulty = (t >= 1000 && t < 1500) || (t >= 4000 && t < 4500);
    bus.publish("lidar_src", "/scan", faulty ? zeros : scan);
  });
  DiagnosticsEngine engine(bus);
  bus.advance(6000);
  ASSERT_EQ(engine.events().size(), 2U);
  EXPECT_EQ(engine.events()[0].time, SimTime{1000});
  EXPECT_EQ(engine.events()[1].time, SimTime{4000});
  for (const auto& e : engine.events()) EXPECT_EQ(e.category, Category::corrupt);
  EXPECT_FALSE(engine.is_open(engine.events()[0].id));
  EXPECT_FALSE(engine.is_open(engine.events()[1].id));  // recovered by 5500
}

TEST(Engine, ShortCorruptionWithoutRecoveryIsOneEvent) {
  sim::MessageBus bus;
  bus.register_node("lidar_src");
  bus.declare_publisher("lidar_src", "/scan");
  bus.declare_period("/scan", 100);
  auto scan = healthy_scan();
  auto zeros = scan;
  std::fill(zeros.ranges.begin(), zeros.ranges.end(), 0.0F);
  // Clean gaps of 5 messages are shorter than the recovery window.
  bus.add_timer("lidar_src", 100, [&] {
    const auto k = bus.now().millis / 100;
    bus.publish("lidar_src", "/scan", (k / 5) % 2 == 0 ? zeros : scan);
  });
  DiagnosticsEngine engine(bus);
  bus.advance(5000);
  EXPECT_EQ(engine.events().size(), 1U);
}

TEST(Engine, ManualResolveReopensDetection) {
  EngineRig rig;
  rig.lidar();
  rig.fault(fault::ErrorType::corrupted, 1.0);
  rig.start();
  rig.bus.advance(3000);
  ASSERT_EQ(rig.engine->events().size(), 1U);
  const auto id = rig.engine->events()[0].id;
  EXPECT_TRUE(rig.engine->is_open(id));
  rig.engine->resolve(id);
  EXPECT_FALSE(rig.engine->is_open(id));
  EXPECT_THROW(rig.engine->resolve("evt-9999"), Error);
}

TEST(Engine, ReplayingIdenticalRunGivesIdenticalEvents) {
  auto run = [] {
    EngineRig rig;
    rig.lidar(9);
    rig.fault(fault::ErrorType::delay, 350, 1500, 9);
    rig.start();
    rig.bus.advance(8000);
    nlohmann::json all = nlohmann::json::array();
    for (const auto& e : rig.engine->events()) all.push_back(to_json(e));
    return all.dump();
  };
  EXPECT_EQ(run(), run());
}

TEST(DetectorConfig, ParsesAndValidates) {
  const auto c = parse_detector_config("delay_factor: 4\ndelay_sustain_messages: 2\nexception_patterns: [boom]\n");
  EXPECT_DOUBLE_EQ(c.delay_factor, 4.0);
  EXPECT_EQ(c.delay_sustain, 2);
  EXPECT_EQ(c.exception_patterns, std::vector<std::string>{"boom"});
  EXPECT_THROW(parse_detector_config("drop_factor: -1\n"), Error);
  EXPECT_THROW(parse_detector_config("mystery: 1\n"), Error);
}

TEST(EventJson, RoundTrip) {
  DiagnosisEvent e;
  e.id = "evt-0001";
  e.time = SimTime{1234};
  e.topic = "/scan_out";
  e.suspected_node = "lidar_src";
  e.category = Category::delay;
  e.evidence = {{"staleness_ms", 500}};
  e.confidence = 0.85;
  const auto back = event_from_json(to_json(e));
  EXPECT_EQ(to_json(back), to_json(e));
}

}  // namespace
}  // namespace helpdesk::diag
