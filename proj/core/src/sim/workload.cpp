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

#include "helpdesk/sim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::sim {
namespace {

// Stream ids separating the per-frame structure draw from per-element noise.
constexpr std::uint64_t kRoomStream = 0x524f4f4d;  // "ROOM"
constexpr std::uint64_t kNoiseStream = 0x4e4f4953;  // "NOIS"

double unit(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return to_unit(counter_draw(seed, stream, index));
}

}  // namespace

std::string_view to_string(SensorKind kind) noexcept {
  return kind == SensorKind::lidar ? "lidar" : "camera";
}

SensorKind parse_sensor_kind(std::string_view text) {
  if (text == "lidar") return SensorKind::lidar;
  if (text == "camera") return SensorKind::camera;
  throw Error(Errc::validation_error,
              "invalid sensor kind '" + std::string(text) + "' (allowed: lidar|camera)",
              "sensor_kind");
}

Millis period_for_rate(double rate_hz) {
  if (!(rate_hz > 0.0)) throw Error(Errc::invalid_argument, "rate must be > 0", "rate_hz");
  return std::max<Millis>(1, std::llround(1000.0 / rate_hz));
}

LaserScan generate_scan(const PayloadPattern& p, std::uint64_t seed, std::uint64_t index) {
  LaserScan scan;
  scan.angle_min = 0.0F;
  scan.angle_max = static_cast<float>(2.0 * std::numbers::pi);
  scan.range_min = p.range_min;
  scan.range_max = p.range_max;
  scan.ranges.resize(p.beams);

  // A rectangular room around the robot; its size is fixed per seed and the
  // robot drifts slowly, so consecutive frames are similar but not identical.
  const double half_w = 1.2 + 1.6 * unit(seed, kRoomStream, 0);
  const double half_h = 1.0 + 1.8 * unit(seed, kRoomStream, 1);
  const double drift = 0.002 * static_cast<double>(index % 200);
  const double span = p.range_max - p.range_min;
  for (std::uint32_t i = 0; i < p.beams; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / std::max<std::uint32_t>(p.beams, 1);
    const double c = std::abs(std::cos(theta));
    const double s = std::abs(std::sin(theta));
    const double to_x = c > 1e-9 ? (half_w - drift) / c : 1e9;
    const double to_y = s > 1e-9 ? (half_h + drift) / s : 1e9;
    const double noise = (unit(seed, kNoiseStream, index * p.beams + i) - 0.5) * 0.02 * span;
    const double r = std::min(to_x, to_y) + noise;
    scan.ranges[i] = static_cast<float>(std::clamp(r, static_cast<double>(p.range_min),
                                                   static_cast<double>(p.range_max)));
  }
  return scan;
}

Image generate_image(const PayloadPattern& p, std::uint64_t seed, std::uint64_t index) {
  Image img;
  img.width = p.width;
  img.height = p.height;
  img.channels = p.channels;
  img.pixels.resize(static_cast<std::size_t>(p.width) * p.height * p.channels);
  const auto base = static_cast<std::uint32_t>(counter_draw(seed, kRoomStream, 2) % 64);
  std::size_t k = 0;
  for (std::uint32_t y = 0; y < p.height; ++y) {
    for (std::uint32_t x = 0; x < p.width; ++x) {
      for (std::uint32_t c = 0; c < p.channels; ++c, ++k) {
        const auto noise =
            static_cast<std::uint32_t>(counter_draw(seed, kNoiseStream, index * img.pixels.size() + k) % 16);
        const auto v = base + x * 2 + y * 2 + c * 30 + static_cast<std::uint32_t>(index % 8) + noise;
        img.pixels[k] = static_cast<std::uint8_t>(std::min<std::uint32_t>(v, 255));
      }
    }
  }
  return img;
}

std::string spawn_sensor_source(MessageBus& bus, const SourceSpec& spec) {
  const auto period = period_for_rate(spec.rate_hz);
  const auto topic = canonical_topic(spec.topic);
  if (topic.empty()) throw Error(Errc::invalid_argument, "source topic must be non-empty", "topic");
  const auto name = spec.name.empty() ? std::string(to_string(spec.kind)) + "_src" : spec.name;
  const auto what = spec.kind == SensorKind::lidar ? "LaserScan" : "Image";
  auto& rec = bus.register_node(
      name, std::string("Simulated ") + std::string(to_string(spec.kind)) + " driver publishing " +
                what + " on " + topic + ".");
  rec.publishes.insert(topic);
  bus.declare_period(topic, period);

  auto frame = std::make_shared<std::uint64_t>(0);
  bus.add_timer(rec.name, period, [&bus, spec, topic, node = rec.name, frame] {
    const auto i = (*frame)++;
    if (spec.kind == SensorKind::lidar) {
      bus.publish(node, topic, generate_scan(spec.pattern, spec.seed, i));
    } else {
      bus.publish(node, topic, generate_image(spec.pattern, spec.seed, i));
    }
  });
  return rec.name;
}

std::string spawn_consumer(MessageBus& bus, const ConsumerSpec& spec) {
  if (spec.stall_log_after <= 0) {
    throw Error(Errc::invalid_argument, "stall_log_after must be > 0", "stall_log_after");
  }
  const auto topic = canonical_topic(spec.topic);
  auto name = spec.name;
  if (name.empty()) {
    name = topic.substr(topic.find_last_of('/') + 1) + "_consumer";
  }
  auto& rec = bus.register_node(name, "Downstream consumer of " + topic +
                                          "; logs an error when the feed stalls.");
  rec.source_path = spec.source_path;

  struct State {
    SimTime last_arrival;
    bool stalled = false;
  };
  auto state = std::make_shared<State>();
  state->last_arrival = bus.now();
  const auto after = spec.stall_log_after;
  const auto node = rec.name;

  // One pending check at a time, due exactly `after` ms past the last arrival.
  auto check = std::make_shared<std::function<void()>>();
  *check = [&bus, state, after, node, topic, weak = std::weak_ptr(check)] {
    if (state->stalled) return;
    const auto quiet = bus.now() - state->last_arrival;
    if (quiet >= after) {
      state->stalled = true;
      bus.log(node, LogLevel::error, "no data on " + topic);
      return;
    }
    if (auto self = weak.lock()) {
      bus.schedule_at(node, state->last_arrival + after, [self] { (*self)(); });
    }
  };
  bus.subscribe(node, topic, [state, &bus, node, after, check](const Message&, SimTime t) {
    const bool was_stalled = state->stalled;
    state->last_arrival = t;
    state->stalled = false;
    if (was_stalled) bus.schedule_at(node, t + after, [check] { (*check)(); });
  });
  bus.schedule_at(node, bus.now() + after, [check] { (*check)(); });
  bus.on_restart(node, [&bus, state, after, node, check] {
    state->last_arrival = bus.now();
    state->stalled = false;
    bus.schedule_at(node, bus.now() + after, [check] { (*check)(); });
  });
  return node;
}

}  // namespace helpdesk::sim
