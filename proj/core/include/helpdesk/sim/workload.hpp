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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "helpdesk/sim/bus.hpp"

namespace helpdesk::sim {

enum class SensorKind { lidar, camera };

std::string_view to_string(SensorKind kind) noexcept;
SensorKind parse_sensor_kind(std::string_view text);

/// Shape of generated payloads. Defaults follow a TurtleBot3-class LDS lidar
/// and a small RGB camera.
struct PayloadPattern {
  std::uint32_t beams = 360;
  float range_min = 0.12F;
  float range_max = 3.5F;
  std::uint32_t width = 64;
  std::uint32_t height = 48;
  std::uint32_t channels = 3;
};

struct SourceSpec {
  std::string name;  // defaults to "<kind>_src"
  SensorKind kind = SensorKind::lidar;
  std::string topic;
  double rate_hz = 10.0;
  PayloadPattern pattern;
  std::uint64_t seed = 0;
};

struct ConsumerSpec {
  std::string name;  // defaults to "<topic>_consumer"
  std::string topic;
  Millis stall_log_after = 1000;
  std::string source_path;
};

/// Pure payload generators; frame `index` of a seeded source is fixed.
LaserScan generate_scan(const PayloadPattern& pattern, std::uint64_t seed, std::uint64_t index);
Image generate_image(const PayloadPattern& pattern, std::uint64_t seed, std::uint64_t index);

Millis period_for_rate(double rate_hz);

/// Registers a node publishing seeded payloads every 1000/rate ms.
std::string spawn_sensor_source(MessageBus& bus, const SourceSpec& spec);

/// Registers a node that logs ERROR "no data on <topic>" once per stall
/// episode whenever nothing arrives for `stall_log_after` ms.
std::string spawn_consumer(MessageBus& bus, const ConsumerSpec& spec);

/// Workload section of a scenario file.
struct WorkloadSpec {
  std::vector<SourceSpec> sources;
  std::vector<ConsumerSpec> consumers;
  Millis duration = 10'000;
  std::uint64_t seed = 0;
};

}  // namespace helpdesk::sim
