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

#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace helpdesk::sim {

using Millis = std::int64_t;

/// Virtual time in milliseconds since simulation start.
struct SimTime {
  Millis millis = 0;

  constexpr auto operator<=>(const SimTime&) const = default;
  constexpr SimTime operator+(Millis d) const { return SimTime{millis + d}; }
  constexpr Millis operator-(SimTime other) const { return millis - other.millis; }
};

inline constexpr std::string_view kRosout = "/rosout";
inline constexpr std::string_view kSupervisor = "supervisor";

enum class LogLevel { debug, info, warn, error, fatal };

std::string_view to_string(LogLevel level) noexcept;
LogLevel parse_log_level(std::string_view text);

struct LogEntry {
  LogLevel level = LogLevel::info;
  std::string node;
  std::string text;

  bool operator==(const LogEntry&) const = default;
};

struct LaserScan {
  float angle_min = 0.0F;
  float angle_max = 0.0F;
  float range_min = 0.0F;
  float range_max = 0.0F;
  std::vector<float> ranges;

  bool operator==(const LaserScan&) const = default;
};

struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;
  std::vector<std::uint8_t> pixels;

  bool well_formed() const noexcept {
    return width > 0 && height > 0 && channels > 0 &&
           pixels.size() == static_cast<std::size_t>(width) * height * channels;
  }
  bool operator==(const Image&) const = default;
};

using Payload = std::variant<LogEntry, LaserScan, Image>;

std::string_view payload_type_name(const Payload& payload) noexcept;

/// Stable digest of the payload bytes (type tag + every field).
std::uint64_t payload_digest(const Payload& payload) noexcept;

struct Message {
  std::string topic;
  std::string publisher;
  std::uint64_t seq = 0;
  SimTime stamp;
  Payload payload;

  bool operator==(const Message&) const = default;
};

using MessagePtr = std::shared_ptr<const Message>;

}  // namespace helpdesk::sim
