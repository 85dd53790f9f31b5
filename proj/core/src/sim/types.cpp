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

#include "helpdesk/sim/types.hpp"

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/hash.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::sim {

std::string_view to_string(LogLevel level) noexcept {
  switch (level) {
    case LogLevel::debug: return "DEBUG";
    case LogLevel::info: return "INFO";
    case LogLevel::warn: return "WARN";
    case LogLevel::error: return "ERROR";
    case LogLevel::fatal: return "FATAL";
  }
  return "INFO";
}

LogLevel parse_log_level(std::string_view text) {
  auto t = to_lower(text);
  if (t == "debug") return LogLevel::debug;
  if (t == "info") return LogLevel::info;
  if (t == "warn" || t == "warning") return LogLevel::warn;
  if (t == "error") return LogLevel::error;
  if (t == "fatal") return LogLevel::fatal;
  throw Error(Errc::validation_error,
              "invalid log level '" + std::string(text) + "' (allowed: DEBUG|INFO|WARN|ERROR|FATAL)",
              "level");
}

std::string_view payload_type_name(const Payload& payload) noexcept {
  switch (payload.index()) {
    case 0: return "LogEntry";
    case 1: return "LaserScan";
    default: return "Image";
  }
}

std::uint64_t payload_digest(const Payload& payload) noexcept {
  Fnv1a h;
  h.update_value(static_cast<std::uint8_t>(payload.index()));
  if (const auto* log = std::get_if<LogEntry>(&payload)) {
    h.update_value(static_cast<std::uint8_t>(log->level));
    h.update(log->node);
    h.update_value(std::uint8_t{0});
    h.update(log->text);
  } else if (const auto* scan = std::get_if<LaserScan>(&payload)) {
    h.update_value(scan->angle_min);
    h.update_value(scan->angle_max);
    h.update_value(scan->range_min);
    h.update_value(scan->range_max);
    h.update(std::as_bytes(std::span(scan->ranges)));
  } else if (const auto* img = std::get_if<Image>(&payload)) {
    h.update_value(img->width);
    h.update_value(img->height);
    h.update_value(img->channels);
    h.update(std::as_bytes(std::span(img->pixels)));
  }
  return h.value();
}

}  // namespace helpdesk::sim
