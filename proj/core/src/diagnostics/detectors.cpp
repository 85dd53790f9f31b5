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

#include <algorithm>
#include <cmath>
#include <regex>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"

namespace helpdesk::diag {
namespace {

template <typename T>
double most_common_fraction(std::vector<T> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t best = 1;
  std::size_t run = 1;
  for (std::size_t i = 1; i < values.size(); ++i) {
    run = values[i] == values[i - 1] ? run + 1 : 1;
    best = std::max(best, run);
  }
  return static_cast<double>(best) / static_cast<double>(values.size());
}

double variance(const std::vector<std::uint8_t>& px) {
  if (px.empty()) return 0.0;
  double mean = 0.0;
  for (auto v : px) mean += v;
  mean /= static_cast<double>(px.size());
  double acc = 0.0;
  for (auto v : px) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(px.size());
}

std::string sensor_of(const sim::Payload& p) {
  if (std::holds_alternative<sim::LaserScan>(p)) return "lidar";
  if (std::holds_alternative<sim::Image>(p)) return "camera";
  return {};
}

DiagnosisEvent make_event(const TopicHealth& s, SimTime now, Category c, double confidence) {
  DiagnosisEvent e;
  e.time = now;
  e.topic = s.topic;
  e.suspected_node = s.source_node;
  e.category = c;
  e.confidence = confidence;
  e.evidence["sensor"] = s.sensor;
  if (s.nominal_period) e.evidence["nominal_period_ms"] = *s.nominal_period;
  return e;
}

}  // namespace

std::string_view to_string(Category c) noexcept {
  switch (c) {
    case Category::drop: return "drop";
    case Category::delay: return "delay";
    case Category::corrupt: return "corrupt";
    case Category::node_crash: return "node_crash";
    case Category::log_error: return "log_error";
  }
  return "log_error";
}

Category parse_category(std::string_view text) {
  auto t = to_lower(text);
  if (t == "drop") return Category::drop;
  if (t == "delay") return Category::delay;
  if (t == "corrupt" || t == "corrupted") return Category::corrupt;
  if (t == "node_crash" || t == "crash") return Category::node_crash;
  if (t == "log_error") return Category::log_error;
  throw Error(Errc::validation_error,
              "invalid category '" + std::string(text) +
                  "' (allowed: drop|delay|corrupt|node_crash|log_error)",
              "category");
}

std::string_view to_string(Episode e) noexcept {
  switch (e) {
    case Episode::healthy: return "Healthy";
    case Episode::stalled: return "Stalled";
    case Episode::dropping: return "Dropping";
    case Episode::delayed: return "Delayed";
    case Episode::corrupted: return "Corrupted";
  }
  return "Healthy";
}

DetectorConfig parse_detector_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse_error, std::string("detector config: ") + e.what());
  }
  DetectorConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw Error(Errc::parse_error, "detector config: expected a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    try {
      if (key == "delay_factor") c.delay_factor = v.as<double>();
      else if (key == "delay_sustain_messages") c.delay_sustain = v.as<int>();
      else if (key == "drop_factor") c.drop_factor = v.as<double>();
      else if (key == "repeated_fraction") c.repeated_fraction = v.as<double>();
      else if (key == "invalid_fraction") c.invalid_fraction = v.as<double>();
      else if (key == "blank_variance") c.blank_variance = v.as<double>();
      else if (key == "recovery_messages") c.recovery_messages = v.as<int>();
      else if (key == "learn_window") c.learn_window = v.as<int>();
      else if (key == "exception_patterns") c.exception_patterns = v.as<std::vector<std::string>>();
      else throw Error(Errc::validation_error, key + ": unknown key in detector config", key);
    } catch (const YAML::Exception&) {
      throw Error(Errc::validation_error, key + ": bad value", key);
    }
  }
  if (c.delay_factor <= 0 || c.drop_factor <= 0 || c.delay_sustain < 1 || c.recovery_messages < 1 ||
      c.learn_window < 1) {
    throw Error(Errc::validation_error, "detector thresholds must be positive");
  }
  return c;
}

std::string_view verdict_name(const ContentVerdict& v) noexcept {
  switch (v.index()) {
    case 0: return "Clean";
    case 1: return "RepeatedValues";
    case 2: return "Blank";
    default: return "InvalidValues";
  }
}

ContentVerdict check_content(const sim::Payload& payload, const DetectorConfig& config) {
  if (const auto* scan = std::get_if<sim::LaserScan>(&payload)) {
    if (scan->ranges.empty()) return Clean{};
    const auto n = static_cast<double>(scan->ranges.size());
    const auto invalid = std::count_if(scan->ranges.begin(), scan->ranges.end(), [&](float r) {
      return !std::isfinite(r) || r < scan->range_min || r > scan->range_max;
    });
    const double invalid_frac = static_cast<double>(invalid) / n;
    if (invalid_frac > config.invalid_fraction) return InvalidValues{invalid_frac};
    const double repeated = most_common_fraction(scan->ranges);
    if (repeated >= config.repeated_fraction) return RepeatedValues{repeated};
    return Clean{};
  }
  if (const auto* img = std::get_if<sim::Image>(&payload)) {
    const double var = variance(img->pixels);
    if (var < config.blank_variance) return Blank{var};
    const double repeated = most_common_fraction(img->pixels);
    if (repeated >= config.repeated_fraction) return RepeatedValues{repeated};
    return Clean{};
  }
  return Clean{};
}

ObserveResult observe_message(TopicHealth s, const sim::Message& msg, SimTime now,
                              const DetectorConfig& config) {
  ObserveResult out;
  ++s.seen;
  if (s.sensor.empty()) s.sensor = sensor_of(msg.payload);
  if (s.last_arrival) {
    const auto interval = static_cast<double>(now - *s.last_arrival);
    s.ewma_period = s.seen <= 2 ? interval : 0.8 * s.ewma_period + 0.2 * interval;
    if (!s.nominal_period && static_cast<int>(s.learn_samples.size()) < config.learn_window) {
      s.learn_samples.push_back(now - *s.last_arrival);
      if (static_cast<int>(s.learn_samples.size()) == config.learn_window) {
        auto sorted = s.learn_samples;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        s.nominal_period = std::max<Millis>(1, sorted[sorted.size() / 2]);
      }
    }
  }
  s.last_arrival = now;
  s.last_stamp = msg.stamp;
  const Millis staleness = now - msg.stamp;

  const auto verdict = check_content(msg.payload, config);
  if (!std::holds_alternative<Clean>(verdict)) {
    s.clean_run = 0;
    s.stale_run = 0;
    if (s.episode != Episode::corrupted) {
      s.episode = Episode::corrupted;
      double fraction = 1.0;
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, RepeatedValues> || std::is_same_v<V, InvalidValues>) {
              fraction = v.fraction;
            }
          },
          verdict);
      auto e = make_event(s, now, Category::corrupt, std::max(0.5, fraction));
      e.evidence["verdict"] = std::string(verdict_name(verdict));
      if (const auto* b = std::get_if<Blank>(&verdict)) {
        e.evidence["pixel_variance"] = b->variance;
      } else {
        e.evidence["fraction"] = fraction;
      }
      e.evidence["seq"] = msg.seq;
      out.event = std::move(e);
    }
  } else if (s.nominal_period &&
             static_cast<double>(staleness) > config.delay_factor * static_cast<double>(*s.nominal_period)) {
    s.clean_run = 0;
    ++s.stale_run;
    if (s.stale_run >= config.delay_sustain && s.episode != Episode::delayed) {
      s.episode = Episode::delayed;
      auto e = make_event(s, now, Category::delay, 0.85);
      e.evidence["staleness_ms"] = staleness;
      e.evidence["delay_threshold_ms"] =
          static_cast<Millis>(config.delay_factor * static_cast<double>(*s.nominal_period));
      e.evidence["stale_messages"] = s.stale_run;
      out.event = std::move(e);
    }
  } else {
    s.stale_run = 0;
    ++s.clean_run;
    out.clean_on_time = true;
    if (s.episode != Episode::healthy && s.clean_run >= config.recovery_messages) {
      s.episode = Episode::healthy;
      out.recovered = true;
    }
  }
  out.state = std::move(s);
  return out;
}

SilenceResult check_silence(TopicHealth s, SimTime now, const LivenessView& alive,
                            const DetectorConfig& config) {
  SilenceResult out;
  if (s.nominal_period) {
    const SimTime ref = s.last_arrival.value_or(s.monitor_start);
    const Millis gap = now - ref;
    const auto threshold =
        static_cast<Millis>(config.drop_factor * static_cast<double>(*s.nominal_period));
    if (gap > threshold && s.episode != Episode::dropping && s.episode != Episode::stalled) {
      const bool dead = !s.source_node.empty() && alive && !alive(s.source_node);
      s.episode = dead ? Episode::stalled : Episode::dropping;
      s.clean_run = 0;
      s.stale_run = 0;
      auto e = make_event(s, now, dead ? Category::node_crash : Category::drop, dead ? 0.95 : 0.8);
      e.evidence["gap_ms"] = gap;
      e.evidence["drop_threshold_ms"] = threshold;
      e.evidence["last_arrival_ms"] = ref.millis;
      e.evidence["source_alive"] = !dead;
      out.event = std::move(e);
    }
  }
  out.state = std::move(s);
  return out;
}

std::optional<DiagnosisEvent> classify_log(const sim::LogEntry& entry, SimTime now,
                                           const DetectorConfig& config) {
  using sim::LogLevel;
  if (entry.level == LogLevel::info || entry.level == LogLevel::debug) return std::nullopt;
  const auto lowered = to_lower(entry.text);
  const bool pattern_hit =
      std::any_of(config.exception_patterns.begin(), config.exception_patterns.end(),
                  [&](const std::string& p) { return lowered.find(to_lower(p)) != std::string::npos; });
  if (entry.level == LogLevel::warn && !pattern_hit) return std::nullopt;

  DiagnosisEvent e;
  e.time = now;
  e.evidence["log_level"] = std::string(sim::to_string(entry.level));
  e.evidence["log_excerpt"] = entry.text;
  e.evidence["logger"] = entry.node;

  static const std::regex died(R"(process (?:has )?died[:\s]*\[?/?([A-Za-z0-9_]+))",
                               std::regex::icase);
  static const std::regex topic_re(R"((/[A-Za-z0-9_][A-Za-z0-9_/]*))");
  std::smatch m;
  if (entry.level == LogLevel::fatal && std::regex_search(entry.text, m, died)) {
    e.category = Category::node_crash;
    e.suspected_node = m[1].str();
    e.topic = std::string(sim::kRosout);
    e.confidence = 1.0;
    return e;
  }
  e.category = Category::log_error;
  e.suspected_node = entry.node;
  e.topic = std::regex_search(entry.text, m, topic_re) ? canonical_topic(m[1].str())
                                                      : std::string(sim::kRosout);
  e.confidence = 0.7;
  return e;
}

}  // namespace helpdesk::diag
