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
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/sim/bus.hpp"

namespace helpdesk::diag {

using sim::Millis;
using sim::SimTime;

enum class Category { drop, delay, corrupt, node_crash, log_error };

std::string_view to_string(Category c) noexcept;
Category parse_category(std::string_view text);

enum class Episode { healthy, stalled, dropping, delayed, corrupted };

std::string_view to_string(Episode e) noexcept;

/// Detector thresholds. Defaults separate a 500 ms hold from scheduling jitter
/// at 10 Hz and tolerate isolated outliers in a scan.
struct DetectorConfig {
  double delay_factor = 3.0;       // staleness threshold, x nominal period
  int delay_sustain = 3;           // consecutive stale messages
  double drop_factor = 5.0;        // silence threshold, x nominal period
  double repeated_fraction = 0.95;
  double invalid_fraction = 0.2;
  double blank_variance = 1.0;     // byte units
  int recovery_messages = 10;
  int learn_window = 20;           // inter-arrivals used when no rate is declared
  std::vector<std::string> exception_patterns = {"Traceback", "exception", "died"};
};

DetectorConfig parse_detector_config(std::string_view yaml_text);

struct Clean {};
struct RepeatedValues {
  double fraction = 0.0;
};
struct Blank {
  double variance = 0.0;
};
struct InvalidValues {
  double fraction = 0.0;
};
using ContentVerdict = std::variant<Clean, RepeatedValues, Blank, InvalidValues>;

std::string_view verdict_name(const ContentVerdict& v) noexcept;

/// Payload sanity check. Precedence: InvalidValues > Blank > RepeatedValues.
ContentVerdict check_content(const sim::Payload& payload, const DetectorConfig& config = {});

struct DiagnosisEvent {
  std::string id;  // assigned when the event survives debouncing
  SimTime time;
  std::string topic;
  std::string suspected_node;
  Category category = Category::log_error;
  nlohmann::json evidence = nlohmann::json::object();
  double confidence = 0.0;
};

nlohmann::json to_json(const DiagnosisEvent& e);
DiagnosisEvent event_from_json(const nlohmann::json& j);
void write_events_jsonl(std::ostream& out, const std::vector<DiagnosisEvent>& events);

struct TopicHealth {
  std::string topic;
  std::optional<Millis> nominal_period;
  std::string source_node;  // upstream publisher after walking relays
  std::string sensor;       // lidar | camera, once a message was seen
  SimTime monitor_start;
  std::optional<SimTime> last_arrival;
  std::optional<SimTime> last_stamp;
  double ewma_period = 0.0;
  Episode episode = Episode::healthy;
  int stale_run = 0;
  int clean_run = 0;
  std::uint64_t seen = 0;
  std::vector<Millis> learn_samples;
};

struct ObserveResult {
  TopicHealth state;
  std::optional<DiagnosisEvent> event;
  bool clean_on_time = false;
  bool recovered = false;  // episode closed by this message
};

ObserveResult observe_message(TopicHealth state, const sim::Message& msg, SimTime now,
                              const DetectorConfig& config = {});

using LivenessView = std::function<bool(std::string_view node)>;

struct SilenceResult {
  TopicHealth state;
  std::optional<DiagnosisEvent> event;
};

SilenceResult check_silence(TopicHealth state, SimTime now, const LivenessView& alive,
                            const DetectorConfig& config = {});

std::optional<DiagnosisEvent> classify_log(const sim::LogEntry& entry, SimTime now,
                                           const DetectorConfig& config = {});

/// Open diagnosis episodes. node_crash episodes are keyed by node so every
/// topic silenced by the same crash maps onto one episode.
class EpisodeTable {
 public:
  static std::string key_of(const DiagnosisEvent& e);

  bool is_open(const std::string& key) const { return open_.contains(key); }
  bool event_open(std::string_view event_id) const;
  void open(const DiagnosisEvent& e) { open_[key_of(e)] = e.id; }
  /// Closes every episode on `topic`; returns the closed event ids.
  std::vector<std::string> close_topic(std::string_view topic);
  std::vector<std::string> close_node_crash(std::string_view node);
  bool close_event(std::string_view event_id);
  std::size_t size() const noexcept { return open_.size(); }

 private:
  std::map<std::string, std::string> open_;  // key -> event id
};

/// Passes `event` (and opens its episode) unless the same episode is open.
std::optional<DiagnosisEvent> debounce(DiagnosisEvent event, EpisodeTable& table);

/// Log Monitor + Sensor Diagnostic nodes attached to one bus.
class DiagnosticsEngine {
 public:
  using Listener = std::function<void(const DiagnosisEvent&)>;

  /// Monitors `topics`; when empty, every topic with a declared rate.
  DiagnosticsEngine(sim::MessageBus& bus, DetectorConfig config = {},
                    std::vector<std::string> topics = {});
  DiagnosticsEngine(const DiagnosticsEngine&) = delete;
  DiagnosticsEngine& operator=(const DiagnosticsEngine&) = delete;

  void set_listener(Listener listener) { listener_ = std::move(listener); }

  const std::vector<DiagnosisEvent>& events() const noexcept { return events_; }
  const DiagnosisEvent* find(std::string_view event_id) const;
  bool is_open(std::string_view event_id) const { return episodes_.event_open(event_id); }
  /// Manual resolution closes the event's episode.
  void resolve(std::string_view event_id);

  const TopicHealth& health(std::string_view topic) const;
  std::vector<std::string> monitored_topics() const;
  Millis watchdog_period() const noexcept { return watchdog_; }
  const DetectorConfig& config() const noexcept { return config_; }

 private:
  void on_log(const sim::Message& msg, SimTime now);
  void on_sample(const sim::Message& msg, SimTime now);
  void on_watchdog();
  void emit(DiagnosisEvent event);
  /// True while `topic` is silent under an open drop episode or a crash of its source.
  bool silence_explains(const std::string& topic) const;

  struct CrashRecovery {
    std::string event_id;
    SimTime since;
    int clean = 0;
  };

  sim::MessageBus* bus_;
  DetectorConfig config_;
  std::map<std::string, TopicHealth, std::less<>> health_;
  EpisodeTable episodes_;
  std::map<std::string, CrashRecovery> crash_recovery_;  // by node
  std::vector<DiagnosisEvent> events_;
  Listener listener_;
  Millis watchdog_ = 100;
  std::uint64_t next_event_ = 1;
};

}  // namespace helpdesk::diag
