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

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"

namespace helpdesk::diag {

nlohmann::json to_json(const DiagnosisEvent& e) {
  return nlohmann::json{{"id", e.id},
                        {"time", e.time.millis},
                        {"topic", e.topic},
                        {"suspected_node", e.suspected_node},
                        {"category", std::string(to_string(e.category))},
                        {"evidence", e.evidence},
                        {"confidence", e.confidence}};
}

DiagnosisEvent event_from_json(const nlohmann::json& j) {
  DiagnosisEvent e;
  e.id = j.at("id").get<std::string>();
  e.time = SimTime{j.at("time").get<Millis>()};
  e.topic = j.at("topic").get<std::string>();
  e.suspected_node = j.at("suspected_node").get<std::string>();
  e.category = parse_category(j.at("category").get<std::string>());
  e.evidence = j.value("evidence", nlohmann::json::object());
  e.confidence = j.value("confidence", 0.0);
  return e;
}

void write_events_jsonl(std::ostream& out, const std::vector<DiagnosisEvent>& events) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

std::string EpisodeTable::key_of(const DiagnosisEvent& e) {
  if (e.category == Category::node_crash) return "node:" + e.suspected_node + "|node_crash";
  return "topic:" + e.topic + "|" + std::string(to_string(e.category));
}

bool EpisodeTable::event_open(std::string_view event_id) const {
  return std::any_of(open_.begin(), open_.end(), [&](const auto& kv) { return kv.second == event_id; });
}

std::vector<std::string> EpisodeTable::close_topic(std::string_view topic) {
  const auto prefix = "topic:" + std::string(topic) + "|";
  std::vector<std::string> closed;
  for (auto it = open_.begin(); it != open_.end();) {
    if (it->first.rfind(prefix, 0) == 0) {
      closed.push_back(it->second);
      it = open_.erase(it);
    } else {
      ++it;
    }
  }
  return closed;
}

std::vector<std::string> EpisodeTable::close_node_crash(std::string_view node) {
  std::vector<std::string> closed;
  if (auto it = open_.find("node:" + std::string(node) + "|node_crash"); it != open_.end()) {
    closed.push_back(it->second);
    open_.erase(it);
  }
  return closed;
}

bool EpisodeTable::close_event(std::string_view event_id) {
  for (auto it = open_.begin(); it != open_.end(); ++it) {
    if (it->second == event_id) {
      open_.erase(it);
      return true;
    }
  }
  return false;
}

std::optional<DiagnosisEvent> debounce(DiagnosisEvent event, EpisodeTable& table) {
  if (table.is_open(EpisodeTable::key_of(event))) return std::nullopt;
  table.open(event);
  return event;
}

DiagnosticsEngine::DiagnosticsEngine(sim::MessageBus& bus, DetectorConfig config,
                                     std::vector<std::string> topics)
    : bus_(&bus), config_(std::move(config)) {
  if (topics.empty()) {
    for (const auto& t : bus.topics()) {
      if (bus.declared_period(t)) topics.push_back(t);
    }
  }
  std::optional<Millis> min_period;
  for (const auto& raw : topics) {
    TopicHealth h;
    h.topic = canonical_topic(raw);
    h.nominal_period = bus.declared_period(h.topic);
    h.source_node = bus.resolve_upstream(h.topic).value_or("");
    h.monitor_start = bus.now();
    if (h.nominal_period) min_period = std::min(min_period.value_or(*h.nominal_period), *h.nominal_period);
    health_.emplace(h.topic, std::move(h));
  }
  watchdog_ = min_period.value_or(100);

  bus.register_node("log_monitor", "Log Monitor: watches /rosout for errors, exceptions and crashes.");
  bus.subscribe("log_monitor", sim::kRosout, [this](const sim::Message& m, SimTime now) { on_log(m, now); });

  auto& diag = bus.register_node("sensor_diagnostics",
                                 "Sensor Diagnostic node: tracks rate, staleness and content of "
                                 "sensor topics.");
  for (const auto& [topic, _] : health_) {
    bus.subscribe(diag.name, topic, [this](const sim::Message& m, SimTime now) { on_sample(m, now); });
  }
  bus.add_timer(diag.name, watchdog_, [this] { on_watchdog(); }, sim::Phase::late);
}

void DiagnosticsEngine::emit(DiagnosisEvent event) {
  event.id = fmt::format("evt-{:04d}", next_event_);
  if (auto passed = debounce(std::move(event), episodes_)) {
    ++next_event_;
    if (passed->category == Category::node_crash) {
      crash_recovery_[passed->suspected_node] = CrashRecovery{passed->id, passed->time, 0};
    }
    events_.push_back(*passed);
    if (listener_) listener_(events_.back());
  }
}

void DiagnosticsEngine::on_log(const sim::Message& msg, SimTime now) {
  const auto* entry = std::get_if<sim::LogEntry>(&msg.payload);
  if (!entry) return;
  auto event = classify_log(*entry, now, config_);
  if (!event) return;
  // A consumer complaining about missing data on a topic already under a
  // drop or crash episode is a symptom of that episode, not a new fault.
  if (event->category == Category::log_error && silence_explains(event->topic)) return;
  if (event->category == Category::node_crash && bus_->has_node(event->suspected_node)) {
    // Point the crash at the first data topic the node fed.
    for (const auto& t : bus_->node(event->suspected_node).publishes) {
      if (t != sim::kRosout) {
        event->topic = t;
        break;
      }
    }
  }
  emit(std::move(*event));
}

bool DiagnosticsEngine::silence_explains(const std::string& topic) const {
  if (topic.empty()) return false;
  DiagnosisEvent probe;
  probe.topic = topic;
  probe.category = Category::drop;
  if (episodes_.is_open(EpisodeTable::key_of(probe))) return true;
  probe.category = Category::node_crash;
  probe.suspected_node = bus_->resolve_upstream(topic).value_or("");
  return !probe.suspected_node.empty() && episodes_.is_open(EpisodeTable::key_of(probe));
}

void DiagnosticsEngine::on_sample(const sim::Message& msg, SimTime now) {
  auto it = health_.find(msg.topic);
  if (it == health_.end()) return;
  auto result = observe_message(std::move(it->second), msg, now, config_);
  it->second = std::move(result.state);
  if (result.event) emit(std::move(*result.event));
  if (result.recovered) episodes_.close_topic(it->first);

  const auto& source = it->second.source_node;
  if (auto cr = crash_recovery_.find(source); cr != crash_recovery_.end() && result.clean_on_time &&
                                               msg.stamp > cr->second.since) {
    if (++cr->second.clean >= config_.recovery_messages) {
      episodes_.close_node_crash(source);
      crash_recovery_.erase(cr);
    }
  }
}

void DiagnosticsEngine::on_watchdog() {
  const auto now = bus_->now();
  auto alive = [this](std::string_view node) { return bus_->is_alive(node); };
  for (auto& [topic, h] : health_) {
    auto result = check_silence(std::move(h), now, alive, config_);
    h = std::move(result.state);
    if (result.event) emit(std::move(*result.event));
  }
}

const DiagnosisEvent* DiagnosticsEngine::find(std::string_view event_id) const {
  auto it = std::find_if(events_.begin(), events_.end(), [&](const auto& e) { return e.id == event_id; });
  return it == events_.end() ? nullptr : &*it;
}

void DiagnosticsEngine::resolve(std::string_view event_id) {
  const auto* e = find(event_id);
  if (!e) throw Error(Errc::not_found, "unknown event '" + std::string(event_id) + "'");
  episodes_.close_event(event_id);
  if (e->category == Category::node_crash) crash_recovery_.erase(e->suspected_node);
}

const TopicHealth& DiagnosticsEngine::health(std::string_view topic) const {
  auto it = health_.find(canonical_topic(topic));
  if (it == health_.end()) throw Error(Errc::not_found, "topic not monitored: " + std::string(topic));
  return it->second;
}

std::vector<std::string> DiagnosticsEngine::monitored_topics() const {
  std::vector<std::string> out;
  for (const auto& [t, _] : health_) out.push_back(t);
  return out;
}

}  // namespace helpdesk::diag
