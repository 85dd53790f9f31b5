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

#include "helpdesk/fault/fault.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/hash.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::fault {
namespace {

constexpr std::uint64_t kInjectorStream = 0x464c5421;  // "FLT!"

const std::set<std::string, std::less<>> kFaultKeys = {
    "sensor_kind", "message_type", "input_topic",     "output_topic",
    "error_type",  "error_value",  "error_frequency", "seed"};
const std::set<std::string, std::less<>> kCrashKeys = {"node_id", "at_time_ms"};

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(Errc::validation_error, field + ": " + why, field);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) invalid(field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    invalid(field, "cannot convert '" + node.Scalar() + "'");
  }
}

void reject_unknown(const YAML::Node& map, const std::set<std::string, std::less<>>& allowed,
                    const std::string& where) {
  if (!map.IsMap()) invalid(where, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) invalid(key, "unknown key in " + where);
  }
}

std::string normalize_message_type(std::string_view text) {
  auto slash = text.find_last_of('/');
  return std::string(slash == std::string_view::npos ? text : text.substr(slash + 1));
}

ErrorType parse_error_type(const std::string& text) {
  if (text == "corrupted") return ErrorType::corrupted;
  if (text == "drop") return ErrorType::drop;
  if (text == "delay") return ErrorType::delay;
  invalid("error_type", "invalid value '" + text + "' (allowed: corrupted|drop|delay)");
}

FaultSpec parse_fault(const YAML::Node& node) {
  reject_unknown(node, kFaultKeys, "fault");
  auto required = [&](const char* key) {
    if (!node[key]) invalid(key, "missing required key");
    return node[key];
  };
  FaultSpec spec;
  spec.sensor_kind = sim::parse_sensor_kind(scalar<std::string>(required("sensor_kind"), "sensor_kind"));
  spec.message_type = normalize_message_type(scalar<std::string>(required("message_type"), "message_type"));
  spec.input_topic = canonical_topic(scalar<std::string>(required("input_topic"), "input_topic"));
  spec.output_topic = canonical_topic(scalar<std::string>(required("output_topic"), "output_topic"));
  spec.error_type = parse_error_type(scalar<std::string>(required("error_type"), "error_type"));
  if (node["error_value"]) {
    spec.error_value = scalar<double>(node["error_value"], "error_value");
  } else if (spec.error_type != ErrorType::drop) {
    invalid("error_value", "missing required key");
  }
  spec.error_frequency = scalar<double>(required("error_frequency"), "error_frequency");
  if (node["seed"]) spec.seed = scalar<std::uint64_t>(node["seed"], "seed");
  validate(spec);
  return spec;
}

NodeCrashSpec parse_crash(const YAML::Node& node) {
  reject_unknown(node, kCrashKeys, "crash");
  if (!node["node_id"]) invalid("node_id", "missing required key");
  if (!node["at_time_ms"]) invalid("at_time_ms", "missing required key");
  NodeCrashSpec spec;
  spec.node_id = canonical_node(scalar<std::string>(node["node_id"], "node_id"));
  if (spec.node_id.empty()) invalid("node_id", "must be non-empty");
  const auto at = scalar<Millis>(node["at_time_ms"], "at_time_ms");
  if (at < 0) invalid("at_time_ms", "must be >= 0");
  spec.at_time = SimTime{at};
  return spec;
}

}  // namespace

std::string_view to_string(ErrorType type) noexcept {
  switch (type) {
    case ErrorType::corrupted: return "corrupted";
    case ErrorType::drop: return "drop";
    case ErrorType::delay: return "delay";
  }
  return "drop";
}

void validate(const FaultSpec& spec) {
  if (spec.input_topic.empty()) invalid("input_topic", "must be non-empty");
  if (spec.output_topic.empty()) invalid("output_topic", "must be non-empty");
  if (canonical_topic(spec.input_topic) == canonical_topic(spec.output_topic)) {
    invalid("output_topic", "must differ from input_topic");
  }
  if (!(spec.error_frequency >= 0.0 && spec.error_frequency <= 1.0)) {
    invalid("error_frequency", fmt::format("{} outside [0, 1]", spec.error_frequency));
  }
  if (!std::isfinite(spec.error_value) && spec.error_type != ErrorType::corrupted) {
    invalid("error_value", "must be finite");
  }
  if (spec.error_type == ErrorType::delay && !(spec.error_value > 0.0)) {
    invalid("error_value", "delay must be > 0 ms");
  }
  const auto expected = spec.sensor_kind == sim::SensorKind::lidar ? "LaserScan" : "Image";
  if (spec.message_type != expected) {
    invalid("message_type", fmt::format("'{}' inconsistent with sensor_kind {} (expected {})",
                                        spec.message_type, sim::to_string(spec.sensor_kind),
                                        expected));
  }
}

FaultConfig parse_fault_config(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse_error, std::string("fault config: ") + e.what());
  }
  FaultConfig config;
  if (root.IsNull()) return config;
  if (!root.IsMap()) throw Error(Errc::parse_error, "fault config: expected a mapping at top level");
  if (root["error_type"]) {
    config.faults.push_back(parse_fault(root));
    return config;
  }
  reject_unknown(root, {"faults", "crashes"}, "fault config");
  if (auto faults = root["faults"]) {
    if (!faults.IsSequence()) invalid("faults", "expected a list");
    for (const auto& f : faults) config.faults.push_back(parse_fault(f));
  }
  if (auto crashes = root["crashes"]) {
    if (!crashes.IsSequence()) invalid("crashes", "expected a list");
    for (const auto& c : crashes) config.crashes.push_back(parse_crash(c));
  }
  return config;
}

std::string_view action_name(const FaultAction& action) noexcept {
  switch (action.index()) {
    case 0: return "pass";
    case 1: return "corrupt";
    case 2: return "delay";
    default: return "drop";
  }
}

sim::Payload corrupt_payload(const sim::Payload& payload, double value) {
  sim::Payload out = payload;
  if (auto* scan = std::get_if<sim::LaserScan>(&out)) {
    std::fill(scan->ranges.begin(), scan->ranges.end(), static_cast<float>(value));
  } else if (auto* img = std::get_if<sim::Image>(&out)) {
    const double clamped = std::isfinite(value) ? std::clamp(std::round(value), 0.0, 255.0) : 0.0;
    std::fill(img->pixels.begin(), img->pixels.end(), static_cast<std::uint8_t>(clamped));
  } else {
    throw Error(Errc::type_mismatch, "cannot corrupt a LogEntry");
  }
  return out;
}

FaultAction decide_action(const FaultSpec& spec, const sim::Message& msg, double trigger_draw,
                          SimTime now) {
  if (sim::payload_type_name(msg.payload) != spec.message_type) {
    throw Error(Errc::type_mismatch,
                fmt::format("injector expects {} but got {}", spec.message_type,
                            sim::payload_type_name(msg.payload)));
  }
  if (trigger_draw >= spec.error_frequency) return Pass{};
  switch (spec.error_type) {
    case ErrorType::corrupted: return Corrupt{corrupt_payload(msg.payload, spec.error_value)};
    case ErrorType::delay: return Delay{now + std::llround(spec.error_value)};
    case ErrorType::drop: return Drop{};
  }
  return Pass{};
}

void write_ledger_jsonl(std::ostream& out, const std::vector<LedgerEntry>& ledger) {
  for (const auto& e : ledger) {
    nlohmann::ordered_json line;
    line["t"] = e.t.millis;
    line["seq"] = e.seq;
    line["action"] = e.action;
    out << line.dump() << '\n';
  }
}

std::string FaultInjector::attach_injector(const FaultSpec& spec, const InjectorOptions& options) {
  validate(spec);
  for (const auto& [_, inj] : injectors_) {
    if (inj->spec.input_topic == spec.input_topic && inj->spec.output_topic == spec.output_topic) {
      throw Error(Errc::conflict, fmt::format("an injector already relays {} -> {}",
                                              spec.input_topic, spec.output_topic));
    }
  }
  if (bus_->publishers_of(spec.input_topic).empty()) {
    throw Error(Errc::invalid_argument, "input topic " + spec.input_topic + " has no publisher",
                "input_topic");
  }
  std::string name = options.name;
  if (name.empty()) {
    const std::string base =
        spec.sensor_kind == sim::SensorKind::lidar ? "laser_fault_injector" : "image_fault_injector";
    name = base;
    for (int i = 2; bus_->has_node(name); ++i) name = fmt::format("{}_{}", base, i);
  }

  auto& rec = bus_->register_node(
      name, fmt::format("Fault injector: subscribes to {}, applies '{}' faults (error value {}, "
                        "frequency {}) and republishes the stream on {}.",
                        spec.input_topic, to_string(spec.error_type), spec.error_value,
                        spec.error_frequency, spec.output_topic));
  rec.source_path = options.source_path;
  bus_->declare_relay(rec.name, spec.input_topic, spec.output_topic);

  auto inj = std::make_unique<Injector>();
  inj->spec = spec;
  Injector* state = inj.get();
  injectors_.emplace(rec.name, std::move(inj));

  auto* bus = bus_;
  const auto node = rec.name;
  const auto active_from = options.active_from;
  bus_->subscribe(node, spec.input_topic, [bus, state, node, active_from](const sim::Message& msg,
                                                                          SimTime now) {
    FaultAction action = Pass{};
    if (now >= active_from) {
      const double draw = to_unit(counter_draw(state->spec.seed, kInjectorStream, state->draws++));
      action = decide_action(state->spec, msg, draw, now);
    }
    state->ledger.push_back(LedgerEntry{now, msg.seq, std::string(action_name(action))});
    const auto& out_topic = state->spec.output_topic;
    std::visit(
        [&](auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, Pass>) {
            bus->forward(node, out_topic, msg);
          } else if constexpr (std::is_same_v<A, Corrupt>) {
            sim::Message corrupted = msg;
            corrupted.payload = std::move(a.payload);
            bus->forward(node, out_topic, corrupted);
          } else if constexpr (std::is_same_v<A, Delay>) {
            bus->schedule_at(node, a.due, [bus, node, out_topic, held = msg] {
              bus->forward(node, out_topic, held);
            });
          }
        },
        action);
  });
  return node;
}

CrashReceipt FaultInjector::schedule_crash(const NodeCrashSpec& spec) {
  if (!bus_->has_node(spec.node_id)) {
    throw Error(Errc::unknown_node, "unknown node '" + spec.node_id + "'", "node_id");
  }
  if (run_duration_ && spec.at_time.millis > *run_duration_) {
    invalid("at_time_ms", fmt::format("{} beyond run duration {}", spec.at_time.millis, *run_duration_));
  }
  if (spec.at_time < bus_->now()) invalid("at_time_ms", "in the past");
  auto* bus = bus_;
  const auto node = spec.node_id;
  bus_->schedule_at(sim::kSupervisor, spec.at_time, [bus, node] { bus->kill_node(node); },
                    sim::Phase::late);
  return CrashReceipt{spec.node_id, spec.at_time};
}

const std::vector<LedgerEntry>& FaultInjector::ledger(std::string_view node) const {
  auto it = injectors_.find(canonical_node(node));
  if (it == injectors_.end()) throw Error(Errc::not_found, "no injector named '" + std::string(node) + "'");
  return it->second->ledger;
}

std::vector<std::string> FaultInjector::injectors() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : injectors_) out.push_back(name);
  return out;
}

}  // namespace helpdesk::fault
