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

#include "helpdesk/eval/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::eval {
namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw Error(Errc::scenario_config_error, field + ": " + why, field);
}

template <typename T>
T get(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) bad(field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    bad(field, "cannot convert '" + node.Scalar() + "'");
  }
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
  if (!map.IsMap()) bad(where, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) bad(key, "unknown key in " + where);
  }
}

sim::SourceSpec parse_source(const YAML::Node& n) {
  reject_unknown(n, {"name", "kind", "topic", "rate_hz", "seed", "beams", "range_min", "range_max", "width",
                     "height", "channels"},
                 "source");
  sim::SourceSpec s;
  if (!n["kind"]) bad("kind", "missing required key");
  try {
    s.kind = sim::parse_sensor_kind(get<std::string>(n["kind"], "kind"));
  } catch (const Error& e) {
    bad("kind", e.what());
  }
  if (!n["topic"]) bad("topic", "missing required key");
  s.topic = canonical_topic(get<std::string>(n["topic"], "topic"));
  if (n["name"]) s.name = canonical_node(get<std::string>(n["name"], "name"));
  if (s.name.empty()) s.name = std::string(sim::to_string(s.kind)) + "_src";
  s.rate_hz = n["rate_hz"] ? get<double>(n["rate_hz"], "rate_hz") : (s.kind == sim::SensorKind::lidar ? 10.0 : 5.0);
  if (!(s.rate_hz > 0.0)) bad("rate_hz", "must be > 0");
  if (n["seed"]) s.seed = get<std::uint64_t>(n["seed"], "seed");
  if (n["beams"]) s.pattern.beams = get<std::uint32_t>(n["beams"], "beams");
  if (n["range_min"]) s.pattern.range_min = get<float>(n["range_min"], "range_min");
  if (n["range_max"]) s.pattern.range_max = get<float>(n["range_max"], "range_max");
  if (n["width"]) s.pattern.width = get<std::uint32_t>(n["width"], "width");
  if (n["height"]) s.pattern.height = get<std::uint32_t>(n["height"], "height");
  if (n["channels"]) s.pattern.channels = get<std::uint32_t>(n["channels"], "channels");
  return s;
}

sim::ConsumerSpec parse_consumer(const YAML::Node& n) {
  reject_unknown(n, {"name", "topic", "stall_log_after_ms", "source_path"}, "consumer");
  sim::ConsumerSpec c;
  if (!n["topic"]) bad("topic", "missing required key");
  c.topic = canonical_topic(get<std::string>(n["topic"], "topic"));
  if (n["name"]) c.name = canonical_node(get<std::string>(n["name"], "name"));
  if (n["stall_log_after_ms"]) c.stall_log_after = get<Millis>(n["stall_log_after_ms"], "stall_log_after_ms");
  if (c.stall_log_after <= 0) bad("stall_log_after_ms", "must be > 0");
  if (n["source_path"]) c.source_path = get<std::string>(n["source_path"], "source_path");
  return c;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

ScenarioSpec parse_one(const YAML::Node& n, const std::filesystem::path& base) {
  reject_unknown(n, {"name", "duration_ms", "fault_onset_ms", "seed", "mode", "repetitions", "control",
                     "injector_source", "mock_script", "workspace", "workload", "faults", "crashes"},
                 "scenario");
  ScenarioSpec s;
  if (!n["name"]) bad("name", "missing required key");
  s.name = get<std::string>(n["name"], "name");
  if (n["duration_ms"]) s.duration = get<Millis>(n["duration_ms"], "duration_ms");
  if (n["fault_onset_ms"]) s.fault_onset = get<Millis>(n["fault_onset_ms"], "fault_onset_ms");
  if (n["seed"]) s.seed = get<std::uint64_t>(n["seed"], "seed");
  if (n["mode"]) {
    try {
      s.mode = parse_mode(get<std::string>(n["mode"], "mode"));
    } catch (const Error& e) {
      bad("mode", e.what());
    }
  }
  if (n["repetitions"]) s.repetitions = get<int>(n["repetitions"], "repetitions");
  if (n["control"]) s.control = get<bool>(n["control"], "control");
  if (n["injector_source"]) s.injector_source = get<std::string>(n["injector_source"], "injector_source");
  if (n["mock_script"]) s.mock_script = resolve(base, get<std::string>(n["mock_script"], "mock_script"));
  s.workspace = n["workspace"] ? resolve(base, get<std::string>(n["workspace"], "workspace")) : base;

  const auto w = n["workload"];
  if (!w) bad("workload", "missing required key");
  reject_unknown(w, {"sources", "consumers"}, "workload");
  if (!w["sources"] || !w["sources"].IsSequence()) bad("sources", "expected a list");
  for (const auto& src : w["sources"]) s.workload.sources.push_back(parse_source(src));
  if (w["consumers"]) {
    if (!w["consumers"].IsSequence()) bad("consumers", "expected a list");
    for (const auto& c : w["consumers"]) s.workload.consumers.push_back(parse_consumer(c));
  }
  s.workload.duration = s.duration;
  s.workload.seed = s.seed;

  YAML::Node fault_doc(YAML::NodeType::Map);
  if (n["faults"]) fault_doc["faults"] = n["faults"];
  if (n["crashes"]) fault_doc["crashes"] = n["crashes"];
  try {
    s.faults = fault::parse_fault_config(YAML::Dump(fault_doc));
  } catch (const Error& e) {
    throw Error(Errc::scenario_config_error, std::string("faults: ") + e.what(), e.field());
  }
  validate(s);
  return s;
}

YAML::Node merged(const YAML::Node& defaults, const YAML::Node& item) {
  YAML::Node out = defaults ? YAML::Clone(defaults) : YAML::Node(YAML::NodeType::Map);
  for (const auto& kv : item) out[kv.first.as<std::string>()] = kv.second;
  return out;
}

std::string title(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

std::string_view to_string(Mode mode) noexcept { return mode == Mode::proactive ? "proactive" : "queried"; }

Mode parse_mode(std::string_view text) {
  const auto t = to_lower(trim(text));
  if (t == "proactive") return Mode::proactive;
  if (t == "queried" || t == "queried-only" || t == "queried_only") return Mode::queried;
  throw Error(Errc::validation_error, "invalid mode '" + std::string(text) + "' (allowed: proactive|queried)", "mode");
}

void validate(const ScenarioSpec& s) {
  if (s.name.empty()) bad("name", "must be non-empty");
  if (s.repetitions < 1) bad("repetitions", "must be >= 1");
  if (s.duration <= 0) bad("duration_ms", "must be > 0");
  if (s.fault_onset < 0 || s.fault_onset >= s.duration) bad("fault_onset_ms", "must lie inside the run");
  if (s.workload.sources.empty()) bad("sources", "at least one source is required");
  const auto count = s.faults.faults.size() + s.faults.crashes.size();
  if (s.control && count != 0) bad("control", "a control scenario must not configure faults");
  if (!s.control && count != 1) {
    bad("faults", fmt::format("exactly one fault or crash per scenario, found {}", count));
  }
  for (const auto& c : s.faults.crashes) {
    if (c.at_time.millis >= s.duration) bad("at_time_ms", "crash after the end of the run");
  }
}

std::vector<ScenarioSpec> parse_scenarios(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::scenario_config_error, std::string("scenario file: ") + e.what());
  }
  if (!root.IsMap()) bad("scenario", "expected a mapping at top level");
  std::vector<ScenarioSpec> out;
  if (root["scenarios"]) {
    reject_unknown(root, {"defaults", "scenarios"}, "suite");
    if (!root["scenarios"].IsSequence()) bad("scenarios", "expected a list");
    std::set<std::string> names;
    for (const auto& item : root["scenarios"]) {
      auto spec = parse_one(merged(root["defaults"], item), base_dir);
      if (!names.insert(spec.name).second) bad("name", "duplicate scenario '" + spec.name + "'");
      out.push_back(std::move(spec));
    }
  } else {
    out.push_back(parse_one(root, base_dir));
  }
  return out;
}

std::vector<ScenarioSpec> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::scenario_config_error, "cannot read scenario file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenarios(ss.str(), path.parent_path());
}

GroundTruth derive_ground_truth(const ScenarioSpec& spec) {
  GroundTruth t;
  t.onset = spec.fault_onset;
  t.injector_source = spec.injector_source;
  if (spec.control) {
    t.category_label = "Control";
    return t;
  }
  if (!spec.faults.faults.empty()) {
    const auto& f = spec.faults.faults.front();
    auto src = std::find_if(spec.workload.sources.begin(), spec.workload.sources.end(),
                            [&](const sim::SourceSpec& s) { return canonical_topic(s.topic) == f.input_topic; });
    if (src == spec.workload.sources.end()) bad("input_topic", "no workload source publishes " + f.input_topic);
    t.true_node = src->name;
    t.true_topic = f.output_topic;
    t.true_category = f.error_type == fault::ErrorType::corrupted ? "corrupt" : std::string(fault::to_string(f.error_type));
    t.sensor = std::string(sim::to_string(f.sensor_kind));
    t.ledger_ref = f.sensor_kind == sim::SensorKind::lidar ? "laser_fault_injector" : "image_fault_injector";
    t.category_label = (f.sensor_kind == sim::SensorKind::lidar ? "Lidar " : "Image ") +
                       title(f.error_type == fault::ErrorType::corrupted ? "corrupt" : fault::to_string(f.error_type));
    return t;
  }
  const auto& c = spec.faults.crashes.front();
  auto src = std::find_if(spec.workload.sources.begin(), spec.workload.sources.end(),
                          [&](const sim::SourceSpec& s) { return s.name == c.node_id; });
  if (src == spec.workload.sources.end()) bad("node_id", "crash target " + c.node_id + " is not a workload source");
  t.true_node = c.node_id;
  t.true_topic = src->topic;
  t.true_category = "node_crash";
  t.topic_applicable = false;
  t.sensor = std::string(sim::to_string(src->kind));
  t.onset = c.at_time.millis;
  t.category_label = "Node Crash";
  return t;
}

nlohmann::json to_json(const GroundTruth& t) {
  return {{"category_label", t.category_label}, {"true_topic", t.true_topic},
          {"true_node", t.true_node},           {"true_category", t.true_category},
          {"topic_applicable", t.topic_applicable}, {"ledger_ref", t.ledger_ref},
          {"injector_source", t.injector_source}, {"sensor", t.sensor},
          {"onset_ms", t.onset}};
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  GroundTruth t;
  t.category_label = j.value("category_label", "");
  t.true_topic = j.value("true_topic", "");
  t.true_node = j.value("true_node", "");
  t.true_category = j.value("true_category", "");
  t.topic_applicable = j.value("topic_applicable", true);
  t.ledger_ref = j.value("ledger_ref", "");
  t.injector_source = j.value("injector_source", "");
  t.sensor = j.value("sensor", "");
  t.onset = j.value("onset_ms", Millis{0});
  return t;
}

const std::vector<std::string>& category_order() {
  static const std::vector<std::string> order = {"Lidar Drop",  "Lidar Delay",   "Lidar Corrupt", "Image Drop",
                                                 "Image Delay", "Image Corrupt", "Node Crash"};
  return order;
}

}  // namespace helpdesk::eval
