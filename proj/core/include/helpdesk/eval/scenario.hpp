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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/fault/fault.hpp"
#include "helpdesk/sim/workload.hpp"

namespace helpdesk::eval {

using sim::Millis;

enum class Mode { proactive, queried };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

struct ScenarioSpec {
  std::string name;
  sim::WorkloadSpec workload;
  fault::FaultConfig faults;  // exactly one fault or crash, none for a control run
  Millis fault_onset = 2000;
  std::uint64_t seed = 1;
  Millis duration = 10'000;
  Mode mode = Mode::proactive;
  int repetitions = 5;
  bool control = false;
  std::string injector_source;  // workspace-relative source of the injector node
  std::filesystem::path mock_script;
  std::filesystem::path workspace = ".";
};

/// Parses either a single scenario mapping or a suite document
/// (`defaults` + `scenarios` list). Relative paths resolve against `base_dir`.
/// Throws Error{scenario_config_error} naming the offending field.
std::vector<ScenarioSpec> parse_scenarios(std::string_view yaml_text, const std::filesystem::path& base_dir = ".");
std::vector<ScenarioSpec> load_scenarios(const std::filesystem::path& path);

void validate(const ScenarioSpec& spec);

/// Seed of repetition `rep` of a scenario.
inline std::uint64_t repetition_seed(const ScenarioSpec& spec, int rep) {
  return spec.seed + static_cast<std::uint64_t>(rep);
}

struct GroundTruth {
  std::string category_label;  // Table-1 row, e.g. "Lidar Drop"
  std::string true_topic;
  std::string true_node;
  std::string true_category;   // drop | delay | corrupt | node_crash; empty for control
  bool topic_applicable = true;  // criterion B is undefined for node crashes
  std::string ledger_ref;        // injector node whose ledger records the fault
  std::string injector_source;
  std::string sensor;            // lidar | camera
  Millis onset = 0;
};

/// Pure function of the scenario's fault and workload configuration.
GroundTruth derive_ground_truth(const ScenarioSpec& spec);

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);

/// Table-1 row order; unknown labels sort after these.
const std::vector<std::string>& category_order();

}  // namespace helpdesk::eval
