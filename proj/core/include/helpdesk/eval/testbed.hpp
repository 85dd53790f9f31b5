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

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/agent/agent.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/eval/scenario.hpp"
#include "helpdesk/eval/scoring.hpp"
#include "helpdesk/fault/fault.hpp"
#include "helpdesk/kb/knowledge_base.hpp"
#include "helpdesk/sim/bus.hpp"

namespace helpdesk::eval {

struct ProbeTemplates {
  std::string first = "Do you see any problem with the {sensor} data?";
  std::string second = "Describe the anomaly in the {sensor} data.";
};

struct TestbedOptions {
  bool detectors = true;
  std::shared_ptr<agent::Backend> backend;  // defaults to the scenario's mock script
  kb::KnowledgeBase* kb = nullptr;          // shared store; a private one otherwise
  diag::DetectorConfig detector_config;
  review::MarkerLexicon lexicon;
  bool record_trace = true;
  std::size_t max_steps = 12;
  std::vector<std::string> restart_allowed;  // empty allows any node
};

/// One simulated robot graph wired with injector, detectors, KB and agent.
class Testbed {
 public:
  Testbed(const ScenarioSpec& spec, std::uint64_t seed, TestbedOptions options = {});
  Testbed(const Testbed&) = delete;
  Testbed& operator=(const Testbed&) = delete;

  sim::MessageBus& bus() noexcept { return bus_; }
  diag::DiagnosticsEngine* diagnostics() noexcept { return diagnostics_.get(); }
  fault::FaultInjector& injector() noexcept { return injector_; }
  kb::KnowledgeBase& kb() noexcept { return *kb_; }
  agent::Agent& agent() noexcept { return *agent_; }
  const ScenarioSpec& spec() const noexcept { return spec_; }
  const GroundTruth& truth() const noexcept { return truth_; }
  /// Consumer-facing topic per sensor kind ("lidar" -> "/scan_out").
  const std::map<std::string, std::string>& sensor_topics() const noexcept { return sensor_topics_; }
  std::vector<std::string> injectors() const { return injector_.injectors(); }

 private:
  ScenarioSpec spec_;
  GroundTruth truth_;
  sim::MessageBus bus_;
  fault::FaultInjector injector_;
  std::unique_ptr<diag::DiagnosticsEngine> diagnostics_;
  std::unique_ptr<kb::KnowledgeBase> own_kb_;
  kb::KnowledgeBase* kb_ = nullptr;
  std::map<std::string, std::string> sensor_topics_;
  std::unique_ptr<agent::Agent> agent_;
};

struct RunResult {
  std::string scenario;
  int repetition = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::proactive;
  GroundTruth truth;
  std::vector<diag::DiagnosisEvent> events;
  std::optional<agent::DebugReport> report;
  std::vector<std::string> probes;  // queried mode: prompts and replies, in order
  std::vector<sim::TraceEntry> trace;
  std::uint64_t trace_digest = 0;
  std::uint64_t deliveries = 0;
  std::vector<fault::LedgerEntry> ledger;
  DetectionScore detection;
};

struct RunOptions {
  TestbedOptions testbed;
  ProbeTemplates probes;
  std::optional<Mode> mode;  // overrides the scenario's mode
};

/// Proactive mode runs detectors and triggers the agent on the first event;
/// queried mode leaves detectors off and asks the two probe questions.
RunResult run_scenario(const ScenarioSpec& spec, int repetition, const RunOptions& options = {});

/// Writes trace.jsonl, events.jsonl, ledger.jsonl, report.json, truth.json
/// and run.json under `dir`.
void persist_run(const RunResult& run, const std::filesystem::path& dir);

}  // namespace helpdesk::eval
