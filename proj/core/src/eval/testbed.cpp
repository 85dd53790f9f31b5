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

#include "helpdesk/eval/testbed.hpp"

#include <fstream>

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/hash.hpp"
#include "helpdesk/common/names.hpp"
#include "helpdesk/sim/trace.hpp"

namespace helpdesk::eval {

Testbed::Testbed(const ScenarioSpec& spec, std::uint64_t seed, TestbedOptions options)
    : spec_(spec), truth_(derive_ground_truth(spec)), injector_(bus_, spec.duration) {
  bus_.set_trace_recording(options.record_trace);

  for (std::size_t i = 0; i < spec_.workload.sources.size(); ++i) {
    auto src = spec_.workload.sources[i];
    src.seed = splitmix64(seed ^ splitmix64(src.seed + i + 1));
    sim::spawn_sensor_source(bus_, src);
  }
  for (auto f : spec_.faults.faults) {
    f.seed = splitmix64(f.seed ^ splitmix64(seed));
    fault::InjectorOptions opts;
    opts.active_from = sim::SimTime{spec_.fault_onset};
    opts.source_path = spec_.injector_source;
    injector_.attach_injector(f, opts);
  }
  for (const auto& c : spec_.workload.consumers) sim::spawn_consumer(bus_, c);
  for (const auto& c : spec_.faults.crashes) injector_.schedule_crash(c);

  if (options.detectors) {
    diagnostics_ = std::make_unique<diag::DiagnosticsEngine>(bus_, options.detector_config);
  }

  if (options.kb) {
    kb_ = options.kb;
  } else {
    own_kb_ = std::make_unique<kb::KnowledgeBase>(std::make_shared<kb::HashingEmbedder>(),
                                                  [this] { return bus_.now().millis; });
    kb_ = own_kb_.get();
  }

  for (const auto& c : spec_.workload.consumers) {
    const auto up = bus_.resolve_upstream(c.topic);
    for (const auto& s : spec_.workload.sources) {
      if (up && *up == s.name) sensor_topics_.emplace(std::string(sim::to_string(s.kind)), canonical_topic(c.topic));
    }
  }
  for (const auto& s : spec_.workload.sources) {
    sensor_topics_.emplace(std::string(sim::to_string(s.kind)), canonical_topic(s.topic));
  }

  auto backend = options.backend;
  if (!backend) {
    if (spec_.mock_script.empty()) {
      throw Error(Errc::scenario_config_error, "scenario " + spec_.name + " has no mock_script", "mock_script");
    }
    backend = std::make_shared<agent::ScriptedBackend>(agent::ScriptedBackend::from_file(spec_.mock_script.string()));
  }
  agent::AgentConfig cfg;
  cfg.workspace = spec_.workspace;
  cfg.lexicon = options.lexicon;
  cfg.max_steps = options.max_steps;
  cfg.restart_allowed = options.restart_allowed;
  for (const auto& [kind, topic] : sensor_topics_) cfg.vars[kind + "_topic"] = topic;
  agent_ = std::make_unique<agent::Agent>(bus_, diagnostics_.get(), *kb_, std::move(backend), std::move(cfg));
}

RunResult run_scenario(const ScenarioSpec& spec, int repetition, const RunOptions& options) {
  RunResult out;
  out.scenario = spec.name;
  out.repetition = repetition;
  out.seed = repetition_seed(spec, repetition);
  out.mode = options.mode.value_or(spec.mode);

  auto tb_opts = options.testbed;
  tb_opts.detectors = out.mode == Mode::proactive;
  Testbed tb(spec, out.seed, tb_opts);
  out.truth = tb.truth();

  tb.bus().run_until(sim::SimTime{spec.duration});
  if (tb.diagnostics()) out.events = tb.diagnostics()->events();

  auto& agent = tb.agent();
  auto& session = agent.start_session(agent::Level::intermediate);
  if (out.mode == Mode::proactive) {
    out.detection = score_detection(out.events, out.truth);
    if (!out.events.empty()) {
      const auto first = out.events.front();
      agent.notify(session, first);
      out.report = agent.run_react(session, "Diagnose " + first.id, &first);
    }
  } else {
    const std::map<std::string, std::string> vars = {{"sensor", out.truth.sensor.empty() ? "sensor" : out.truth.sensor}};
    for (const auto& tmpl : {options.probes.first, options.probes.second}) {
      const auto prompt = agent::expand(tmpl, vars);
      auto reply = agent.chat(session, prompt);
      out.probes.push_back(prompt);
      out.probes.push_back(reply.text);
      if (reply.report) out.report = std::move(reply.report);
    }
    out.detection = out.report ? score_probe_answer(*out.report, out.truth) : DetectionScore{};
  }

  out.trace = tb.bus().trace();
  out.trace_digest = tb.bus().trace_digest();
  out.deliveries = tb.bus().delivery_count();
  if (!out.truth.ledger_ref.empty()) out.ledger = tb.injector().ledger(out.truth.ledger_ref);
  return out;
}

void persist_run(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::storage_error, "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("trace.jsonl");
    sim::write_trace_jsonl(f, run.trace);
  }
  {
    auto f = open("events.jsonl");
    diag::write_events_jsonl(f, run.events);
  }
  {
    auto f = open("ledger.jsonl");
    fault::write_ledger_jsonl(f, run.ledger);
  }
  {
    auto f = open("truth.json");
    f << to_json(run.truth).dump(2) << '\n';
  }
  if (run.report) {
    auto f = open("report.json");
    f << agent::to_json(*run.report).dump(2) << '\n';
  }
  nlohmann::json meta = {{"scenario", run.scenario},
                         {"category", run.truth.category_label},
                         {"repetition", run.repetition},
                         {"seed", run.seed},
                         {"mode", std::string(to_string(run.mode))},
                         {"trace_digest", to_hex(run.trace_digest)},
                         {"deliveries", run.deliveries},
                         {"events", run.events.size()},
                         {"probes", run.probes}};
  meta["detection"] = {{"pass", run.detection.pass},
                       {"latency_ms", run.detection.latency ? nlohmann::json(*run.detection.latency) : nlohmann::json(nullptr)},
                       {"matched_event", run.detection.matched_event}};
  auto f = open("run.json");
  f << meta.dump(2) << '\n';
}

}  // namespace helpdesk::eval
