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

#include "helpdesk/agent/agent.hpp"

namespace helpdesk::agent {
namespace {

review::FindingKind parse_finding_kind(const std::string& s) {
  if (s == "syntax-suspect") return review::FindingKind::syntax_suspect;
  if (s == "config-issue") return review::FindingKind::config_issue;
  if (s == "injection-marker") return review::FindingKind::injection_marker;
  return review::FindingKind::logic_flag;
}

nlohmann::json step_json(const AgentStep& s) {
  nlohmann::json j = {{"thought", s.thought}, {"observation", s.observation}, {"tool_ok", s.tool_ok}};
  j["action"] = s.action ? nlohmann::json{{"tool", s.action->tool}, {"args", s.action->args}}
                         : nlohmann::json(nullptr);
  return j;
}

}  // namespace

nlohmann::json to_json(const DebugReport& r) {
  nlohmann::json j;
  j["event_id"] = r.event_id;
  j["goal"] = r.goal;
  j["narrative"] = r.narrative;
  j["identified_node"] = r.identified_node;
  j["identified_topic"] = r.identified_topic;
  j["identified_error_type"] = r.identified_error_type;
  j["hypotheses"] = r.hypotheses;
  j["diagnostics_run"] = nlohmann::json::array();
  for (const auto& d : r.diagnostics_run) {
    j["diagnostics_run"].push_back({{"tool", d.tool}, {"args", d.args}, {"summary", d.summary}, {"ok", d.ok}});
  }
  j["evidence"] = r.evidence;
  j["recommendations"] = r.recommendations;
  j["root_cause"] = r.root_cause ? nlohmann::json(*r.root_cause) : nlohmann::json(nullptr);
  j["code_findings"] = nlohmann::json::array();
  for (const auto& f : r.code_findings) {
    auto fj = review::to_json(f.finding);
    fj["path"] = f.path;
    j["code_findings"].push_back(fj);
  }
  j["steps"] = nlohmann::json::array();
  for (const auto& s : r.steps) j["steps"].push_back(step_json(s));
  j["incomplete"] = r.incomplete;
  j["incomplete_reason"] = r.incomplete_reason;
  j["backend"] = r.backend;
  return j;
}

DebugReport report_from_json(const nlohmann::json& j) {
  DebugReport r;
  r.event_id = j.value("event_id", "");
  r.goal = j.value("goal", "");
  r.narrative = j.value("narrative", "");
  r.identified_node = j.value("identified_node", "");
  r.identified_topic = j.value("identified_topic", "");
  r.identified_error_type = j.value("identified_error_type", "");
  r.hypotheses = j.value("hypotheses", std::vector<std::string>{});
  for (const auto& d : j.value("diagnostics_run", nlohmann::json::array())) {
    r.diagnostics_run.push_back(DiagnosticRun{d.value("tool", ""), d.value("args", nlohmann::json::object()),
                                              d.value("summary", ""), d.value("ok", true)});
  }
  r.evidence = j.value("evidence", std::vector<std::string>{});
  r.recommendations = j.value("recommendations", std::vector<std::string>{});
  if (j.contains("root_cause") && j.at("root_cause").is_string()) r.root_cause = j.at("root_cause").get<std::string>();
  for (const auto& f : j.value("code_findings", nlohmann::json::array())) {
    CodeFinding cf;
    cf.path = f.value("path", "");
    cf.finding = review::Finding{parse_finding_kind(f.value("kind", "")), f.value("line", std::size_t{0}),
                                 f.value("excerpt", ""), f.value("rationale", "")};
    r.code_findings.push_back(std::move(cf));
  }
  for (const auto& s : j.value("steps", nlohmann::json::array())) {
    AgentStep step;
    step.thought = s.value("thought", "");
    step.observation = s.value("observation", "");
    step.tool_ok = s.value("tool_ok", true);
    if (s.contains("action") && s.at("action").is_object()) {
      step.action = ToolCall{s.at("action").value("tool", ""), s.at("action").value("args", nlohmann::json::object())};
    }
    r.steps.push_back(std::move(step));
  }
  r.incomplete = j.value("incomplete", false);
  r.incomplete_reason = j.value("incomplete_reason", "");
  r.backend = j.value("backend", "");
  return r;
}

nlohmann::json to_json(const Session& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["level"] = std::string(to_string(s.profile.level));
  j["effective_level"] = std::string(to_string(s.profile.effective()));
  j["created_at"] = s.created_at;
  j["status"] = s.status == SessionStatus::active ? "active" : "resolved";
  j["open_events"] = s.open_events;
  j["transcript"] = nlohmann::json::array();
  for (const auto& t : s.transcript) j["transcript"].push_back({{"role", t.role}, {"text", t.text}});
  return j;
}

}  // namespace helpdesk::agent
