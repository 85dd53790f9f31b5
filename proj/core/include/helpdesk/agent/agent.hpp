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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/agent/backend.hpp"
#include "helpdesk/agent/expertise.hpp"
#include "helpdesk/agent/tools.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/kb/knowledge_base.hpp"
#include "helpdesk/review/code_review.hpp"
#include "helpdesk/sim/bus.hpp"

namespace helpdesk::agent {

struct DiagnosticRun {
  std::string tool;
  nlohmann::json args;
  std::string summary;
  bool ok = true;
};

struct CodeFinding {
  std::string path;
  review::Finding finding;
};

struct DebugReport {
  std::string event_id;
  std::string goal;
  std::string narrative;
  std::string identified_node;
  std::string identified_topic;
  std::string identified_error_type;
  std::vector<std::string> hypotheses;
  std::vector<DiagnosticRun> diagnostics_run;
  std::vector<std::string> evidence;  // tool observations that show an anomaly
  std::vector<std::string> recommendations;
  std::optional<std::string> root_cause;
  std::vector<CodeFinding> code_findings;
  std::vector<AgentStep> steps;
  bool incomplete = false;
  std::string incomplete_reason;
  std::string backend;
};

nlohmann::json to_json(const DebugReport& report);
DebugReport report_from_json(const nlohmann::json& j);

enum class SessionStatus { active, resolved };

struct TranscriptEntry {
  std::string role;  // user | agent | system
  std::string text;
};

struct Session {
  std::string id;
  ExpertiseProfile profile;
  std::int64_t created_at = 0;
  std::vector<TranscriptEntry> transcript;
  std::vector<std::string> open_events;
  std::set<std::string> notified;
  std::vector<std::string> user_history;
  SessionStatus status = SessionStatus::active;
  std::optional<DebugReport> last_report;
};

nlohmann::json to_json(const Session& session);

struct Notification {
  std::string event_id;
  std::string text;
  std::string fix_token;
  bool duplicate = false;
};

struct ChatReply {
  std::string text;
  std::optional<DebugReport> report;
};

struct FixResult {
  std::string event_id;
  bool fixed = false;
  std::string action;  // tool run, empty when nothing was attempted
  std::string text;
  std::optional<std::uint64_t> kb_record;
};

struct AgentConfig {
  std::size_t max_steps = 12;
  bool rag_first = true;
  ExpertiseConfig expertise;
  std::filesystem::path workspace = ".";
  review::MarkerLexicon lexicon;
  std::map<std::string, std::string> vars;  // extra placeholders (e.g. lidar_topic)
  sim::Millis fix_timeout = 5000;
  std::vector<std::string> restart_allowed;
};

inline constexpr std::string_view kDebugFurther = "Would you like to debug further?";

/// ReAct debugging agent bound to one simulated robot graph.
///
/// Not internally synchronized; callers serialize access (the service holds
/// one lock around the simulation and agent).
class Agent {
 public:
  Agent(sim::MessageBus& bus, diag::DiagnosticsEngine* diagnostics, kb::KnowledgeBase& kb,
        std::shared_ptr<Backend> backend, AgentConfig config = {});

  Session& start_session(Level level);
  Session& session(std::string_view id);
  const Session* find_session(std::string_view id) const;
  std::vector<std::string> session_ids() const;

  /// Idempotent per event id.
  Notification notify(Session& session, const diag::DiagnosisEvent& event);

  DebugReport run_react(Session& session, std::string goal,
                        const diag::DiagnosisEvent* event = nullptr);
  ChatReply chat(Session& session, std::string text);

  /// Throws Error{unknown_tool}; tool failures are returned as text.
  std::string invoke_tool(std::string_view name, const nlohmann::json& args);

  FixResult apply_fix(Session& session, std::string_view event_id);
  kb::ErrorFixRecord resolve_and_record(Session& session, std::string outcome);

  Draft node_purpose_draft(std::string_view node) const;
  const ToolRegistry& tools() const noexcept { return tools_; }
  Backend& backend() noexcept { return *backend_; }
  const AgentConfig& config() const noexcept { return config_; }

 private:
  const diag::DiagnosisEvent* event_for(std::string_view event_id) const;
  DebugReport assemble(const BackendRequest& request, std::vector<AgentStep> steps,
                       const std::optional<FinalAnswer>& final, bool incomplete,
                       std::string reason) const;
  std::map<std::string, std::string> vars_for(const diag::DiagnosisEvent* event) const;
  std::string report_text(const DebugReport& report, Level level) const;

  sim::MessageBus* bus_;
  diag::DiagnosticsEngine* diagnostics_;
  kb::KnowledgeBase* kb_;
  std::shared_ptr<Backend> backend_;
  AgentConfig config_;
  ToolRegistry tools_;
  const diag::DiagnosisEvent* active_event_ = nullptr;
  std::map<std::string, std::unique_ptr<Session>, std::less<>> sessions_;
  std::map<std::string, diag::DiagnosisEvent, std::less<>> known_events_;
  std::uint64_t next_session_ = 1;
};

/// Signature stored in the KB for an event: category, topic, node and the
/// key evidence values.
std::string event_signature(const diag::DiagnosisEvent& event);

}  // namespace helpdesk::agent
