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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/diagnostics/diagnostics.hpp"

namespace helpdesk::agent {

struct ToolCall {
  std::string tool;
  nlohmann::json args = nlohmann::json::object();

  bool operator==(const ToolCall&) const = default;
};

struct AgentStep {
  std::string thought;
  std::optional<ToolCall> action;  // empty on the final step
  std::string observation;
  bool tool_ok = true;
};

struct FinalAnswer {
  std::string narrative;
  std::vector<std::string> hypotheses;
  std::vector<std::string> recommendations;
  std::optional<std::string> root_cause;
  // Only consulted when no DiagnosisEvent drives the run.
  std::optional<std::string> error_type;
  std::optional<std::string> topic;
  std::optional<std::string> node;
};

struct BackendRequest {
  std::string goal;
  std::string level;
  std::optional<diag::DiagnosisEvent> event;
  std::map<std::string, std::string> vars;  // placeholder values offered by the agent
  std::vector<std::pair<std::string, std::string>> tools;  // name, description
  std::vector<AgentStep> steps;
};

struct BackendResponse {
  std::string thought;
  std::optional<ToolCall> action;
  std::optional<FinalAnswer> final;
};

nlohmann::json to_json(const BackendRequest& request);
BackendResponse response_from_json(const nlohmann::json& j);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  /// Throws Error{backend_error} or Error{provider_unavailable}.
  virtual BackendResponse next(const BackendRequest& request) = 0;
};

/// Regex-keyed decision table loaded from YAML. Stateless: every decision is
/// a function of the request alone.
class ScriptedBackend final : public Backend {
 public:
  static ScriptedBackend from_yaml(std::string_view yaml_text);
  static ScriptedBackend from_file(const std::string& path);

  std::string id() const override { return "scripted:" + name_; }
  BackendResponse next(const BackendRequest& request) override;

  /// The text each rule's `when` pattern is searched in.
  static std::string context_of(const BackendRequest& request);

 private:
  struct Rule {
    std::string when;
    bool once = false;
    std::string thought;
    std::optional<ToolCall> action;
    std::optional<FinalAnswer> final;
    std::map<std::string, int> capture;
  };
  std::string name_;
  std::vector<Rule> rules_;
};

/// POSTs the request document to a completion endpoint.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(std::string url) : url_(std::move(url)) {}
  std::string id() const override { return "remote:" + url_; }
  BackendResponse next(const BackendRequest& request) override;

 private:
  std::string url_;
};

/// Replaces {name} placeholders; unknown names are left as-is.
std::string expand(std::string_view text, const std::map<std::string, std::string>& vars);

}  // namespace helpdesk::agent
