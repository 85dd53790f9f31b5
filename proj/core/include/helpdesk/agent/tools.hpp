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

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/kb/knowledge_base.hpp"
#include "helpdesk/review/code_review.hpp"
#include "helpdesk/sim/bus.hpp"

namespace helpdesk::agent {

struct ToolResult {
  std::string text;  // observation shown to the backend
  bool ok = true;
  nlohmann::json data = nlohmann::json::object();
};

class ToolRegistry {
 public:
  using Fn = std::function<ToolResult(const nlohmann::json& args)>;

  void add(std::string name, std::string description, Fn fn);
  bool has(std::string_view name) const { return tools_.contains(std::string(name)); }
  std::vector<std::string> names() const;
  std::string description(std::string_view name) const;

  /// Throws Error{unknown_tool}. Tool failures come back as ok=false text.
  ToolResult invoke(std::string_view name, const nlohmann::json& args) const;

 private:
  struct Entry {
    std::string description;
    Fn fn;
  };
  std::map<std::string, Entry, std::less<>> tools_;
};

struct ToolContext {
  sim::MessageBus* bus = nullptr;
  kb::KnowledgeBase* kb = nullptr;
  std::filesystem::path workspace = ".";
  review::MarkerLexicon lexicon;
  sim::Millis hz_window = 5000;
  std::vector<std::string> restart_allowed;  // empty: any registered node
  std::function<const diag::DiagnosisEvent*()> active_event;
};

/// list_nodes, node_info, topic_echo, topic_hz, kb_lookup, code_review,
/// restart_node, read_log_tail.
ToolRegistry make_default_tools(ToolContext context);

std::string render_payload(const sim::Message& msg);

}  // namespace helpdesk::agent
