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

#include "helpdesk/agent/backend.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/http.hpp"

namespace helpdesk::agent {
namespace {

nlohmann::json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Map: {
      auto obj = nlohmann::json::object();
      for (const auto& kv : node) obj[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return obj;
    }
    case YAML::NodeType::Sequence: {
      auto arr = nlohmann::json::array();
      for (const auto& item : node) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Scalar: {
      const auto s = node.Scalar();
      if (node.Tag() == "!") return s;  // quoted
      try {
        std::size_t pos = 0;
        const auto v = std::stoll(s, &pos);
        if (pos == s.size()) return v;
      } catch (const std::exception&) {
      }
      if (s == "true") return true;
      if (s == "false") return false;
      return s;
    }
    default: return nullptr;
  }
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (j.contains(key) && j.at(key).is_array()) {
    for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  }
  return out;
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

FinalAnswer final_from_json(const nlohmann::json& j) {
  FinalAnswer f;
  f.narrative = j.value("narrative", "");
  f.hypotheses = string_list(j, "hypotheses");
  f.recommendations = string_list(j, "recommendations");
  f.root_cause = opt_string(j, "root_cause");
  f.error_type = opt_string(j, "error_type");
  f.topic = opt_string(j, "topic");
  f.node = opt_string(j, "node");
  return f;
}

nlohmann::json expand_json(const nlohmann::json& j, const std::map<std::string, std::string>& vars) {
  if (j.is_string()) return expand(j.get<std::string>(), vars);
  if (j.is_array()) {
    auto out = nlohmann::json::array();
    for (const auto& v : j) out.push_back(expand_json(v, vars));
    return out;
  }
  if (j.is_object()) {
    auto out = nlohmann::json::object();
    for (const auto& [k, v] : j.items()) out[k] = expand_json(v, vars);
    return out;
  }
  return j;
}

std::optional<std::string> expand_opt(const std::optional<std::string>& s,
                                      const std::map<std::string, std::string>& vars) {
  if (!s) return std::nullopt;
  auto v = expand(*s, vars);
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace

std::string expand(std::string_view text, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = vars.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

nlohmann::json to_json(const BackendRequest& r) {
  nlohmann::json j;
  j["goal"] = r.goal;
  j["level"] = r.level;
  j["event"] = r.event ? diag::to_json(*r.event) : nlohmann::json(nullptr);
  j["vars"] = r.vars;
  j["tools"] = nlohmann::json::array();
  for (const auto& [name, desc] : r.tools) j["tools"].push_back({{"name", name}, {"description", desc}});
  j["steps"] = nlohmann::json::array();
  for (const auto& s : r.steps) {
    nlohmann::json step = {{"thought", s.thought}, {"observation", s.observation}};
    step["action"] = s.action ? nlohmann::json{{"tool", s.action->tool}, {"args", s.action->args}}
                              : nlohmann::json(nullptr);
    j["steps"].push_back(step);
  }
  return j;
}

BackendResponse response_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::backend_error, "backend response is not an object");
  BackendResponse r;
  r.thought = j.value("thought", "");
  if (j.contains("final") && !j.at("final").is_null()) {
    r.final = final_from_json(j.at("final"));
  } else if (j.contains("action") && j.at("action").is_object()) {
    const auto& a = j.at("action");
    if (!a.contains("tool")) throw Error(Errc::backend_error, "backend action without 'tool'");
    r.action = ToolCall{a.at("tool").get<std::string>(), a.value("args", nlohmann::json::object())};
  } else {
    throw Error(Errc::backend_error, "backend response has neither 'action' nor 'final'");
  }
  return r;
}

ScriptedBackend ScriptedBackend::from_yaml(std::string_view yaml_text) {
  nlohmann::json doc;
  try {
    doc = yaml_to_json(YAML::Load(std::string(yaml_text)));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse_error, std::string("mock script: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rules") || !doc.at("rules").is_array()) {
    throw Error(Errc::validation_error, "mock script needs a 'rules' list", "rules");
  }
  ScriptedBackend b;
  b.name_ = doc.value("name", "mock");
  for (const auto& r : doc.at("rules")) {
    Rule rule;
    rule.when = r.value("when", "");
    rule.once = r.value("once", false);
    rule.thought = r.value("thought", "");
    try {
      std::regex check(rule.when);
    } catch (const std::regex_error& e) {
      throw Error(Errc::validation_error, "bad 'when' pattern '" + rule.when + "': " + e.what(), "when");
    }
    if (r.contains("capture")) {
      for (const auto& [name, group] : r.at("capture").items()) rule.capture[name] = group.get<int>();
    }
    if (r.contains("final")) {
      rule.final = final_from_json(r.at("final"));
    } else if (r.contains("action")) {
      const auto& a = r.at("action");
      rule.action = ToolCall{a.at("tool").get<std::string>(), a.value("args", nlohmann::json::object())};
    } else {
      throw Error(Errc::validation_error, "rule needs 'action' or 'final'", "rules");
    }
    b.rules_.push_back(std::move(rule));
  }
  return b;
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::not_found, "cannot read mock script " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_yaml(ss.str());
}

std::string ScriptedBackend::context_of(const BackendRequest& r) {
  std::string out = "goal: " + r.goal + "\nlevel: " + r.level + "\n";
  if (r.event) {
    out += "event.category: " + std::string(diag::to_string(r.event->category)) + "\n";
    out += "event.topic: " + r.event->topic + "\n";
    out += "event.node: " + r.event->suspected_node + "\n";
  } else {
    out += "event: none\n";
  }
  out += "step: " + std::to_string(r.steps.size()) + "\n";
  std::string used;
  for (const auto& s : r.steps) {
    if (s.action) used += (used.empty() ? "" : ",") + s.action->tool;
  }
  out += "tools_used: " + used + "\n";
  if (!r.steps.empty()) {
    const auto& last = r.steps.back();
    out += "last_tool: " + (last.action ? last.action->tool : std::string()) + "\n";
    out += "last_observation:\n" + last.observation;
  }
  return out;
}

BackendResponse ScriptedBackend::next(const BackendRequest& request) {
  const auto context = context_of(request);
  auto vars = request.vars;
  for (const auto& rule : rules_) {
    if (rule.once && rule.action) {
      const bool used = std::any_of(request.steps.begin(), request.steps.end(), [&](const AgentStep& s) {
        return s.action && s.action->tool == rule.action->tool;
      });
      if (used) continue;
    }
    std::smatch m;
    if (!std::regex_search(context, m, std::regex(rule.when))) continue;
    for (const auto& [name, group] : rule.capture) {
      if (group >= 0 && static_cast<std::size_t>(group) < m.size()) vars[name] = m[group].str();
    }
    BackendResponse resp;
    resp.thought = expand(rule.thought, vars);
    if (rule.action) {
      resp.action = ToolCall{rule.action->tool, expand_json(rule.action->args, vars)};
    } else {
      FinalAnswer f;
      f.narrative = expand(rule.final->narrative, vars);
      for (const auto& h : rule.final->hypotheses) f.hypotheses.push_back(expand(h, vars));
      for (const auto& rec : rule.final->recommendations) f.recommendations.push_back(expand(rec, vars));
      f.root_cause = expand_opt(rule.final->root_cause, vars);
      f.error_type = expand_opt(rule.final->error_type, vars);
      f.topic = expand_opt(rule.final->topic, vars);
      f.node = expand_opt(rule.final->node, vars);
      resp.final = std::move(f);
    }
    return resp;
  }
  BackendResponse resp;
  resp.thought = "No rule applies.";
  resp.final = FinalAnswer{};
  resp.final->narrative = "I could not find anything further to check.";
  return resp;
}

BackendResponse RemoteBackend::next(const BackendRequest& request) {
  return response_from_json(post_json(url_, to_json(request)));
}

}  // namespace helpdesk::agent
