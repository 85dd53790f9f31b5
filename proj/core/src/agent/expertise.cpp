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

#include "helpdesk/agent/expertise.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::agent {
namespace {

const std::set<std::string, std::less<>>& technical_terms() {
  static const std::set<std::string, std::less<>> terms = {
      "node",     "nodes",     "topic",    "topics",    "publisher", "publishers", "subscriber",
      "subscribers", "service", "services", "qos",     "tf",        "launch",     "rosout",
      "callback", "executor",  "hz",       "rate",      "laserscan", "lidar",      "namespace",
      "param",    "parameter", "parameters", "bag",     "rviz",      "ros",        "ros2",
      "msg",      "seq",       "stamp",    "latency",   "middleware", "dds",       "echo"};
  return terms;
}

const std::map<std::string, std::string, std::less<>>& glossary() {
  static const std::map<std::string, std::string, std::less<>> g = {
      {"node", "A node is a small program in the robot's software that does one job."},
      {"topic", "A topic is a named channel that nodes use to send each other data."},
      {"message", "A message is one piece of data sent on a topic, like a single laser scan."},
      {"publisher", "A publisher is a node that sends messages on a topic."},
      {"subscriber", "A subscriber is a node that listens to a topic."},
      {"service", "A service is a request and reply call that one node offers to others."},
      {"lidar", "A lidar is a laser sensor that measures the distance to things around the robot."},
      {"camera", "A camera here is a sensor node that sends pictures as messages."},
      {"fault injector", "A fault injector is a test tool that breaks data on purpose."},
  };
  return g;
}

std::string join(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (const auto& i : items) {
    if (!out.empty()) out += ", ";
    out += i;
  }
  return out;
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  switch (level) {
    case Level::beginner: return "beginner";
    case Level::intermediate: return "intermediate";
    case Level::expert: return "expert";
  }
  return "beginner";
}

Level parse_level(std::string_view text) {
  const auto t = to_lower(trim(text));
  if (t == "beginner") return Level::beginner;
  if (t == "intermediate") return Level::intermediate;
  if (t == "expert") return Level::expert;
  throw Error(Errc::validation_error,
              "invalid level '" + std::string(text) + "' (allowed: beginner, intermediate, expert)",
              "level");
}

Level ExpertiseProfile::effective() const noexcept {
  const int v = std::clamp(static_cast<int>(level) + std::clamp(implicit_adjust, -1, 1), 0, 2);
  return static_cast<Level>(v);
}

std::size_t technical_term_count(std::string_view text) {
  std::size_t n = 0;
  std::string word;
  auto flush = [&] {
    if (!word.empty() && technical_terms().contains(word)) ++n;
    word.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '_') {
      word.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();
  return n;
}

ExpertiseProfile update_profile(ExpertiseProfile profile, const std::vector<std::string>& history,
                                const ExpertiseConfig& config) {
  profile.implicit_adjust = 0;
  if (!config.implicit_enabled || history.empty()) return profile;
  const auto first = history.size() > config.window ? history.end() - static_cast<long>(config.window)
                                                    : history.begin();
  std::size_t technical = 0;
  std::size_t total = 0;
  for (auto it = first; it != history.end(); ++it) {
    technical += technical_term_count(*it);
    std::size_t words = 0;
    bool in_word = false;
    for (char c : *it) {
      const bool w = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
      if (w && !in_word) ++words;
      in_word = w;
    }
    total += words;
  }
  const auto considered = static_cast<std::size_t>(history.end() - first);
  if (total > 0 && static_cast<double>(technical) / static_cast<double>(total) >= config.raise_density) {
    profile.implicit_adjust = 1;
  } else if (technical == 0 && considered >= config.lower_after) {
    profile.implicit_adjust = -1;
  }
  return profile;
}

std::string definition_of(std::string_view term) {
  auto it = glossary().find(to_lower(term));
  return it == glossary().end() ? std::string() : it->second;
}

std::string shape_response(const Draft& d, Level level) {
  std::string out;
  switch (level) {
    case Level::beginner: {
      out = d.plain_summary.empty() ? d.summary : d.plain_summary;
      for (const auto& line : d.details) out += "\n" + line;
      std::vector<std::string> defs;
      for (const auto& t : d.terms) {
        auto def = definition_of(t);
        if (!def.empty() && std::find(defs.begin(), defs.end(), def) == defs.end()) defs.push_back(def);
      }
      if (!defs.empty()) {
        out += "\n\nWords used above:";
        for (const auto& def : defs) out += "\n- " + def;
      }
      break;
    }
    case Level::intermediate:
      out = d.summary;
      for (const auto& line : d.details) out += "\n" + line;
      if (d.has_interfaces) {
        out += "\n\nPublishers: " + join(d.publishers);
        out += "\nSubscribers: " + join(d.subscribers);
        out += "\nServices: " + join(d.services);
      }
      break;
    case Level::expert:
      out = d.expert_summary.empty() ? d.summary : d.expert_summary;
      if (d.has_interfaces) {
        out += "\nPublishers: " + join(d.publishers);
        out += "\nSubscribers: " + join(d.subscribers);
        out += "\nServices: " + join(d.services);
      }
      break;
  }
  return out;
}

}  // namespace helpdesk::agent
