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
#include <string>
#include <string_view>
#include <vector>

namespace helpdesk::agent {

enum class Level { beginner = 0, intermediate = 1, expert = 2 };

std::string_view to_string(Level level) noexcept;
/// Throws Error{validation_error} listing the allowed values.
Level parse_level(std::string_view text);

/// Technical-term density heuristic. Off by default; the adjustment never
/// moves more than one level away from the self-reported level.
struct ExpertiseConfig {
  bool implicit_enabled = false;
  std::size_t window = 10;       // most recent user messages considered
  double raise_density = 0.25;   // technical tokens / all tokens
  std::size_t lower_after = 5;   // messages with no technical term at all
};

struct ExpertiseProfile {
  Level level = Level::beginner;  // self-reported
  int implicit_adjust = 0;        // -1, 0 or +1

  Level effective() const noexcept;
};

std::size_t technical_term_count(std::string_view text);

/// Recomputes the implicit adjustment from the user's message history.
ExpertiseProfile update_profile(ExpertiseProfile profile, const std::vector<std::string>& history,
                                const ExpertiseConfig& config);

/// Structured content rendered per level by shape_response.
struct Draft {
  std::string summary;         // intermediate phrasing
  std::string plain_summary;   // beginner phrasing, no jargon left unexplained
  std::string expert_summary;  // compact phrasing
  std::vector<std::string> terms;    // glossary keys used by the plain summary
  std::vector<std::string> details;  // extra lines for beginner/intermediate
  std::vector<std::string> publishers;
  std::vector<std::string> subscribers;
  std::vector<std::string> services;
  bool has_interfaces = false;
};

/// One-line definition for a known term ("A node is a ..."); empty if unknown.
std::string definition_of(std::string_view term);

/// Pure template transform: the same draft always yields the same text.
std::string shape_response(const Draft& draft, Level level);

}  // namespace helpdesk::agent
