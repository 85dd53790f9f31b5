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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/diagnostics/diagnostics.hpp"

namespace helpdesk::review {

enum class Language { generic, python, c_like, yaml };

std::string_view to_string(Language l) noexcept;
Language parse_language(std::string_view text);
Language language_for_path(const std::filesystem::path& path);

struct Symbol {
  std::string name;
  std::size_t line = 0;  // 1-based

  bool operator==(const Symbol&) const = default;
};

struct ConfigParam {
  std::string key;
  std::string value;
  std::size_t line = 0;

  bool operator==(const ConfigParam&) const = default;
};

struct CodeSummary {
  std::string path;
  Language language = Language::generic;
  std::vector<Symbol> functions;
  std::vector<Symbol> variables;
  std::vector<ConfigParam> config_params;
  std::vector<std::string> imports;
  bool empty = false;  // nothing readable in the input
  std::vector<std::string> lines;
};

/// Line-oriented lexical scan; the input is never executed.
CodeSummary summarize_source(std::string_view source, std::optional<Language> hint = std::nullopt,
                             std::string path = {});

enum class FindingKind { syntax_suspect, config_issue, injection_marker, logic_flag };

std::string_view to_string(FindingKind k) noexcept;

struct Finding {
  FindingKind kind = FindingKind::logic_flag;
  std::size_t line = 0;
  std::string excerpt;  // verbatim slice of that source line
  std::string rationale;

  bool operator==(const Finding&) const = default;
};

struct MarkerLexicon {
  std::vector<std::string> stems = {"fault", "inject", "corrupt", "drop", "delay", "random"};
};

MarkerLexicon parse_marker_lexicon(std::string_view yaml_text);

/// Heuristic findings; `event` (optional) focuses config-issue matching.
std::vector<Finding> match_findings(const CodeSummary& summary, const diag::DiagnosisEvent* event,
                                    const MarkerLexicon& lexicon = {});

/// Resolves `requested` under `root`; rejects anything escaping the root.
std::filesystem::path resolve_in_workspace(const std::filesystem::path& root,
                                           const std::filesystem::path& requested);

CodeSummary summarize_file(const std::filesystem::path& root, const std::filesystem::path& requested);

nlohmann::json to_json(const CodeSummary& summary);
nlohmann::json to_json(const Finding& finding);
nlohmann::json findings_document(const CodeSummary& summary, const std::vector<Finding>& findings);

}  // namespace helpdesk::review
