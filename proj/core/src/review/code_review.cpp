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

#include "helpdesk/review/code_review.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::review {
namespace {

std::vector<std::string> split_lines(std::string_view source) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : source) {
    if (c == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) lines.push_back(std::move(current));
  return lines;
}

bool is_comment(const std::string& line, Language lang) {
  const auto t = trim(line);
  if (t.empty()) return true;
  switch (lang) {
    case Language::python:
    case Language::yaml: return t.front() == '#';
    case Language::c_like: return t.rfind("//", 0) == 0 || t.front() == '*' || t.rfind("/*", 0) == 0;
    case Language::generic: return t.front() == '#' || t.rfind("//", 0) == 0 || t.front() == ';';
  }
  return false;
}

bool is_literal(std::string value) {
  value = trim(value);
  if (!value.empty() && value.back() == ';') value.pop_back();
  value = trim(value);
  static const std::regex literal(
      R"(^(?:[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?[fFlLuU]*|"[^"]*"|'[^']*'|true|false|True|False|None|nullptr|\[[^\]]*\])$)");
  return std::regex_match(value, literal);
}

std::string unquote(std::string value) {
  value = trim(value);
  if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
    return value.substr(1, value.size() - 2);
  }
  return value;
}

std::string strip_trailing_comment(const std::string& value, char marker) {
  bool in_single = false;
  bool in_double = false;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const char c = value[i];
    if (c == '\'' && !in_double) in_single = !in_single;
    if (c == '"' && !in_single) in_double = !in_double;
    if (c == marker && !in_single && !in_double && (i == 0 || std::isspace(static_cast<unsigned char>(value[i - 1])))) {
      return trim(value.substr(0, i));
    }
  }
  return trim(value);
}

void scan_python(const std::vector<std::string>& lines, CodeSummary& s) {
  static const std::regex def_re(R"(^\s*(?:async\s+)?def\s+([A-Za-z_]\w*)\s*\()");
  static const std::regex import_re(R"(^\s*((?:import|from)\s+\S.*)$)");
  static const std::regex assign_re(R"(^\s*((?:self\.)?[A-Za-z_]\w*)\s*(?::\s*[^=]+)?=(?!=)\s*(.+)$)");
  static const std::regex param_re(R"(declare_parameter\(\s*['"]([^'"]+)['"]\s*,\s*([^)]+)\))");
  std::smatch m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (is_comment(line, Language::python)) continue;
    const auto n = i + 1;
    if (std::regex_search(line, m, def_re)) {
      s.functions.push_back({m[1], n});
    } else if (std::regex_search(line, m, import_re)) {
      s.imports.push_back(trim(m[1].str()));
    } else if (std::regex_search(line, m, param_re)) {
      s.config_params.push_back({m[1], unquote(m[2]), n});
    } else if (std::regex_search(line, m, assign_re)) {
      auto name = m[1].str();
      if (name.rfind("self.", 0) == 0) name = name.substr(5);
      const auto value = strip_trailing_comment(m[2].str(), '#');
      if (is_literal(value)) {
        s.config_params.push_back({name, unquote(value), n});
      } else {
        s.variables.push_back({name, n});
      }
    }
  }
}

void scan_c_like(const std::vector<std::string>& lines, CodeSummary& s) {
  static const std::regex include_re(R"(^\s*#\s*include\s*[<"]([^>"]+)[>"])");
  static const std::regex define_re(R"(^\s*#\s*define\s+([A-Za-z_]\w*)\s+(.+)$)");
  static const std::regex param_re(R"re(declare_parameter(?:<[^>]*>)?\(\s*"([^"]+)"\s*,\s*([^)]+)\))re");
  static const std::regex func_re(
      R"(^\s*(?:[\w:<>,\*&~]+\s+)+[\*&]*([A-Za-z_][\w:]*)\s*\([^;]*$)");
  static const std::regex var_re(
      R"(^\s*((?:const|constexpr|static|inline)\s+)*[\w:<>]+\s+[\*&]?([A-Za-z_]\w*)\s*(?:=\s*([^;]*)|\{([^}]*)\})\s*;)");
  static const std::set<std::string> keywords = {"if", "for", "while", "switch", "return",
                                                 "sizeof", "catch", "else", "do"};
  std::smatch m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (is_comment(line, Language::c_like)) continue;
    const auto n = i + 1;
    if (std::regex_search(line, m, include_re)) {
      s.imports.push_back(m[1]);
    } else if (std::regex_search(line, m, define_re)) {
      s.config_params.push_back({m[1], strip_trailing_comment(m[2], '/'), n});
    } else if (std::regex_search(line, m, param_re)) {
      s.config_params.push_back({m[1], unquote(m[2]), n});
    } else if (std::regex_search(line, m, var_re)) {
      const bool is_const = m[1].matched;
      const auto value = m[3].matched ? m[3].str() : m[4].str();
      if (is_const && is_literal(value)) {
        s.config_params.push_back({m[2], unquote(value), n});
      } else {
        s.variables.push_back({m[2], n});
      }
    } else if (std::regex_search(line, m, func_re)) {
      auto name = m[1].str();
      auto base = name.substr(name.find_last_of(':') == std::string::npos ? 0 : name.find_last_of(':') + 1);
      if (!keywords.contains(base)) s.functions.push_back({name, n});
    }
  }
}

void scan_yaml(const std::vector<std::string>& lines, CodeSummary& s) {
  static const std::regex kv_re(R"(^\s*(?:-\s+)?([A-Za-z_][\w.\-]*)\s*:\s*(.*)$)");
  std::smatch m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (is_comment(line, Language::yaml)) continue;
    if (std::regex_search(line, m, kv_re)) {
      const auto value = strip_trailing_comment(m[2].str(), '#');
      if (value.empty() || value == "|" || value == ">") continue;
      s.config_params.push_back({m[1], unquote(value), i + 1});
    }
  }
}

void scan_generic(const std::vector<std::string>& lines, CodeSummary& s) {
  static const std::regex kv_re(R"(^\s*([A-Za-z_][\w.\-]*)\s*(?:=|:)(?!=)\s*(.+)$)");
  std::smatch m;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (is_comment(line, Language::generic)) continue;
    if (std::regex_search(line, m, kv_re)) {
      const auto value = trim(m[2].str());
      if (is_literal(value) || value.find_first_of("()[]{}") == std::string::npos) {
        s.config_params.push_back({m[1], unquote(value), i + 1});
      } else {
        s.variables.push_back({m[1], i + 1});
      }
    }
  }
}

std::vector<std::string> category_words(diag::Category c) {
  switch (c) {
    case diag::Category::corrupt: return {"corrupt", "corrupted"};
    case diag::Category::drop: return {"drop"};
    case diag::Category::delay: return {"delay"};
    case diag::Category::node_crash: return {"crash", "kill", "node_crash"};
    case diag::Category::log_error: return {};
  }
  return {};
}

// Bracket pairing over code outside strings and comments.
void bracket_findings(const CodeSummary& s, std::vector<Finding>& out) {
  struct Open {
    char c;
    std::size_t line;
    std::size_t col;
  };
  std::vector<Open> stack;
  const char comment = s.language == Language::c_like ? '/' : '#';
  for (std::size_t i = 0; i < s.lines.size(); ++i) {
    const auto& line = s.lines[i];
    if (line.find("\"\"\"") != std::string::npos || line.find("'''") != std::string::npos) continue;
    char quote = 0;
    int quote_count = 0;
    for (std::size_t j = 0; j < line.size(); ++j) {
      const char c = line[j];
      if (quote) {
        if (c == '\\') {
          ++j;
        } else if (c == quote) {
          quote = 0;
          ++quote_count;
        }
        continue;
      }
      if (c == comment && (comment == '#' || (j + 1 < line.size() && line[j + 1] == '/'))) break;
      if (c == '"' || c == '\'') {
        if (c == '\'' && s.language == Language::c_like && j + 2 < line.size() && line[j + 2] == '\'') {
          j += 2;  // char literal
          continue;
        }
        quote = c;
        ++quote_count;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') stack.push_back({c, i + 1, j});
      if (c == ')' || c == ']' || c == '}') {
        const char want = c == ')' ? '(' : c == ']' ? '[' : '{';
        if (stack.empty() || stack.back().c != want) {
          out.push_back({FindingKind::syntax_suspect, i + 1, std::string(1, c),
                         "unmatched closing bracket"});
          if (!stack.empty()) stack.pop_back();
        } else {
          stack.pop_back();
        }
      }
    }
    if (quote) {
      out.push_back({FindingKind::syntax_suspect, i + 1, std::string(1, quote),
                     "string literal not terminated on this line"});
    }
  }
  for (const auto& o : stack) {
    out.push_back({FindingKind::syntax_suspect, o.line, std::string(1, o.c), "bracket never closed"});
  }
}

}  // namespace

std::string_view to_string(Language l) noexcept {
  switch (l) {
    case Language::generic: return "generic";
    case Language::python: return "python";
    case Language::c_like: return "c-like";
    case Language::yaml: return "yaml";
  }
  return "generic";
}

Language parse_language(std::string_view text) {
  const auto t = to_lower(text);
  if (t == "python" || t == "python-like" || t == "py") return Language::python;
  if (t == "c" || t == "c-like" || t == "cpp" || t == "c++") return Language::c_like;
  if (t == "yaml" || t == "yml") return Language::yaml;
  if (t == "generic") return Language::generic;
  throw Error(Errc::validation_error,
              "unknown language hint '" + std::string(text) + "' (allowed: generic|python|c-like|yaml)",
              "language_hint");
}

Language language_for_path(const std::filesystem::path& path) {
  const auto ext = to_lower(path.extension().string());
  if (ext == ".py") return Language::python;
  if (ext == ".yaml" || ext == ".yml") return Language::yaml;
  if (ext == ".c" || ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".h" || ext == ".hpp" ||
      ext == ".hh") {
    return Language::c_like;
  }
  return Language::generic;
}

std::string_view to_string(FindingKind k) noexcept {
  switch (k) {
    case FindingKind::syntax_suspect: return "syntax-suspect";
    case FindingKind::config_issue: return "config-issue";
    case FindingKind::injection_marker: return "injection-marker";
    case FindingKind::logic_flag: return "logic-flag";
  }
  return "logic-flag";
}

CodeSummary summarize_source(std::string_view source, std::optional<Language> hint, std::string path) {
  CodeSummary s;
  s.path = std::move(path);
  s.language = hint.value_or(s.path.empty() ? Language::generic : language_for_path(s.path));
  s.lines = split_lines(source);
  s.empty = std::all_of(s.lines.begin(), s.lines.end(), [](const auto& l) { return trim(l).empty(); });
  if (s.empty) return s;
  switch (s.language) {
    case Language::python: scan_python(s.lines, s); break;
    case Language::c_like: scan_c_like(s.lines, s); break;
    case Language::yaml: scan_yaml(s.lines, s); break;
    case Language::generic: scan_generic(s.lines, s); break;
  }
  return s;
}

MarkerLexicon parse_marker_lexicon(std::string_view yaml_text) {
  MarkerLexicon lex;
  try {
    auto root = YAML::Load(std::string(yaml_text));
    if (!root["markers"] || !root["markers"].IsSequence()) {
      throw Error(Errc::validation_error, "marker lexicon needs a 'markers' list", "markers");
    }
    lex.stems.clear();
    for (const auto& m : root["markers"]) lex.stems.push_back(to_lower(m.as<std::string>()));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse_error, std::string("marker lexicon: ") + e.what());
  }
  return lex;
}

std::vector<Finding> match_findings(const CodeSummary& s, const diag::DiagnosisEvent* event,
                                    const MarkerLexicon& lexicon) {
  std::vector<Finding> out;
  if (s.empty) return out;

  static const std::regex ident_re(R"([A-Za-z_][A-Za-z0-9_]*)");
  for (std::size_t i = 0; i < s.lines.size(); ++i) {
    const auto& line = s.lines[i];
    for (auto it = std::sregex_iterator(line.begin(), line.end(), ident_re); it != std::sregex_iterator(); ++it) {
      const auto ident = it->str();
      const auto lowered = to_lower(ident);
      auto stem = std::find_if(lexicon.stems.begin(), lexicon.stems.end(),
                               [&](const std::string& st) { return lowered.find(st) != std::string::npos; });
      if (stem != lexicon.stems.end()) {
        out.push_back({FindingKind::injection_marker, i + 1, ident,
                       "identifier matches fault-injection marker '" + *stem + "'"});
        break;
      }
    }
  }

  if (event) {
    const auto words = category_words(event->category);
    const auto topic = canonical_topic(event->topic);
    const auto bare_topic = canonical_node(topic);
    for (const auto& p : s.config_params) {
      const auto value = to_lower(p.value);
      const bool category_hit = std::find(words.begin(), words.end(), value) != words.end();
      const bool topic_hit = !bare_topic.empty() && bare_topic != "rosout" &&
                             (canonical_topic(p.value) == topic || to_lower(p.key).find(bare_topic) != std::string::npos);
      if (category_hit || topic_hit) {
        out.push_back({FindingKind::config_issue, p.line, trim(s.lines[p.line - 1]),
                       category_hit ? "configures a '" + std::string(diag::to_string(event->category)) +
                                          "' behaviour matching the active diagnosis"
                                    : "references topic " + topic + " under diagnosis"});
      }
    }
  }

  if (s.language != Language::yaml) bracket_findings(s, out);

  static const std::regex c_assign_in_if(R"(\bif\s*\(\s*[A-Za-z_]\w*\s*=[^=])");
  static const std::regex py_eq_none(R"(==\s*None\b)");
  static const std::regex py_bare_except(R"(^\s*except\s*:)");
  std::smatch m;
  for (std::size_t i = 0; i < s.lines.size(); ++i) {
    const auto& line = s.lines[i];
    if (s.language == Language::c_like && std::regex_search(line, m, c_assign_in_if)) {
      out.push_back({FindingKind::logic_flag, i + 1, m[0].str(), "assignment inside if condition"});
    }
    if (s.language == Language::python && std::regex_search(line, m, py_eq_none)) {
      out.push_back({FindingKind::logic_flag, i + 1, m[0].str(), "comparison to None with =="});
    }
    if (s.language == Language::python && std::regex_search(line, m, py_bare_except)) {
      out.push_back({FindingKind::logic_flag, i + 1, trim(m[0].str()), "bare except swallows every error"});
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Finding& a, const Finding& b) { return a.line < b.line; });
  return out;
}

std::filesystem::path resolve_in_workspace(const std::filesystem::path& root,
                                           const std::filesystem::path& requested) {
  namespace fs = std::filesystem;
  const auto base = fs::weakly_canonical(fs::absolute(root));
  const auto target = fs::weakly_canonical(requested.is_absolute() ? requested : base / requested);
  const auto rel = target.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") {
    throw Error(Errc::path_outside_workspace,
                "path '" + requested.string() + "' resolves outside the workspace root");
  }
  return target;
}

CodeSummary summarize_file(const std::filesystem::path& root, const std::filesystem::path& requested) {
  const auto path = resolve_in_workspace(root, requested);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "cannot read '" + requested.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return summarize_source(ss.str(), language_for_path(path), requested.string());
}

nlohmann::json to_json(const CodeSummary& s) {
  nlohmann::json j;
  j["path"] = s.path;
  j["language"] = std::string(to_string(s.language));
  j["empty"] = s.empty;
  j["functions"] = nlohmann::json::array();
  for (const auto& f : s.functions) j["functions"].push_back({{"name", f.name}, {"line", f.line}});
  j["variables"] = nlohmann::json::array();
  for (const auto& v : s.variables) j["variables"].push_back({{"name", v.name}, {"line", v.line}});
  j["config_params"] = nlohmann::json::array();
  for (const auto& p : s.config_params) {
    j["config_params"].push_back({{"key", p.key}, {"value", p.value}, {"line", p.line}});
  }
  j["imports"] = s.imports;
  return j;
}

nlohmann::json to_json(const Finding& f) {
  return {{"kind", std::string(to_string(f.kind))}, {"line", f.line}, {"excerpt", f.excerpt},
          {"rationale", f.rationale}};
}

nlohmann::json findings_document(const CodeSummary& s, const std::vector<Finding>& findings) {
  nlohmann::json j;
  j["summary"] = to_json(s);
  j["findings"] = nlohmann::json::array();
  for (const auto& f : findings) j["findings"].push_back(to_json(f));
  return j;
}

}  // namespace helpdesk::review
