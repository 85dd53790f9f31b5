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

#include "helpdesk/eval/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "helpdesk/agent/backend.hpp"
#include "helpdesk/common/error.hpp"
#include "helpdesk/common/http.hpp"
#include "helpdesk/common/names.hpp"
#include "helpdesk/kb/knowledge_base.hpp"

namespace helpdesk::eval {
namespace {

std::string normalize_category(const std::string& text) {
  if (text.empty()) return text;
  try {
    return std::string(diag::to_string(diag::parse_category(text)));
  } catch (const Error&) {
    return to_lower(text);
  }
}

const std::set<std::string>& relevant_tools(const std::string& category) {
  static const std::map<std::string, std::set<std::string>> table = {
      {"drop", {"topic_hz", "topic_echo", "node_info", "read_log_tail", "list_nodes", "code_review"}},
      {"delay", {"topic_echo", "topic_hz", "code_review"}},
      {"corrupt", {"topic_echo", "code_review"}},
      {"node_crash", {"node_info", "read_log_tail", "list_nodes", "restart_node"}},
      {"log_error", {"read_log_tail", "node_info", "code_review"}},
  };
  static const std::set<std::string> any = {"topic_hz", "topic_echo", "node_info", "read_log_tail",
                                            "list_nodes", "code_review", "restart_node"};
  auto it = table.find(category);
  return it == table.end() ? any : it->second;
}

const std::set<std::string>& actionable_verbs() {
  static const std::set<std::string> verbs = {
      "check",   "restart", "inspect", "verify",  "remove",  "disable", "review",   "replace",
      "reduce",  "increase", "monitor", "run",    "echo",    "compare", "roll",     "fix",
      "update",  "confirm", "examine", "look",    "reconnect", "reset", "relaunch", "detach",
      "investigate", "measure", "test", "open",   "read",    "search",  "audit",    "respawn"};
  return verbs;
}

std::string first_word(const std::string& s) {
  std::string w;
  for (char c : trim(s)) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return w;
}

double pct(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json opt_num(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

DetectionScore score_detection(const std::vector<diag::DiagnosisEvent>& events, const GroundTruth& truth) {
  DetectionScore s;
  if (truth.true_category.empty()) {
    s.pass = events.empty();
    return s;
  }
  for (const auto& e : events) {
    if (diag::to_string(e.category) == truth.true_category && canonical_topic(e.topic) == truth.true_topic) {
      s.pass = true;
      s.latency = e.time.millis - truth.onset;
      s.matched_event = e.id;
      break;
    }
  }
  return s;
}

DetectionScore score_probe_answer(const agent::DebugReport& report, const GroundTruth& truth) {
  DetectionScore s;
  if (truth.true_category.empty()) {
    s.pass = report.identified_error_type.empty();
    return s;
  }
  const bool category = normalize_category(report.identified_error_type) == truth.true_category;
  const bool where = (!report.identified_topic.empty() && canonical_topic(report.identified_topic) == truth.true_topic) ||
                     (!truth.topic_applicable && canonical_node(report.identified_node) == truth.true_node);
  s.pass = category && where;
  return s;
}

BooleanCriteria score_boolean_criteria(const agent::DebugReport& report, const GroundTruth& truth) {
  BooleanCriteria c;
  c.A = !report.identified_node.empty() && canonical_node(report.identified_node) == canonical_node(truth.true_node);
  if (truth.topic_applicable) {
    c.B = !report.identified_topic.empty() && canonical_topic(report.identified_topic) == canonical_topic(truth.true_topic);
  }
  c.C = !report.identified_error_type.empty() && normalize_category(report.identified_error_type) == truth.true_category;
  return c;
}

GuidelineTemplates default_guideline_templates() {
  GuidelineTemplates t;
  t.lines = {"The report should name {node_name} as the node involved.",
             "The report should name {topic_name} as the affected topic.",
             "The error type should be identified as {error_type}.",
             "Extra credit if the cause is identified as {cause}."};
  return t;
}

GuidelineTemplates parse_guideline_templates(std::string_view yaml_text) {
  GuidelineTemplates t;
  try {
    const auto root = YAML::Load(std::string(yaml_text));
    if (!root["lines"] || !root["lines"].IsSequence()) {
      throw Error(Errc::validation_error, "guideline templates need a 'lines' list", "lines");
    }
    if (root["version"]) t.version = root["version"].as<int>();
    for (const auto& l : root["lines"]) t.lines.push_back(l.as<std::string>());
  } catch (const YAML::Exception& e) {
    throw Error(Errc::parse_error, std::string("guideline templates: ") + e.what());
  }
  return t;
}

Guideline make_guideline(const GroundTruth& truth, const GuidelineTemplates& templates) {
  Guideline g;
  g.category = truth.true_category;
  g.node = truth.true_node;
  g.topic = truth.true_topic;
  if (truth.true_category == "node_crash") {
    g.cause = "an intentionally injected crash of " + truth.true_node;
  } else if (!truth.ledger_ref.empty()) {
    g.cause = "intentional fault injection by " + truth.ledger_ref +
              (truth.injector_source.empty() ? std::string() : " (" + truth.injector_source + ")");
  }
  const std::map<std::string, std::string> vars = {
      {"node_name", g.node}, {"topic_name", g.topic}, {"error_type", g.category}, {"cause", g.cause}};
  for (const auto& line : templates.lines) {
    if (line.find("{topic_name}") != std::string::npos && !truth.topic_applicable) continue;
    g.text += agent::expand(line, vars) + "\n";
  }
  return g;
}

JudgeScores fallback_judge(const agent::DebugReport& r, const Guideline& g) {
  JudgeScores s;

  std::set<std::string> hyps;
  for (const auto& h : r.hypotheses) {
    auto t = to_lower(trim(h));
    if (!t.empty()) hyps.insert(t);
  }
  s.D = hyps.empty() ? 0 : hyps.size() == 1 ? 5 : hyps.size() == 2 ? 8 : 10;

  if (r.diagnostics_run.empty()) {
    s.E = 0;
  } else {
    std::set<std::string> relevant;
    for (const auto& d : r.diagnostics_run) {
      if (d.ok && relevant_tools(g.category).contains(d.tool)) relevant.insert(d.tool);
    }
    s.E = relevant.empty() ? 4 : relevant.size() == 1 ? 8 : 10;
  }

  if (r.diagnostics_run.empty()) {
    s.F = 0;
  } else if (r.evidence.empty()) {
    s.F = 3;
  } else {
    kb::TokenSet evidence_tokens;
    for (const auto& e : r.evidence) {
      auto t = kb::tokenize(e);
      evidence_tokens.insert(t.begin(), t.end());
    }
    const bool consistent = std::any_of(r.hypotheses.begin(), r.hypotheses.end(), [&](const std::string& h) {
      const auto t = kb::tokenize(h);
      return std::any_of(t.begin(), t.end(), [&](const std::string& tok) { return evidence_tokens.contains(tok); });
    });
    s.F = consistent ? 10 : 6;
  }

  if (r.recommendations.empty()) {
    s.G = 0;
  } else {
    const auto actionable = std::count_if(r.recommendations.begin(), r.recommendations.end(),
                                          [](const std::string& rec) { return actionable_verbs().contains(first_word(rec)); });
    s.G = 4 + static_cast<int>(std::lround(6.0 * static_cast<double>(actionable) /
                                           static_cast<double>(r.recommendations.size())));
  }

  const bool marker = std::any_of(r.code_findings.begin(), r.code_findings.end(), [](const agent::CodeFinding& f) {
    return f.finding.kind == review::FindingKind::injection_marker;
  });
  if (marker) {
    s.H = 10;
  } else if (r.root_cause && to_lower(*r.root_cause).find("inject") != std::string::npos) {
    s.H = 5;
  } else {
    s.H = 0;
  }
  return s;
}

const std::map<std::string, std::string>& criteria_text() {
  static const std::map<std::string, std::string> c = {
      {"A", "Names the node involved."},
      {"B", "Names the affected topic."},
      {"C", "Names the error type (drop, delay, corrupt, node crash)."},
      {"D", "Proposes hypotheses for the cause."},
      {"E", "Runs diagnostic checks."},
      {"F", "Shows diagnostic results that support a hypothesis."},
      {"G", "Recommends next actions."},
      {"H", "Finds the real cause: a deliberately injected fault."},
  };
  return c;
}

JudgeScores ExternalJudge::judge(const agent::DebugReport& report, const Guideline& guideline) {
  nlohmann::json criteria = nlohmann::json::object();
  for (const auto& [k, v] : criteria_text()) {
    if (k >= "D") criteria[k] = v;
  }
  const auto reply = post_json(url_, {{"report", agent::to_json(report)},
                                      {"criteria", criteria},
                                      {"guideline", guideline.text}});
  JudgeScores s;
  auto grab = [&](const char* key, int& out) {
    if (!reply.contains(key) || !reply.at(key).is_number_integer()) {
      throw Error(Errc::backend_error, std::string("judge reply lacks integer ") + key);
    }
    out = reply.at(key).get<int>();
    if (out < 0 || out > 10) throw Error(Errc::backend_error, std::string("judge score out of range for ") + key);
  };
  grab("D", s.D);
  grab("E", s.E);
  grab("F", s.F);
  grab("G", s.G);
  grab("H", s.H);
  return s;
}

RubricScore score_report(const agent::DebugReport& report, const GroundTruth& truth, Judge& judge,
                         const GuidelineTemplates& templates) {
  RubricScore s;
  const auto b = score_boolean_criteria(report, truth);
  s.A = b.A;
  s.B = b.B;
  s.C = b.C;
  const auto guideline = make_guideline(truth, templates);
  try {
    s.judged = judge.judge(report, guideline);
    s.judge_id = judge.id();
  } catch (const std::exception&) {
    s.judged = fallback_judge(report, guideline);
    s.judge_id = "deterministic";
    s.fallback_used = true;
  }
  return s;
}

nlohmann::json to_json(const RubricScore& s) {
  return {{"A", s.A},
          {"B", s.B ? nlohmann::json(*s.B) : nlohmann::json(nullptr)},
          {"C", s.C},
          {"D", s.judged.D},
          {"E", s.judged.E},
          {"F", s.judged.F},
          {"G", s.judged.G},
          {"H", s.judged.H},
          {"judge_id", s.judge_id},
          {"fallback_used", s.fallback_used}};
}

RubricScore rubric_from_json(const nlohmann::json& j) {
  RubricScore s;
  s.A = j.value("A", false);
  if (j.contains("B") && j.at("B").is_boolean()) s.B = j.at("B").get<bool>();
  s.C = j.value("C", false);
  s.judged = JudgeScores{j.value("D", 0), j.value("E", 0), j.value("F", 0), j.value("G", 0), j.value("H", 0)};
  s.judge_id = j.value("judge_id", "");
  s.fallback_used = j.value("fallback_used", false);
  return s;
}

nlohmann::json to_json(const ScoredRun& r) {
  nlohmann::json j = {{"category", r.category_label}, {"scenario", r.scenario},
                      {"mode", std::string(to_string(r.mode))}, {"repetition", r.repetition}};
  j["detection"] = {{"pass", r.detection.pass},
                    {"latency_ms", r.detection.latency ? nlohmann::json(*r.detection.latency) : nlohmann::json(nullptr)},
                    {"matched_event", r.detection.matched_event}};
  j["rubric"] = r.rubric ? to_json(*r.rubric) : nlohmann::json(nullptr);
  return j;
}

ScoredRun scored_run_from_json(const nlohmann::json& j) {
  ScoredRun r;
  r.category_label = j.value("category", "");
  r.scenario = j.value("scenario", "");
  r.mode = parse_mode(j.value("mode", "proactive"));
  r.repetition = j.value("repetition", 0);
  const auto& d = j.at("detection");
  r.detection.pass = d.value("pass", false);
  if (d.contains("latency_ms") && d.at("latency_ms").is_number()) r.detection.latency = d.at("latency_ms").get<Millis>();
  r.detection.matched_event = d.value("matched_event", "");
  if (j.contains("rubric") && j.at("rubric").is_object()) r.rubric = rubric_from_json(j.at("rubric"));
  return r;
}

nlohmann::json aggregate(const std::vector<ScoredRun>& runs) {
  static const std::vector<std::string> criteria = {"A", "B", "C", "D", "E", "F", "G", "H"};
  std::vector<std::string> labels;
  for (const auto& r : runs) {
    if (std::find(labels.begin(), labels.end(), r.category_label) == labels.end()) labels.push_back(r.category_label);
  }
  const auto& order = category_order();
  std::sort(labels.begin(), labels.end(), [&](const std::string& a, const std::string& b) {
    const auto ia = std::find(order.begin(), order.end(), a) - order.begin();
    const auto ib = std::find(order.begin(), order.end(), b) - order.begin();
    return ia != ib ? ia < ib : a < b;
  });

  nlohmann::json table;
  table["columns"] = {"queried", "proactive", "A", "B", "C", "D", "E", "F", "G", "H", "average"};
  table["rows"] = nlohmann::json::array();
  std::map<std::string, std::vector<double>> column_values;

  for (const auto& label : labels) {
    std::size_t q_runs = 0, q_pass = 0, p_runs = 0, p_pass = 0;
    std::vector<const RubricScore*> scores;
    for (const auto& r : runs) {
      if (r.category_label != label) continue;
      if (r.mode == Mode::queried) {
        ++q_runs;
        q_pass += r.detection.pass ? 1 : 0;
      } else {
        ++p_runs;
        p_pass += r.detection.pass ? 1 : 0;
        if (r.rubric) scores.push_back(&*r.rubric);
      }
    }
    std::map<std::string, std::optional<double>> cells;
    cells["queried"] = q_runs ? std::optional(pct(q_pass, q_runs)) : std::nullopt;
    cells["proactive"] = p_runs ? std::optional(pct(p_pass, p_runs)) : std::nullopt;
    for (const auto& c : criteria) cells[c] = std::nullopt;
    if (!scores.empty()) {
      std::size_t a = 0, b = 0, b_n = 0, cc = 0;
      double d = 0, e = 0, f = 0, g = 0, h = 0;
      for (const auto* s : scores) {
        a += s->A ? 1 : 0;
        if (s->B) {
          ++b_n;
          b += *s->B ? 1 : 0;
        }
        cc += s->C ? 1 : 0;
        d += s->judged.D;
        e += s->judged.E;
        f += s->judged.F;
        g += s->judged.G;
        h += s->judged.H;
      }
      const double n = static_cast<double>(scores.size());
      cells["A"] = pct(a, scores.size());
      if (b_n) cells["B"] = pct(b, b_n);
      cells["C"] = pct(cc, scores.size());
      cells["D"] = d / n * 10.0;
      cells["E"] = e / n * 10.0;
      cells["F"] = f / n * 10.0;
      cells["G"] = g / n * 10.0;
      cells["H"] = h / n * 10.0;
    }
    double sum = 0;
    int count = 0;
    for (const auto& c : criteria) {
      if (cells[c]) {
        sum += *cells[c];
        ++count;
      }
    }
    cells["average"] = count ? std::optional(sum / count) : std::nullopt;

    nlohmann::json row;
    row["category"] = label;
    row["runs"] = {{"queried", q_runs}, {"proactive", p_runs}};
    row["cells"] = nlohmann::json::object();
    for (const auto& col : table["columns"]) {
      const auto key = col.get<std::string>();
      row["cells"][key] = opt_num(cells[key]);
      if (cells[key]) column_values[key].push_back(*cells[key]);
    }
    table["rows"].push_back(row);
  }

  table["average"] = nlohmann::json::object();
  for (const auto& col : table["columns"]) {
    const auto key = col.get<std::string>();
    const auto& v = column_values[key];
    double sum = 0;
    for (double x : v) sum += x;
    table["average"][key] = v.empty() ? nlohmann::json(nullptr) : nlohmann::json(sum / static_cast<double>(v.size()));
  }
  return table;
}

std::string render_table(const nlohmann::json& table) {
  auto cell = [](const nlohmann::json& v, bool detection) -> std::string {
    if (v.is_null()) return "n/a";
    const double x = v.get<double>();
    if (detection && x == 100.0) return "✓";
    if (detection && x == 0.0) return "✗";
    return fmt::format("{:.0f}%", x);
  };
  // Width counts code points so the check marks line up.
  auto pad = [](const std::string& s, std::size_t width) {
    std::size_t cps = 0;
    for (unsigned char c : s) cps += (c & 0xC0) != 0x80 ? 1 : 0;
    return cps >= width ? s : std::string(width - cps, ' ') + s;
  };
  std::string out = fmt::format("{:<16}{}{}", "Fault Category", pad("Queried", 9), pad("Proactive", 11));
  for (const auto* c : {"A", "B", "C", "D", "E", "F", "G", "H"}) out += pad(c, 6);
  out += pad("Average", 9) + "\n";
  auto line = [&](const std::string& label, const nlohmann::json& cells) {
    std::string l = fmt::format("{:<16}", label);
    l += pad(cell(cells["queried"], true), 9);
    l += pad(cell(cells["proactive"], true), 11);
    for (const auto* c : {"A", "B", "C", "D", "E", "F", "G", "H"}) l += pad(cell(cells[c], false), 6);
    l += pad(cell(cells["average"], false), 9);
    return l + "\n";
  };
  for (const auto& row : table["rows"]) out += line(row["category"].get<std::string>(), row["cells"]);
  out += std::string(16 + 9 + 11 + 6 * 8 + 9, '-') + "\n";
  // Averages are always printed as percentages.
  std::string avg = fmt::format("{:<16}", "Average");
  for (const auto* c : {"queried", "proactive", "A", "B", "C", "D", "E", "F", "G", "H", "average"}) {
    const auto& v = table["average"][c];
    const std::size_t width = std::string_view(c) == "queried" ? 9 : std::string_view(c) == "proactive" ? 11
                              : std::string_view(c) == "average" ? 9 : 6;
    avg += pad(v.is_null() ? "n/a" : fmt::format("{:.0f}%", v.get<double>()), width);
  }
  return out + avg + "\n";
}

}  // namespace helpdesk::eval
