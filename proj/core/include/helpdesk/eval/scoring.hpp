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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/agent/agent.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/eval/scenario.hpp"

namespace helpdesk::eval {

struct DetectionScore {
  bool pass = false;
  std::optional<Millis> latency;
  std::string matched_event;
};

/// Passes iff an event matches the true category and topic; a control run
/// passes iff there are no events at all.
DetectionScore score_detection(const std::vector<diag::DiagnosisEvent>& events, const GroundTruth& truth);

/// Queried-only mode: the probe answer's structured fields must name the
/// true category and topic.
DetectionScore score_probe_answer(const agent::DebugReport& report, const GroundTruth& truth);

struct BooleanCriteria {
  bool A = false;
  std::optional<bool> B;
  bool C = false;
};

BooleanCriteria score_boolean_criteria(const agent::DebugReport& report, const GroundTruth& truth);

struct GuidelineTemplates {
  int version = 1;
  std::vector<std::string> lines;  // may use {node_name} {topic_name} {error_type} {cause}
};

GuidelineTemplates parse_guideline_templates(std::string_view yaml_text);
GuidelineTemplates default_guideline_templates();

struct Guideline {
  std::string text;
  std::string category;
  std::string node;
  std::string topic;
  std::string cause;
};

Guideline make_guideline(const GroundTruth& truth, const GuidelineTemplates& templates);

struct JudgeScores {
  int D = 0;
  int E = 0;
  int F = 0;
  int G = 0;
  int H = 0;

  bool operator==(const JudgeScores&) const = default;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string id() const = 0;
  virtual JudgeScores judge(const agent::DebugReport& report, const Guideline& guideline) = 0;
};

/// Structural rubric; a pure function of (report, guideline).
JudgeScores fallback_judge(const agent::DebugReport& report, const Guideline& guideline);

class DeterministicJudge final : public Judge {
 public:
  std::string id() const override { return "deterministic"; }
  JudgeScores judge(const agent::DebugReport& report, const Guideline& guideline) override {
    return fallback_judge(report, guideline);
  }
};

/// Sends {report, criteria, guideline}; expects integer D..H in [0, 10].
class ExternalJudge final : public Judge {
 public:
  explicit ExternalJudge(std::string url) : url_(std::move(url)) {}
  std::string id() const override { return "external"; }
  JudgeScores judge(const agent::DebugReport& report, const Guideline& guideline) override;

 private:
  std::string url_;
};

const std::map<std::string, std::string>& criteria_text();

struct RubricScore {
  bool A = false;
  std::optional<bool> B;
  bool C = false;
  JudgeScores judged;
  std::string judge_id;
  bool fallback_used = false;  // external judge unreachable
};

/// Falls back to the deterministic rubric when the judge throws.
RubricScore score_report(const agent::DebugReport& report, const GroundTruth& truth, Judge& judge,
                         const GuidelineTemplates& templates = default_guideline_templates());

nlohmann::json to_json(const RubricScore& score);
RubricScore rubric_from_json(const nlohmann::json& j);

struct ScoredRun {
  std::string category_label;
  std::string scenario;
  Mode mode = Mode::proactive;
  int repetition = 0;
  DetectionScore detection;
  std::optional<RubricScore> rubric;
};

nlohmann::json to_json(const ScoredRun& run);
ScoredRun scored_run_from_json(const nlohmann::json& j);

/// Table-1-shaped document: per-category detection (queried/proactive) and
/// A..H percentages, row averages and column averages.
nlohmann::json aggregate(const std::vector<ScoredRun>& runs);
std::string render_table(const nlohmann::json& table);

}  // namespace helpdesk::eval
