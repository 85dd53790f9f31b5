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

// helpdesk-eval: runs scenario repetitions, scores the saved runs and
// renders the per-category table.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/io.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/eval/scenario.hpp"
#include "helpdesk/eval/scoring.hpp"
#include "helpdesk/eval/testbed.hpp"

namespace fs = std::filesystem;
using namespace helpdesk;

namespace {

struct RunArgs {
  std::string scenario;
  std::string only;
  std::string mode;
  int reps = 0;
  std::string out;
  std::string detectors;
};

struct ScoreArgs {
  std::string in;
  std::string judge = "deterministic";
  std::string judge_url;
  std::string guidelines;
};

struct ReportArgs {
  std::string in;
  std::string format = "table";
};

int cmd_run(const RunArgs& a) {
  auto specs = eval::load_scenarios(a.scenario);
  eval::RunOptions opts;
  if (!a.mode.empty()) opts.mode = eval::parse_mode(a.mode);
  if (!a.detectors.empty()) opts.testbed.detector_config = diag::parse_detector_config(read_text_file(a.detectors));
  opts.testbed.record_trace = true;

  int failures = 0;
  for (const auto& spec : specs) {
    if (!a.only.empty() && spec.name != a.only) continue;
    const int reps = a.reps > 0 ? a.reps : spec.repetitions;
    const auto mode = opts.mode.value_or(spec.mode);
    int passed = 0;
    for (int rep = 0; rep < reps; ++rep) {
      auto run = eval::run_scenario(spec, rep, opts);
      eval::persist_run(run, fs::path(a.out) / spec.name / std::string(eval::to_string(mode)) / fmt::format("rep-{:03}", rep));
      passed += run.detection.pass ? 1 : 0;
    }
    failures += reps - passed;
    std::cout << fmt::format("{:<16} {:<10} detected {}/{}\n", spec.name, eval::to_string(mode), passed, reps);
  }
  return failures == 0 ? 0 : 3;
}

std::vector<fs::path> run_dirs(const fs::path& root) {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "run.json") dirs.push_back(entry.path().parent_path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

int cmd_score(const ScoreArgs& a) {
  std::unique_ptr<eval::Judge> judge;
  if (a.judge == "deterministic") {
    judge = std::make_unique<eval::DeterministicJudge>();
  } else if (a.judge == "external") {
    if (a.judge_url.empty()) throw Error(Errc::invalid_argument, "--judge external needs --judge-url", "judge-url");
    judge = std::make_unique<eval::ExternalJudge>(a.judge_url);
  } else {
    throw Error(Errc::invalid_argument, "unknown judge '" + a.judge + "' (allowed: deterministic, external)", "judge");
  }
  const auto templates = a.guidelines.empty() ? eval::default_guideline_templates()
                                              : eval::parse_guideline_templates(read_text_file(a.guidelines));

  std::ofstream all(fs::path(a.in) / "scores.jsonl", std::ios::trunc);
  if (!all) throw Error(Errc::storage_error, "cannot write scores.jsonl under " + a.in);
  std::size_t fallbacks = 0;
  std::size_t n = 0;
  for (const auto& dir : run_dirs(a.in)) {
    const auto meta = nlohmann::json::parse(read_text_file(dir / "run.json"));
    const auto truth = eval::truth_from_json(nlohmann::json::parse(read_text_file(dir / "truth.json")));
    eval::ScoredRun scored;
    scored.category_label = truth.category_label;
    scored.scenario = meta.value("scenario", "");
    scored.mode = eval::parse_mode(meta.value("mode", "proactive"));
    scored.repetition = meta.value("repetition", 0);
    const auto& det = meta.at("detection");
    scored.detection.pass = det.value("pass", false);
    if (!det.at("latency_ms").is_null()) scored.detection.latency = det.at("latency_ms").get<sim::Millis>();
    scored.detection.matched_event = det.value("matched_event", "");
    if (scored.mode == eval::Mode::proactive && fs::exists(dir / "report.json")) {
      const auto report = agent::report_from_json(nlohmann::json::parse(read_text_file(dir / "report.json")));
      scored.rubric = eval::score_report(report, truth, *judge, templates);
      fallbacks += scored.rubric->fallback_used ? 1 : 0;
    }
    const auto doc = eval::to_json(scored);
    write_text_file_atomic(dir / "score.json", doc.dump(2) + "\n");
    all << doc.dump() << '\n';
    ++n;
  }
  std::cout << fmt::format("scored {} runs with the {} judge", n, judge->id());
  if (fallbacks) std::cout << fmt::format(" ({} fell back to the deterministic rubric)", fallbacks);
  std::cout << '\n';
  return 0;
}

int cmd_report(const ReportArgs& a) {
  std::vector<eval::ScoredRun> runs;
  std::ifstream in(fs::path(a.in) / "scores.jsonl");
  if (!in) throw Error(Errc::storage_error, "no scores.jsonl under " + a.in + "; run `score` first");
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) runs.push_back(eval::scored_run_from_json(nlohmann::json::parse(line)));
  }
  const auto table = eval::aggregate(runs);
  if (a.format == "json") {
    std::cout << table.dump(2) << '\n';
  } else if (a.format == "table") {
    std::cout << eval::render_table(table);
  } else {
    throw Error(Errc::invalid_argument, "unknown format '" + a.format + "' (allowed: json, table)", "format");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario runner and scorer for the help desk"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run scenario repetitions and save traces, events and reports");
  run_cmd->add_option("--scenario", run.scenario, "Scenario or suite YAML")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--name", run.only, "Only run the scenario with this name");
  run_cmd->add_option("--mode", run.mode, "proactive or queried (default: per scenario)");
  run_cmd->add_option("--reps", run.reps, "Repetitions per scenario (default: per scenario)");
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--detectors", run.detectors, "Detector threshold YAML")->check(CLI::ExistingFile);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score saved runs");
  score_cmd->add_option("--in", score.in, "Directory written by `run`")->required()->check(CLI::ExistingDirectory);
  score_cmd->add_option("--judge", score.judge, "deterministic or external");
  score_cmd->add_option("--judge-url", score.judge_url, "Judge endpoint for --judge external");
  score_cmd->add_option("--guidelines", score.guidelines, "Guideline template YAML")->check(CLI::ExistingFile);

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Aggregate scores into the per-category table");
  report_cmd->add_option("--in", report.in, "Directory holding scores.jsonl")->required();
  report_cmd->add_option("--format", report.format, "json or table");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*score_cmd) return cmd_score(score);
    return cmd_report(report);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
