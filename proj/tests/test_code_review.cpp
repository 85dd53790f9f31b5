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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/io.hpp"
#include "helpdesk/review/code_review.hpp"
#include "test_support.hpp"

namespace helpdesk::review {
namespace {

std::size_t count_kind(const std::vector<Finding>& fs, FindingKind k) {
  return static_cast<std::size_t>(std::count_if(fs.begin(), fs.end(), [&](const Finding& f) { return f.kind == k; }));
}

void expect_excerpts_verbatim(const CodeSummary& s, const std::vector<Finding>& findings) {
  for (const auto& f : findings) {
    ASSERT_GE(f.line, 1U);
    ASSERT_LE(f.line, s.lines.size());
    EXPECT_NE(s.lines[f.line - 1].find(f.excerpt), std::string::npos)
        << "line " << f.line << ": '" << f.excerpt << "'";
  }
}

TEST(Summarize, PythonInjectorNode) {
  const auto s = summarize_file(testing::data_path("samples"), "nodes/laser_fault_injector.py");
  EXPECT_EQ(s.language, Language::python);
  auto has_fn = [&](const std::string& n) {
    return std::any_of(s.functions.begin(), s.functions.end(), [&](const Symbol& f) { return f.name == n; });
  };
  EXPECT_TRUE(has_fn("apply_fault"));
  EXPECT_TRUE(has_fn("on_scan"));
  EXPECT_NE(std::find(s.imports.begin(), s.imports.end(), "import random"), s.imports.end());
  const auto cfg = std::find_if(s.config_params.begin(), s.config_params.end(),
                                [](const ConfigParam& p) { return p.key == "CONFIG_PATH"; });
  ASSERT_NE(cfg, s.config_params.end());
  EXPECT_EQ(cfg->value, "config/lidar_fault.yaml");
}

TEST(Findings, InjectorHasMarkersConsumerHasNone) {
  const auto root = testing::data_path("samples");
  const auto lex = parse_marker_lexicon(read_text_file(testing::data_path("review/markers.yaml")));
  for (const auto* file : {"nodes/laser_fault_injector.py", "nodes/image_fault_injector.py"}) {
    const auto s = summarize_file(root, file);
    const auto f = match_findings(s, nullptr, lex);
    EXPECT_GE(count_kind(f, FindingKind::injection_marker), 1U) << file;
    expect_excerpts_verbatim(s, f);
  }
  for (const auto* file : {"nodes/scan_consumer.py", "nodes/image_consumer.py"}) {
    const auto s = summarize_file(root, file);
    const auto f = match_findings(s, nullptr, lex);
    EXPECT_EQ(count_kind(f, FindingKind::injection_marker), 0U) << file;
    EXPECT_EQ(count_kind(f, FindingKind::syntax_suspect), 0U) << file;
  }
}

TEST(Findings, ConfigIssueFollowsActiveEvent) {
  const auto s = summarize_file(testing::data_path("samples"), "config/lidar_fault.yaml");
  EXPECT_EQ(s.language, Language::yaml);
  diag::DiagnosisEvent e;
  e.category = diag::Category::delay;
  e.topic = "/scan_out";
  const auto f = match_findings(s, &e);
  ASSERT_GE(count_kind(f, FindingKind::config_issue), 2U);  // error_type: delay, output_topic
  expect_excerpts_verbatim(s, f);
  EXPECT_EQ(count_kind(match_findings(s, nullptr), FindingKind::config_issue), 0U);
}

TEST(Findings, SyntaxAndLogicFlags) {
  const auto py = summarize_source("def f(x:\n    if x == None:\n        pass\n    try:\n        g()\n    except:\n        pass\n",
                                   Language::python);
  const auto f = match_findings(py, nullptr);
  EXPECT_EQ(count_kind(f, FindingKind::syntax_suspect), 1U);
  EXPECT_EQ(count_kind(f, FindingKind::logic_flag), 2U);
  expect_excerpts_verbatim(py, f);

  const auto cpp = summarize_source("int main() {\n  int x = 0;\n  if (x = 1) {}\n  return x;\n", Language::c_like);
  const auto g = match_findings(cpp, nullptr);
  EXPECT_EQ(count_kind(g, FindingKind::logic_flag), 1U);
  EXPECT_EQ(count_kind(g, FindingKind::syntax_suspect), 1U);  // '{' on line 1 never closed
  expect_excerpts_verbatim(cpp, g);
}

TEST(Findings, SortedByLine) {
  const auto s = summarize_file(testing::data_path("samples"), "nodes/image_fault_injector.py");
  const auto f = match_findings(s, nullptr);
  EXPECT_TRUE(std::is_sorted(f.begin(), f.end(), [](const Finding& a, const Finding& b) { return a.line < b.line; }));
}

TEST(Summarize, EmptyAndBinaryInput) {
  const auto s = summarize_source("  \n\n", Language::python);
  EXPECT_TRUE(s.empty);
  EXPECT_TRUE(match_findings(s, nullptr).empty());
  const std::string junk("\x01\x02\xff\xfe\x00zz", 7);
  EXPECT_NO_THROW(match_findings(summarize_source(junk), nullptr));
}

TEST(Summarize, CLikeParams) {
  const auto s = summarize_source(
      "#include <rclcpp/rclcpp.hpp>\n#define DROP_RATE 0.5\nconst double kDelay = 350.0;\n"
      "void Node::tick(int n) {\n  declare_parameter<double>(\"error_value\", 1.0);\n}\n",
      Language::c_like);
  EXPECT_EQ(s.imports, std::vector<std::string>{"rclcpp/rclcpp.hpp"});
  ASSERT_EQ(s.config_params.size(), 3U);
  EXPECT_EQ(s.config_params[0].key, "DROP_RATE");
  EXPECT_EQ(s.config_params[1].key, "kDelay");
  EXPECT_EQ(s.config_params[2].key, "error_value");
  ASSERT_EQ(s.functions.size(), 1U);
  EXPECT_EQ(s.functions[0].name, "Node::tick");
}

TEST(Workspace, RejectsEscapes) {
  const auto root = testing::data_path("samples");
  EXPECT_THROW(resolve_in_workspace(root, "../scenarios/fault_suite.yaml"), Error);
  EXPECT_THROW(resolve_in_workspace(root, "/etc/passwd"), Error);
  EXPECT_THROW(resolve_in_workspace(root, "nodes/../../review/markers.yaml"), Error);
  try {
    summarize_file(root, "../../CMakeLists.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::path_outside_workspace);
  }
  try {
    summarize_file(root, "nodes/missing.py");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_found);
  }
  EXPECT_NO_THROW(resolve_in_workspace(root, "nodes/./scan_consumer.py"));
}

TEST(MarkerLexicon, ParseErrors) {
  EXPECT_THROW(parse_marker_lexicon("other: 1\n"), Error);
  EXPECT_THROW(parse_marker_lexicon("markers: [unclosed\n"), Error);
  EXPECT_EQ(parse_marker_lexicon("markers: [Chaos]\n").stems, std::vector<std::string>{"chaos"});
}

TEST(Language, Hints) {
  EXPECT_EQ(parse_language("python-like"), Language::python);
  EXPECT_EQ(parse_language("c-like"), Language::c_like);
  EXPECT_THROW(parse_language("cobol"), Error);
  EXPECT_EQ(language_for_path("a/b.hpp"), Language::c_like);
}

}  // namespace
}  // namespace helpdesk::review
