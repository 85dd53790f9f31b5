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

#include "helpdesk/agent/agent.hpp"

#include <algorithm>
#include <regex>

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::agent {
namespace {

std::string first_line(const std::string& text, std::size_t max = 120) {
  auto line = text.substr(0, text.find('\n'));
  if (line.size() > max) line = line.substr(0, max - 3) + "...";
  return line;
}

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (const auto& i : items) {
    if (!out.empty()) out += sep;
    out += i;
  }
  return out;
}

std::string sensor_word(const diag::DiagnosisEvent& e) {
  const auto s = e.evidence.value("sensor", std::string());
  return s.empty() ? "sensor" : s;
}

std::string plain_problem(const diag::DiagnosisEvent& e) {
  switch (e.category) {
    case diag::Category::drop: return "the " + sensor_word(e) + " stopped sending data";
    case diag::Category::delay: return "data from the " + sensor_word(e) + " is arriving late";
    case diag::Category::corrupt: return "the " + sensor_word(e) + " is sending broken data";
    case diag::Category::node_crash: return "the program " + e.suspected_node + " stopped running";
    case diag::Category::log_error: return "a program reported an error";
  }
  return "something went wrong";
}

double ratio(const nlohmann::json& ev, const char* num, const char* den) {
  const double d = ev.value(den, 0.0);
  return d > 0 ? ev.value(num, 0.0) / d : 0.0;
}

// Observations that show an anomaly become report evidence.
std::optional<std::string> evidence_from(const AgentStep& s, const sim::MessageBus& bus,
                                         const ToolResult& result) {
  if (!s.action || !s.tool_ok) return std::nullopt;
  const auto& tool = s.action->tool;
  static const nlohmann::json kEmpty = nlohmann::json::object();
  const auto& d = result.data.is_object() ? result.data : kEmpty;
  if (tool == "topic_hz") {
    const auto topic = canonical_topic(s.action->args.value("topic", ""));
    const auto p = bus.declared_period(topic);
    if (p && d.value("hz", 0.0) < 0.5 * 1000.0 / static_cast<double>(*p)) {
      return "topic_hz " + topic + ": " + first_line(s.observation);
    }
  } else if (tool == "topic_echo") {
    const auto topic = canonical_topic(s.action->args.value("topic", ""));
    const auto p = bus.declared_period(topic).value_or(100);
    if (d.value("unique_values", std::size_t{2}) <= 1) {
      return "topic_echo " + topic + ": every value in the latest message is identical";
    }
    if (d.contains("age_ms") && d.at("age_ms").get<sim::Millis>() > 2 * p) {
      return fmt::format("topic_echo {}: latest message is {} ms old", topic, d.at("age_ms").get<sim::Millis>());
    }
  } else if (tool == "node_info") {
    if (d.contains("alive") && !d.at("alive").get<bool>()) {
      return "node_info " + d.value("node", "") + ": status dead";
    }
  } else if (tool == "read_log_tail") {
    std::string::size_type pos = 0;
    const auto& text = s.observation;
    while (pos < text.size()) {
      const auto end = text.find('\n', pos);
      const auto line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      if (line.rfind("[FATAL]", 0) == 0 || line.rfind("[ERROR]", 0) == 0) return "read_log_tail: " + line;
      if (end == std::string::npos) break;
      pos = end + 1;
    }
  } else if (tool == "code_review") {
    if (d.contains("findings") && !d.at("findings").empty()) {
      const auto& f = d.at("findings").front();
      return fmt::format("code_review {}: L{} {} `{}`", d["summary"].value("path", ""), f.value("line", 0),
                         f.value("kind", ""), f.value("excerpt", ""));
    }
  } else if (tool == "kb_lookup") {
    if (d.value("hits", 0) > 0) return "kb_lookup: " + first_line(s.observation);
  }
  return std::nullopt;
}

}  // namespace

std::string event_signature(const diag::DiagnosisEvent& e) {
  std::string sig = fmt::format("{} on {} from node {}", diag::to_string(e.category), e.topic, e.suspected_node);
  if (e.category == diag::Category::corrupt) sig += " " + e.evidence.value("verdict", std::string());
  if (e.category == diag::Category::node_crash) sig += " process died";
  if (e.category == diag::Category::log_error) sig += " " + e.evidence.value("log_excerpt", std::string());
  return sig;
}

Agent::Agent(sim::MessageBus& bus, diag::DiagnosticsEngine* diagnostics, kb::KnowledgeBase& kb,
             std::shared_ptr<Backend> backend, AgentConfig config)
    : bus_(&bus), diagnostics_(diagnostics), kb_(&kb), backend_(std::move(backend)), config_(std::move(config)) {
  if (!backend_) throw Error(Errc::invalid_argument, "agent needs a backend", "backend");
  if (config_.max_steps < 1) throw Error(Errc::invalid_argument, "max_steps must be >= 1", "max_steps");
  ToolContext ctx;
  ctx.bus = bus_;
  ctx.kb = kb_;
  ctx.workspace = config_.workspace;
  ctx.lexicon = config_.lexicon;
  ctx.restart_allowed = config_.restart_allowed;
  ctx.active_event = [this] { return active_event_; };
  tools_ = make_default_tools(std::move(ctx));
}

Session& Agent::start_session(Level level) {
  auto s = std::make_unique<Session>();
  s->id = fmt::format("s-{}", next_session_++);
  s->profile.level = level;
  s->created_at = bus_->now().millis;

  Draft greet;
  const auto monitored = diagnostics_ ? diagnostics_->monitored_topics().size() : 0;
  greet.summary = fmt::format(
      "Help desk ready. I watch /rosout and {} sensor topics and will notify you when a node or topic "
      "misbehaves. Ask about any node or topic.",
      monitored);
  greet.plain_summary =
      "Hi! I keep an eye on the robot's programs (nodes) and the data channels between them (topics), "
      "and I will tell you if something goes wrong. You can ask me about any part of the system.";
  greet.terms = {"node", "topic"};
  greet.expert_summary = fmt::format("Monitoring /rosout + {} sensor topics.", monitored);
  s->transcript.push_back({"agent", shape_response(greet, level)});

  auto& ref = *s;
  sessions_[s->id] = std::move(s);
  return ref;
}

Session& Agent::session(std::string_view id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::not_found, "unknown session " + std::string(id));
  return *it->second;
}

const Session* Agent::find_session(std::string_view id) const {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second.get();
}

std::vector<std::string> Agent::session_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

const diag::DiagnosisEvent* Agent::event_for(std::string_view event_id) const {
  if (auto it = known_events_.find(event_id); it != known_events_.end()) return &it->second;
  return diagnostics_ ? diagnostics_->find(event_id) : nullptr;
}

Notification Agent::notify(Session& session, const diag::DiagnosisEvent& e) {
  Notification n;
  n.event_id = e.id;
  n.fix_token = "fix:" + e.id;
  known_events_.insert_or_assign(e.id, e);
  if (session.notified.contains(e.id)) {
    n.duplicate = true;
    return n;
  }
  const auto& ev = e.evidence;
  const auto period = ev.value("nominal_period_ms", 0);
  switch (session.profile.effective()) {
    case Level::beginner: {
      Draft d;
      d.plain_summary = fmt::format("Heads up: {} on the topic {}.", plain_problem(e), e.topic);
      d.terms = {"topic"};
      if (e.category != diag::Category::log_error) d.terms.push_back("node");
      if (sensor_word(e) != "sensor") d.terms.push_back(sensor_word(e));
      n.text = shape_response(d, Level::beginner);
      break;
    }
    case Level::intermediate:
      switch (e.category) {
        case diag::Category::drop:
          n.text = fmt::format("Drop detected on {}: no messages for {} ms (expected one every {} ms). "
                               "Suspected node: {}.",
                               e.topic, ev.value("gap_ms", 0), period, e.suspected_node);
          break;
        case diag::Category::delay:
          n.text = fmt::format("Delay detected on {}: messages arrive {} ms after their timestamp "
                               "(limit {} ms). Suspected node: {}.",
                               e.topic, ev.value("staleness_ms", 0), ev.value("delay_threshold_ms", 0),
                               e.suspected_node);
          break;
        case diag::Category::corrupt:
          n.text = fmt::format("Corrupted data on {}: {} in message {}. Suspected node: {}.", e.topic,
                               ev.value("verdict", std::string("invalid content")), ev.value("seq", 0),
                               e.suspected_node);
          break;
        case diag::Category::node_crash:
          n.text = fmt::format("Node {} crashed; {} has stopped publishing.", e.suspected_node, e.topic);
          break;
        case diag::Category::log_error:
          n.text = fmt::format("Error logged by {}: {}", ev.value("logger", e.suspected_node),
                               ev.value("log_excerpt", std::string()));
          break;
      }
      break;
    case Level::expert:
      switch (e.category) {
        case diag::Category::drop:
          n.text = fmt::format("drop detected on {} (gap {} ms > {:g}×period)", e.topic, ev.value("gap_ms", 0),
                               ratio(ev, "drop_threshold_ms", "nominal_period_ms"));
          break;
        case diag::Category::delay:
          n.text = fmt::format("delay detected on {} (staleness {} ms > {:g}×period, {} msgs)", e.topic,
                               ev.value("staleness_ms", 0), ratio(ev, "delay_threshold_ms", "nominal_period_ms"),
                               ev.value("stale_messages", 0));
          break;
        case diag::Category::corrupt:
          n.text = fmt::format("corrupt payload on {} ({}, seq {})", e.topic, ev.value("verdict", std::string()),
                               ev.value("seq", 0));
          break;
        case diag::Category::node_crash:
          n.text = fmt::format("node_crash: {} died at {} ms; {} silent", e.suspected_node, e.time.millis, e.topic);
          break;
        case diag::Category::log_error:
          n.text = fmt::format("log error [{}] {}", ev.value("logger", e.suspected_node),
                               ev.value("log_excerpt", std::string()));
          break;
      }
      break;
  }
  session.notified.insert(e.id);
  if (std::find(session.open_events.begin(), session.open_events.end(), e.id) == session.open_events.end()) {
    session.open_events.push_back(e.id);
  }
  session.transcript.push_back({"system", n.text});
  return n;
}

std::map<std::string, std::string> Agent::vars_for(const diag::DiagnosisEvent* e) const {
  auto vars = config_.vars;
  if (!e) return vars;
  vars["topic"] = e->topic;
  vars["node"] = e->suspected_node;
  vars["category"] = std::string(diag::to_string(e->category));
  vars["sensor"] = sensor_word(*e);
  vars["event_id"] = e->id;
  vars["signature"] = event_signature(*e);
  const auto pubs = bus_->publishers_of(e->topic);
  vars["publisher"] = pubs.empty() ? e->suspected_node : pubs.front();
  return vars;
}

std::string Agent::invoke_tool(std::string_view name, const nlohmann::json& args) {
  return tools_.invoke(name, args).text;
}

DebugReport Agent::run_react(Session& session, std::string goal, const diag::DiagnosisEvent* event) {
  if (session.status == SessionStatus::resolved) {
    throw Error(Errc::already_resolved, "session " + session.id + " is resolved");
  }
  BackendRequest req;
  req.goal = std::move(goal);
  req.level = std::string(to_string(session.profile.effective()));
  if (event) req.event = *event;
  req.vars = vars_for(event);
  for (const auto& name : tools_.names()) req.tools.emplace_back(name, tools_.description(name));

  active_event_ = event;
  std::vector<ToolResult> results;
  auto run_tool = [&](std::string thought, ToolCall call) {
    AgentStep step;
    step.thought = std::move(thought);
    ToolResult r;
    try {
      r = tools_.invoke(call.tool, call.args);
    } catch (const Error& e) {
      r = ToolResult{fmt::format("error [{}]: {}", to_string(e.code()), e.what()), false, {}};
    }
    step.action = std::move(call);
    step.observation = r.text;
    step.tool_ok = r.ok;
    req.steps.push_back(std::move(step));
    results.push_back(std::move(r));
  };

  // RAG first: a matching prior fix is looked up before the backend plans.
  if (config_.rag_first && kb_->size() > 0) {
    const auto query = event ? event_signature(*event) : req.goal;
    if (!kb_->retrieve(query, 1).empty()) {
      run_tool("Checking the knowledge base for a known fix.", ToolCall{"kb_lookup", {{"query", query}, {"k", 3}}});
    }
  }

  std::optional<FinalAnswer> final;
  bool incomplete = false;
  std::string reason;
  while (!final) {
    if (req.steps.size() >= config_.max_steps) {
      incomplete = true;
      reason = fmt::format("step limit {} reached without a final answer", config_.max_steps);
      break;
    }
    BackendResponse resp;
    try {
      resp = backend_->next(req);
    } catch (const std::exception& e) {
      incomplete = true;
      reason = std::string("backend error: ") + e.what();
      break;
    }
    if (resp.final) {
      final = std::move(resp.final);
      break;
    }
    if (!resp.action) {
      incomplete = true;
      reason = "backend returned neither an action nor a final answer";
      break;
    }
    run_tool(std::move(resp.thought), std::move(*resp.action));
  }
  active_event_ = nullptr;

  auto report = assemble(req, req.steps, final, incomplete, std::move(reason));
  // Evidence needs the structured tool data, which the steps do not keep.
  for (std::size_t i = 0; i < req.steps.size(); ++i) {
    if (auto ev = evidence_from(req.steps[i], *bus_, results[i])) report.evidence.push_back(*ev);
    if (req.steps[i].action && req.steps[i].action->tool == "code_review" && results[i].ok) {
      const auto& doc = results[i].data;
      for (const auto& f : doc.value("findings", nlohmann::json::array())) {
        CodeFinding cf;
        cf.path = doc["summary"].value("path", "");
        cf.finding.kind = f.value("kind", "") == "injection-marker" ? review::FindingKind::injection_marker
                          : f.value("kind", "") == "config-issue"   ? review::FindingKind::config_issue
                          : f.value("kind", "") == "syntax-suspect" ? review::FindingKind::syntax_suspect
                                                                    : review::FindingKind::logic_flag;
        cf.finding.line = f.value("line", std::size_t{0});
        cf.finding.excerpt = f.value("excerpt", "");
        cf.finding.rationale = f.value("rationale", "");
        report.code_findings.push_back(std::move(cf));
      }
    }
  }
  if (!report.root_cause) {
    auto it = std::find_if(report.code_findings.begin(), report.code_findings.end(), [](const CodeFinding& f) {
      return f.finding.kind == review::FindingKind::injection_marker;
    });
    if (it != report.code_findings.end()) {
      report.root_cause = fmt::format("intentional fault injection ({}:{} `{}`)", it->path, it->finding.line,
                                      it->finding.excerpt);
    }
  }
  session.last_report = report;
  return report;
}

DebugReport Agent::assemble(const BackendRequest& req, std::vector<AgentStep> steps,
                            const std::optional<FinalAnswer>& final, bool incomplete, std::string reason) const {
  DebugReport r;
  r.goal = req.goal;
  r.backend = backend_->id();
  for (const auto& s : steps) {
    if (s.action) r.diagnostics_run.push_back({s.action->tool, s.action->args, first_line(s.observation), s.tool_ok});
  }
  if (req.event) {
    const auto& e = *req.event;
    r.event_id = e.id;
    r.identified_topic = e.topic;
    r.identified_error_type = std::string(diag::to_string(e.category));
    r.identified_node = e.suspected_node;
    if (e.category != diag::Category::node_crash && e.category != diag::Category::log_error) {
      if (auto up = bus_->resolve_upstream(e.topic)) r.identified_node = *up;
    }
  } else if (final) {
    if (final->topic) r.identified_topic = canonical_topic(*final->topic);
    if (final->error_type) {
      try {
        r.identified_error_type = std::string(diag::to_string(diag::parse_category(*final->error_type)));
      } catch (const Error&) {
        r.identified_error_type = to_lower(*final->error_type);
      }
    }
    if (final->node) {
      r.identified_node = canonical_node(*final->node);
    } else if (!r.identified_topic.empty()) {
      if (auto up = bus_->resolve_upstream(r.identified_topic)) r.identified_node = *up;
    }
  }
  if (final) {
    r.narrative = final->narrative;
    r.hypotheses = final->hypotheses;
    r.recommendations = final->recommendations;
    r.root_cause = final->root_cause;
    steps.push_back(AgentStep{"Final answer.", std::nullopt, std::string(), true});
  }
  if (r.narrative.empty() && !r.identified_error_type.empty()) {
    r.narrative = fmt::format("{} on {}; suspected node {}.", r.identified_error_type, r.identified_topic,
                              r.identified_node);
  }
  r.steps = std::move(steps);
  r.incomplete = incomplete;
  r.incomplete_reason = std::move(reason);
  return r;
}

std::string Agent::report_text(const DebugReport& r, Level level) const {
  Draft d;
  std::string checks;
  for (const auto& run : r.diagnostics_run) checks += (checks.empty() ? "" : ", ") + run.tool;
  d.summary = r.narrative;
  if (!r.hypotheses.empty()) d.summary += "\nHypotheses: " + join(r.hypotheses, "; ");
  if (!checks.empty()) d.summary += "\nChecks run: " + checks;
  if (r.root_cause) d.summary += "\nRoot cause: " + *r.root_cause;
  if (!r.recommendations.empty()) d.summary += "\nNext steps: " + join(r.recommendations, "; ");

  d.plain_summary = r.narrative;
  if (!r.identified_topic.empty()) {
    d.plain_summary += fmt::format("\nThe problem shows up on the topic {}", r.identified_topic);
    d.plain_summary += r.identified_node.empty() ? "." : fmt::format(", which gets its data from the node {}.",
                                                                     r.identified_node);
    d.terms = {"topic", "node"};
  }
  if (!r.recommendations.empty()) d.plain_summary += "\nWhat you can try: " + join(r.recommendations, "; ");

  d.expert_summary = fmt::format("{} {} ({})", r.identified_error_type, r.identified_topic, r.identified_node);
  if (r.root_cause) d.expert_summary += "; cause: " + *r.root_cause;
  if (!r.recommendations.empty()) d.expert_summary += "\nnext: " + r.recommendations.front();
  if (r.incomplete) {
    d.summary += "\n(incomplete: " + r.incomplete_reason + ")";
    d.plain_summary += "\n(I could not finish checking everything.)";
    d.expert_summary += " [incomplete]";
  }
  return shape_response(d, level);
}

Draft Agent::node_purpose_draft(std::string_view name) const {
  const auto& n = bus_->node(canonical_node(name));
  Draft d;
  auto list = [](const std::set<std::string>& s) { return std::vector<std::string>(s.begin(), s.end()); };
  d.publishers = list(n.publishes);
  d.subscribers = list(n.subscribes);
  d.services = list(n.services);
  d.has_interfaces = true;
  const auto outs = join(d.publishers);
  const auto ins = join(d.subscribers);

  d.summary = n.description;
  if (n.relay_input) {
    d.summary += fmt::format(" It relays {} to {}; downstream nodes see the modified stream.", *n.relay_input, outs);
    d.plain_summary = fmt::format(
        "The {} node is a test tool. It takes the data arriving on the topic {}, interferes with some of "
        "it on purpose, and passes the result on to the topic {}. This lets you check how the robot copes "
        "when a sensor misbehaves.",
        n.name, *n.relay_input, outs);
    d.terms = {"node", "topic", "fault injector"};
    d.expert_summary = fmt::format("{}: fault-injecting relay {} -> {}.", n.name, *n.relay_input, outs);
  } else if (!d.publishers.empty() && d.subscribers.empty()) {
    std::string sensor = n.description.find("camera") != std::string::npos ? "camera" : "lidar";
    const auto p = bus_->declared_period(d.publishers.front());
    d.summary += fmt::format(" It publishes {}{}.", outs,
                             p ? fmt::format(" every {} ms", *p) : std::string());
    d.plain_summary = fmt::format("The {} node reads the {} and sends each measurement as a message on the topic {}.",
                                  n.name, sensor, outs);
    d.terms = {"node", "topic", "message", sensor};
    d.expert_summary = fmt::format("{}: {} driver -> {}.", n.name, sensor, outs);
  } else if (!d.subscribers.empty()) {
    d.summary += fmt::format(" It subscribes to {}.", ins);
    d.plain_summary = fmt::format(
        "The {} node uses the data on the topic {} and writes an error to the log if that data stops coming.",
        n.name, ins);
    d.terms = {"node", "topic"};
    d.expert_summary = fmt::format("{}: consumes {}.", n.name, ins);
  } else {
    d.plain_summary = fmt::format("The {} node is part of the help desk itself. {}", n.name, n.description);
    d.terms = {"node"};
    d.expert_summary = n.name + ": " + n.description;
  }
  d.details.push_back(std::string("Status: ") + (n.alive ? "running" : "not running"));
  if (!n.source_path.empty()) d.details.push_back("Source file: " + n.source_path);
  return d;
}

ChatReply Agent::chat(Session& session, std::string text) {
  text = trim(text);
  if (text.empty()) throw Error(Errc::validation_error, "message text is empty", "text");
  if (session.status == SessionStatus::resolved) {
    throw Error(Errc::already_resolved, "session " + session.id + " is resolved");
  }
  session.transcript.push_back({"user", text});
  session.user_history.push_back(text);
  session.profile = update_profile(session.profile, session.user_history, config_.expertise);
  const auto level = session.profile.effective();

  ChatReply reply;
  static const std::regex purpose(R"(\b(?:purpose of|tell me about|what (?:is|does))\b)", std::regex::icase);
  static const std::regex word(R"(/?([A-Za-z0-9_]+))");
  std::optional<std::string> node;
  std::smatch m;
  if (std::regex_search(text, m, purpose)) {
    const auto tail = m.suffix().str();
    for (std::sregex_iterator it(tail.begin(), tail.end(), word), end; it != end && !node; ++it) {
      if (bus_->has_node((*it)[1].str())) node = (*it)[1].str();
    }
  }
  if (node) {
    reply.text = shape_response(node_purpose_draft(*node), level);
  } else {
    const diag::DiagnosisEvent* event = nullptr;
    for (auto it = session.open_events.rbegin(); it != session.open_events.rend() && !event; ++it) {
      event = event_for(*it);
    }
    reply.report = run_react(session, text, event);
    reply.text = report_text(*reply.report, level);
  }
  session.transcript.push_back({"agent", reply.text});
  return reply;
}

kb::ErrorFixRecord Agent::resolve_and_record(Session& session, std::string outcome) {
  if (session.status == SessionStatus::resolved) {
    throw Error(Errc::already_resolved, "session " + session.id + " is already resolved");
  }
  if (session.open_events.empty()) throw Error(Errc::no_open_event, "session " + session.id + " has no open event");
  const auto* e = event_for(session.open_events.back());
  if (!e) throw Error(Errc::not_found, "event " + session.open_events.back() + " is unknown");
  const auto event = *e;
  auto description = fmt::format("{} on {} (node {}) resolved: {}", diag::to_string(event.category), event.topic,
                                 event.suspected_node, outcome);
  auto record = kb_->add_record(event_signature(event), std::move(description), {std::move(outcome)});
  if (diagnostics_) {
    for (const auto& id : session.open_events) {
      if (diagnostics_->is_open(id)) diagnostics_->resolve(id);
    }
  }
  session.open_events.clear();
  session.status = SessionStatus::resolved;
  session.transcript.push_back({"system", fmt::format("Resolved; knowledge base record {} added.", record.id)});
  return record;
}

FixResult Agent::apply_fix(Session& session, std::string_view event_id) {
  if (session.status == SessionStatus::resolved) {
    throw Error(Errc::already_resolved, "session " + session.id + " is already resolved");
  }
  if (std::find(session.open_events.begin(), session.open_events.end(), event_id) == session.open_events.end()) {
    throw Error(Errc::not_found, "event " + std::string(event_id) + " is not open in session " + session.id);
  }
  const auto* ep = event_for(event_id);
  if (!ep) throw Error(Errc::not_found, "event " + std::string(event_id) + " is unknown");
  const auto event = *ep;

  FixResult fix;
  fix.event_id = event.id;
  if (event.category == diag::Category::node_crash && bus_->has_node(event.suspected_node)) {
    fix.action = "restart_node";
    const auto result = tools_.invoke("restart_node", {{"node", event.suspected_node}});
    session.transcript.push_back({"agent", "restart_node: " + first_line(result.text)});
    // Let the stream run until the detectors close the episode.
    const sim::Millis step = diagnostics_ ? diagnostics_->watchdog_period() : 100;
    sim::Millis waited = 0;
    auto recovered = [&] {
      return diagnostics_ ? !diagnostics_->is_open(event.id) : bus_->is_alive(event.suspected_node);
    };
    while (result.ok && !recovered() && waited < config_.fix_timeout) {
      bus_->advance(step);
      waited += step;
    }
    fix.fixed = result.ok && recovered();
    if (fix.fixed) {
      fix.text = fmt::format("Restarted {}; {} is delivering data again. The issue is fixed.", event.suspected_node,
                             event.topic);
      session.transcript.push_back({"agent", fix.text});
      fix.kb_record = resolve_and_record(session, "restart_node " + event.suspected_node).id;
      return fix;
    }
    fix.text = fmt::format("Restarted {}, but {} has not recovered after {} ms. {}", event.suspected_node,
                           event.topic, waited, kDebugFurther);
  } else {
    const auto report = run_react(session, "Summarize the open issue " + event.id, &event);
    fix.text = fmt::format(
        "No automatic fix is available for a {} on {}; the only repair I may run is restarting a crashed "
        "node. Summary: {}{} {}",
        diag::to_string(event.category), event.topic, report.narrative,
        report.root_cause ? " Likely cause: " + *report.root_cause + "." : std::string(), kDebugFurther);
  }
  session.transcript.push_back({"agent", fix.text});
  return fix;
}

}  // namespace helpdesk::agent
