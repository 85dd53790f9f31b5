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

#include "helpdesk/service/service.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/io.hpp"
#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/review/code_review.hpp"

namespace helpdesk::service {

std::string_view to_string(EnvelopeKind kind) noexcept {
  switch (kind) {
    case EnvelopeKind::diagnosis: return "diagnosis";
    case EnvelopeKind::agent_reply: return "agent_reply";
    case EnvelopeKind::fix_result: return "fix_result";
    case EnvelopeKind::system: return "system";
  }
  return "system";
}

EnvelopeKind parse_envelope_kind(std::string_view text) {
  if (text == "diagnosis") return EnvelopeKind::diagnosis;
  if (text == "agent_reply") return EnvelopeKind::agent_reply;
  if (text == "fix_result") return EnvelopeKind::fix_result;
  if (text == "system") return EnvelopeKind::system;
  throw Error(Errc::parse_error, "unknown envelope kind '" + std::string(text) + "'", "kind");
}

nlohmann::json to_json(const Envelope& e) {
  return {{"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

Envelope envelope_from_json(const nlohmann::json& j) {
  Envelope e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.kind = parse_envelope_kind(j.at("kind").get<std::string>());
  e.payload = j.value("payload", nlohmann::json::object());
  return e;
}

nlohmann::json to_json(const ApiSession& s) {
  return {{"id", s.id},
          {"level", agent::to_string(s.level)},
          {"created_at", s.created_at},
          {"status", s.status == agent::SessionStatus::resolved ? "resolved" : "active"}};
}

namespace {

eval::ScenarioSpec pick_scenario(const ServiceConfig& config) {
  if (config.scenario.empty()) throw Error(Errc::invalid_argument, "a scenario file is required", "scenario");
  auto specs = eval::load_scenarios(config.scenario);
  if (config.scenario_name.empty()) return specs.front();
  auto it = std::find_if(specs.begin(), specs.end(), [&](const auto& s) { return s.name == config.scenario_name; });
  if (it == specs.end()) {
    throw Error(Errc::not_found, "scenario '" + config.scenario_name + "' not in " + config.scenario.string(),
                "scenario_name");
  }
  return *it;
}

}  // namespace

Service::Service(const ServiceConfig& config) : config_(config), spec_(pick_scenario(config)) {
  if (!config_.workspace.empty()) spec_.workspace = config_.workspace;

  auto embedder = std::make_shared<kb::HashingEmbedder>();
  auto clock = [this] { return testbed_ ? testbed_->bus().now().millis : std::int64_t{0}; };
  kb_ = config_.kb_path
            ? std::make_unique<kb::KnowledgeBase>(kb::KnowledgeBase::open(*config_.kb_path, embedder, clock))
            : std::make_unique<kb::KnowledgeBase>(embedder, clock);

  eval::TestbedOptions opts;
  opts.kb = kb_.get();
  opts.record_trace = false;
  opts.restart_allowed = config_.restart_allowed;
  if (config_.detector_config) {
    opts.detector_config = diag::parse_detector_config(read_text_file(*config_.detector_config));
  }
  if (config_.marker_lexicon) {
    opts.lexicon = review::parse_marker_lexicon(read_text_file(*config_.marker_lexicon));
  }
  if (!config_.backend_url.empty()) opts.backend = std::make_shared<agent::RemoteBackend>(config_.backend_url);
  testbed_ = std::make_unique<eval::Testbed>(spec_, config_.seed.value_or(spec_.seed), opts);
  if (auto* d = testbed_->diagnostics()) {
    d->set_listener([this](const diag::DiagnosisEvent& e) { pending_.push_back(e); });
  }
  load_store();
}

Service::~Service() { shutdown(); }

void Service::shutdown() {
  stopping_ = true;
  std::lock_guard lock(env_mutex_);
  env_cv_.notify_all();
}

Service::SessionState& Service::state(std::string_view id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::not_found, "unknown session " + std::string(id), "session");
  return it->second;
}

const Service::SessionState& Service::state(std::string_view id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::not_found, "unknown session " + std::string(id), "session");
  return it->second;
}

// Callers hold sim_mutex_.
Envelope Service::push(SessionState& s, EnvelopeKind kind, nlohmann::json payload) {
  std::lock_guard lock(env_mutex_);
  Envelope e{s.envelopes.size() + 1, kind, std::move(payload)};
  s.envelopes.push_back(e);
  env_cv_.notify_all();
  return e;
}

void Service::notify_session(SessionState& s, const diag::DiagnosisEvent& event) {
  if (s.api.status == agent::SessionStatus::resolved) return;
  auto& session = testbed_->agent().session(s.agent_id);
  const auto n = testbed_->agent().notify(session, event);
  if (n.duplicate) return;
  push(s, EnvelopeKind::diagnosis, {{"event", diag::to_json(event)}, {"text", n.text}, {"fix_token", n.fix_token}});
}

void Service::flush_pending() {
  auto batch = std::move(pending_);
  pending_.clear();
  for (const auto& e : batch) {
    for (auto& [_, s] : sessions_) notify_session(s, e);
  }
  if (!batch.empty()) save_store();
}

ApiSession Service::create_session(std::string_view level_text) {
  const auto level = agent::parse_level(level_text);
  std::lock_guard sim(sim_mutex_);
  auto& agent_session = testbed_->agent().start_session(level);
  SessionState s;
  s.api.level = level;
  s.api.created_at = agent_session.created_at;
  s.agent_id = agent_session.id;
  {
    std::lock_guard lock(env_mutex_);
    s.api.id = fmt::format("s-{}", next_session_++);
    sessions_.emplace(s.api.id, s);
  }
  auto& st = sessions_.find(s.api.id)->second;
  push(st, EnvelopeKind::system, {{"text", agent_session.transcript.front().text}});
  if (const auto* d = testbed_->diagnostics()) {
    for (const auto& e : d->events()) {
      if (d->is_open(e.id)) notify_session(st, e);
    }
  }
  flush_pending();
  save_store();
  return st.api;
}

ApiSession Service::session(std::string_view id) const {
  std::lock_guard lock(env_mutex_);
  return state(id).api;
}

std::vector<ApiSession> Service::sessions() const {
  std::lock_guard lock(env_mutex_);
  std::vector<ApiSession> out;
  for (const auto& [_, s] : sessions_) out.push_back(s.api);
  return out;
}

Envelope Service::post_message(std::string_view session_id, std::string text) {
  std::lock_guard sim(sim_mutex_);
  auto& s = state(session_id);
  if (s.api.status == agent::SessionStatus::resolved) {
    throw Error(Errc::already_resolved, "session " + s.api.id + " is resolved");
  }
  auto& session = testbed_->agent().session(s.agent_id);
  const auto reply = testbed_->agent().chat(session, std::move(text));
  flush_pending();
  nlohmann::json payload = {{"text", reply.text}};
  if (reply.report) payload["report"] = agent::to_json(*reply.report);
  auto env = push(s, EnvelopeKind::agent_reply, std::move(payload));
  save_store();
  return env;
}

Envelope Service::apply_fix(std::string_view session_id, std::string_view event_id) {
  std::lock_guard sim(sim_mutex_);
  auto& s = state(session_id);
  if (s.api.status == agent::SessionStatus::resolved) {
    throw Error(Errc::already_resolved, "session " + s.api.id + " is resolved");
  }
  if (s.fixed_events.contains(std::string(event_id))) {
    throw Error(Errc::conflict, "a fix for " + std::string(event_id) + " was already applied");
  }
  auto& session = testbed_->agent().session(s.agent_id);
  const auto fix = testbed_->agent().apply_fix(session, event_id);
  s.fixed_events.insert(fix.event_id);
  if (session.status == agent::SessionStatus::resolved) {
    std::lock_guard lock(env_mutex_);
    s.api.status = agent::SessionStatus::resolved;
  }
  flush_pending();
  nlohmann::json payload = {{"event_id", fix.event_id},
                            {"fixed", fix.fixed},
                            {"status", fix.fixed ? "fixed" : "not_fixed"},
                            {"action", fix.action},
                            {"text", fix.text}};
  payload["kb_record"] = fix.kb_record ? nlohmann::json(*fix.kb_record) : nlohmann::json(nullptr);
  auto env = push(s, EnvelopeKind::fix_result, std::move(payload));
  save_store();
  return env;
}

std::vector<Envelope> Service::events_after(std::string_view session_id, std::uint64_t after_seq) const {
  std::lock_guard lock(env_mutex_);
  const auto& envs = state(session_id).envelopes;
  if (after_seq >= envs.size()) return {};
  return {envs.begin() + static_cast<std::ptrdiff_t>(after_seq), envs.end()};
}

bool Service::wait_for_events(std::string_view session_id, std::uint64_t after_seq,
                              std::chrono::milliseconds timeout) const {
  std::unique_lock lock(env_mutex_);
  const auto& envs = state(session_id).envelopes;
  return env_cv_.wait_for(lock, timeout, [&] { return stopping_.load() || envs.size() > after_seq; }) &&
         envs.size() > after_seq;
}

void Service::advance(sim::Millis duration) {
  if (duration < 0) throw Error(Errc::invalid_argument, "duration must be >= 0", "ms");
  std::lock_guard sim(sim_mutex_);
  testbed_->bus().advance(duration);
  flush_pending();
}

nlohmann::json Service::status() const {
  std::lock_guard sim(sim_mutex_);
  auto& bus = testbed_->bus();
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto* n : bus.nodes()) nodes.push_back({{"name", n->name}, {"alive", bus.is_alive(n->name)}});
  nlohmann::json open = nlohmann::json::array();
  std::size_t total = 0;
  if (const auto* d = testbed_->diagnostics()) {
    total = d->events().size();
    for (const auto& e : d->events()) {
      if (d->is_open(e.id)) open.push_back(e.id);
    }
  }
  std::lock_guard lock(env_mutex_);
  return {{"now_ms", bus.now().millis},
          {"scenario", spec_.name},
          {"sessions", sessions_.size()},
          {"events", total},
          {"open_events", open},
          {"kb_records", kb_->size()},
          {"nodes", nodes}};
}

void Service::save_store() const {
  if (!config_.session_store) return;
  nlohmann::json doc = {{"version", 1}, {"sessions", nlohmann::json::array()}};
  std::lock_guard lock(env_mutex_);
  doc["next_session"] = next_session_;
  for (const auto& [_, s] : sessions_) {
    nlohmann::json j = to_json(s.api);
    j["envelopes"] = nlohmann::json::array();
    for (const auto& e : s.envelopes) j["envelopes"].push_back(to_json(e));
    j["fixed_events"] = s.fixed_events;
    doc["sessions"].push_back(std::move(j));
  }
  write_text_file_atomic(*config_.session_store, doc.dump());
}

void Service::load_store() {
  if (!config_.session_store || !std::filesystem::exists(*config_.session_store)) return;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(*config_.session_store));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::storage_error, "session store " + config_.session_store->string() + ": " + e.what());
  }
  std::lock_guard sim(sim_mutex_);
  std::lock_guard lock(env_mutex_);
  next_session_ = doc.value("next_session", std::uint64_t{1});
  for (const auto& j : doc.value("sessions", nlohmann::json::array())) {
    SessionState s;
    s.api.id = j.at("id").get<std::string>();
    s.api.level = agent::parse_level(j.at("level").get<std::string>());
    s.api.created_at = j.value("created_at", std::int64_t{0});
    s.api.status = j.value("status", "active") == "resolved" ? agent::SessionStatus::resolved
                                                             : agent::SessionStatus::active;
    for (const auto& e : j.value("envelopes", nlohmann::json::array())) s.envelopes.push_back(envelope_from_json(e));
    for (const auto& f : j.value("fixed_events", nlohmann::json::array())) s.fixed_events.insert(f.get<std::string>());
    s.agent_id = testbed_->agent().start_session(s.api.level).id;
    sessions_.emplace(s.api.id, std::move(s));
  }
}

}  // namespace helpdesk::service
