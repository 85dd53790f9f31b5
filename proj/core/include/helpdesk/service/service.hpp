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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "helpdesk/agent/agent.hpp"
#include "helpdesk/eval/testbed.hpp"

namespace helpdesk::service {

enum class EnvelopeKind { diagnosis, agent_reply, fix_result, system };

std::string_view to_string(EnvelopeKind kind) noexcept;
EnvelopeKind parse_envelope_kind(std::string_view text);

struct Envelope {
  std::uint64_t seq = 0;  // 1-based, gapless per session
  EnvelopeKind kind = EnvelopeKind::system;
  nlohmann::json payload = nlohmann::json::object();
};

nlohmann::json to_json(const Envelope& e);
Envelope envelope_from_json(const nlohmann::json& j);

struct ApiSession {
  std::string id;
  agent::Level level = agent::Level::intermediate;
  std::int64_t created_at = 0;
  agent::SessionStatus status = agent::SessionStatus::active;
};

nlohmann::json to_json(const ApiSession& s);

struct ServiceConfig {
  std::filesystem::path scenario;  // scenario or suite file; the first entry is deployed
  std::string scenario_name;       // picks a suite entry by name
  std::filesystem::path workspace; // overrides the scenario's workspace when set
  std::optional<std::filesystem::path> detector_config;
  std::optional<std::filesystem::path> kb_path;
  std::optional<std::filesystem::path> session_store;
  std::optional<std::filesystem::path> marker_lexicon;
  std::string backend_url;         // remote ReAct backend; the scenario's mock script otherwise
  std::optional<std::uint64_t> seed;
  std::vector<std::string> restart_allowed;
};

/// Everything behind the HTTP surface: one simulated robot graph, its
/// detectors, knowledge base and agent, plus per-session envelope streams.
///
/// Simulation and agent calls are serialized behind one lock; stream readers
/// only take the envelope lock.
class Service {
 public:
  explicit Service(const ServiceConfig& config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiSession create_session(std::string_view level);
  ApiSession session(std::string_view id) const;
  std::vector<ApiSession> sessions() const;

  Envelope post_message(std::string_view session_id, std::string text);
  Envelope apply_fix(std::string_view session_id, std::string_view event_id);

  /// Envelopes with seq > after_seq, in order. Throws not_found.
  std::vector<Envelope> events_after(std::string_view session_id, std::uint64_t after_seq) const;
  /// Blocks until an envelope past `after_seq` exists, the timeout passes or
  /// the service shuts down. Returns true when new envelopes are available.
  bool wait_for_events(std::string_view session_id, std::uint64_t after_seq,
                       std::chrono::milliseconds timeout) const;

  /// Advances virtual time and fans any new diagnoses out to active sessions.
  void advance(sim::Millis duration);
  nlohmann::json status() const;

  /// Wakes every blocked stream reader; later waits return immediately.
  void shutdown();
  bool stopping() const noexcept { return stopping_.load(); }

  eval::Testbed& testbed() noexcept { return *testbed_; }

 private:
  struct SessionState {
    ApiSession api;
    std::string agent_id;
    std::vector<Envelope> envelopes;
    std::set<std::string> fixed_events;  // events that already produced a fix_result
  };

  SessionState& state(std::string_view id);
  const SessionState& state(std::string_view id) const;
  Envelope push(SessionState& s, EnvelopeKind kind, nlohmann::json payload);
  void flush_pending();
  void notify_session(SessionState& s, const diag::DiagnosisEvent& event);
  void load_store();
  void save_store() const;

  ServiceConfig config_;
  eval::ScenarioSpec spec_;
  std::unique_ptr<kb::KnowledgeBase> kb_;
  std::unique_ptr<eval::Testbed> testbed_;

  mutable std::mutex sim_mutex_;
  std::vector<diag::DiagnosisEvent> pending_;  // detector output awaiting fan-out

  mutable std::mutex env_mutex_;
  mutable std::condition_variable env_cv_;
  std::map<std::string, SessionState, std::less<>> sessions_;
  std::uint64_t next_session_ = 1;
  std::atomic<bool> stopping_{false};
};

}  // namespace helpdesk::service
