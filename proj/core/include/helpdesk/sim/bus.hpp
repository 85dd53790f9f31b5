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

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "helpdesk/common/hash.hpp"
#include "helpdesk/sim/types.hpp"

namespace helpdesk::sim {

// Events at the same SimTime run normal-phase work (timers, deliveries,
// delayed releases) before late-phase work (watchdogs, scheduled kills).
enum class Phase : std::uint8_t { normal = 0, late = 1 };

struct NodeRecord {
  std::string name;
  bool alive = true;
  std::uint32_t rank = 0;  // registration order
  std::set<std::string> publishes;
  std::set<std::string> subscribes;
  std::set<std::string> services;
  std::string description;
  std::string source_path;
  // Relay nodes (fault injectors) republish `relay_input` onto their outputs.
  std::optional<std::string> relay_input;
  std::optional<SimTime> killed_at;
};

struct KillReceipt {
  std::string node;
  SimTime time;
  bool already_dead = false;
  std::string warning;
};

struct Delivery {
  SimTime time;
  std::string subscriber;
  MessagePtr message;
};

struct TraceEntry {
  SimTime t;
  std::string topic;
  std::string publisher;
  std::uint64_t seq = 0;
  std::uint64_t payload_digest = 0;
};

using Handler = std::function<void(const Message&, SimTime)>;
using SubscriptionHandle = std::uint64_t;
using TimerHandle = std::uint64_t;

/// Deterministic single-threaded publish/subscribe graph on a virtual clock.
///
/// All work is ordered by (due time, phase, originating node rank, insertion),
/// so identical inputs always produce an identical delivery trace. An instance
/// may be moved between threads but must not be shared without external
/// synchronization.
class MessageBus {
 public:
  static constexpr std::size_t kHistoryDepth = 64;

  MessageBus();
  MessageBus(const MessageBus&) = delete;
  MessageBus& operator=(const MessageBus&) = delete;

  SimTime now() const noexcept { return now_; }

  // --- graph ---------------------------------------------------------------
  NodeRecord& register_node(std::string_view name, std::string description = {});
  bool has_node(std::string_view name) const;
  bool is_alive(std::string_view name) const;
  const NodeRecord& node(std::string_view name) const;
  NodeRecord& node(std::string_view name);
  std::vector<const NodeRecord*> nodes() const;  // registration order
  std::vector<std::string> publishers_of(std::string_view topic) const;
  std::vector<std::string> subscribers_of(std::string_view topic) const;
  std::vector<std::string> topics() const;

  void declare_publisher(std::string_view node, std::string_view topic);
  void declare_relay(std::string_view node, std::string_view input_topic,
                     std::string_view output_topic);
  void declare_period(std::string_view topic, Millis period);
  std::optional<Millis> declared_period(std::string_view topic) const;

  /// Walks relay nodes back to the first non-relay publisher of `topic`.
  std::optional<std::string> resolve_upstream(std::string_view topic) const;

  // --- messaging -----------------------------------------------------------
  Message publish(std::string_view node, std::string_view topic, Payload payload);
  /// Republishes `original` on `topic` as `node`, preserving seq and stamp.
  Message forward(std::string_view node, std::string_view topic, const Message& original);
  Message log(std::string_view node, LogLevel level, std::string text);

  SubscriptionHandle subscribe(std::string_view node, std::string_view topic, Handler handler);

  // --- time ----------------------------------------------------------------
  TimerHandle add_timer(std::string_view node, Millis period, std::function<void()> fn,
                        Phase phase = Phase::normal);
  /// One-shot callback owned by `node`; dropped if the node dies first.
  void schedule_at(std::string_view node, SimTime due, std::function<void()> fn,
                   Phase phase = Phase::normal);
  std::vector<Delivery> advance(Millis duration);
  void run_until(SimTime t) { advance(t - now_); }

  // --- liveness ------------------------------------------------------------
  KillReceipt kill_node(std::string_view name);
  /// Respawns a killed node: timers re-armed from now, restart hooks invoked.
  bool restart_node(std::string_view name);
  void on_restart(std::string_view node, std::function<void()> hook);

  // --- observation ---------------------------------------------------------
  const std::deque<MessagePtr>& recent(std::string_view topic) const;
  std::size_t arrivals_between(std::string_view topic, SimTime from, SimTime to) const;
  std::uint64_t published_count(std::string_view topic) const;
  std::vector<LogEntry> log_tail(std::size_t n) const;

  void set_trace_recording(bool on) { record_trace_ = on; }
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
  std::uint64_t trace_digest() const noexcept { return trace_hash_.value(); }
  std::uint64_t delivery_count() const noexcept { return delivery_count_; }

 private:
  struct Subscription {
    SubscriptionHandle id;
    std::string node;
    std::string topic;
    Handler handler;
  };
  struct Timer {
    std::string owner;
    Millis period;
    std::function<void()> fn;
    Phase phase;
    std::uint64_t generation = 0;
  };
  enum class EventKind : std::uint8_t { timer, delivery, callback };
  struct Event {
    SimTime due;
    Phase phase;
    std::uint32_t rank;
    std::uint64_t order;
    EventKind kind;
    std::uint64_t ref = 0;         // timer id or subscription id
    std::uint64_t generation = 0;  // timer generation or owner incarnation
    std::string owner;
    MessagePtr message;
    std::shared_ptr<std::function<void()>> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept;
  };
  struct TopicState {
    std::deque<MessagePtr> recent;
    std::deque<SimTime> arrivals;  // publish times within the rate window
    std::uint64_t published = 0;
    std::optional<Millis> period;
  };

  NodeRecord& require_node(std::string_view name);
  Message enqueue(const std::string& node, std::string topic, Message msg);
  void push(Event ev);
  void arm_timer(std::uint64_t id, SimTime due);
  void record(const Delivery& d);

  SimTime now_;
  std::uint64_t next_order_ = 0;
  std::uint64_t next_id_ = 1;
  std::map<std::string, NodeRecord, std::less<>> nodes_;
  std::map<std::string, std::uint64_t, std::less<>> incarnation_;
  std::map<std::string, std::vector<std::function<void()>>, std::less<>> restart_hooks_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> seq_;
  std::map<std::string, std::vector<SubscriptionHandle>, std::less<>> topic_subs_;
  std::map<SubscriptionHandle, Subscription> subs_;
  std::map<std::uint64_t, Timer> timers_;
  std::map<std::string, TopicState, std::less<>> topics_;
  std::deque<LogEntry> log_history_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;

  bool record_trace_ = false;
  std::vector<TraceEntry> trace_;
  Fnv1a trace_hash_;
  std::uint64_t delivery_count_ = 0;
};

}  // namespace helpdesk::sim
