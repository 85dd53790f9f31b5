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

#include "helpdesk/sim/bus.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::sim {
namespace {

constexpr Millis kRateWindowKeep = 10'000;
constexpr std::size_t kLogHistoryDepth = 1024;

const std::deque<MessagePtr> kNoMessages;

}  // namespace

bool MessageBus::Later::operator()(const Event& a, const Event& b) const noexcept {
  if (a.due != b.due) return a.due > b.due;
  if (a.phase != b.phase) return a.phase > b.phase;
  if (a.rank != b.rank) return a.rank > b.rank;
  return a.order > b.order;
}

MessageBus::MessageBus() {
  register_node(kSupervisor, "Process supervisor; reports node lifecycle on /rosout.");
}

NodeRecord& MessageBus::register_node(std::string_view name, std::string description) {
  auto key = canonical_node(name);
  if (key.empty()) throw Error(Errc::invalid_argument, "node name must be non-empty", "name");
  if (nodes_.contains(key)) throw Error(Errc::duplicate_node, "duplicate node name '" + key + "'");
  NodeRecord rec;
  rec.name = key;
  rec.rank = static_cast<std::uint32_t>(nodes_.size());
  rec.description = std::move(description);
  for (const char* svc : {"describe_parameters", "get_parameters", "list_parameters",
                          "set_parameters"}) {
    rec.services.insert("/" + key + "/" + svc);
  }
  rec.publishes.insert(std::string(kRosout));
  incarnation_[key] = 0;
  return nodes_.emplace(key, std::move(rec)).first->second;
}

bool MessageBus::has_node(std::string_view name) const {
  return nodes_.contains(canonical_node(name));
}

bool MessageBus::is_alive(std::string_view name) const {
  auto it = nodes_.find(canonical_node(name));
  return it != nodes_.end() && it->second.alive;
}

NodeRecord& MessageBus::require_node(std::string_view name) {
  auto it = nodes_.find(canonical_node(name));
  if (it == nodes_.end()) {
    throw Error(Errc::unknown_node, "unknown node '" + canonical_node(name) + "'");
  }
  return it->second;
}

const NodeRecord& MessageBus::node(std::string_view name) const {
  return const_cast<MessageBus*>(this)->require_node(name);
}

NodeRecord& MessageBus::node(std::string_view name) { return require_node(name); }

std::vector<const NodeRecord*> MessageBus::nodes() const {
  std::vector<const NodeRecord*> out;
  out.reserve(nodes_.size());
  for (const auto& [_, rec] : nodes_) out.push_back(&rec);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->rank < b->rank; });
  return out;
}

std::vector<std::string> MessageBus::publishers_of(std::string_view topic) const {
  auto t = canonical_topic(topic);
  std::vector<std::string> out;
  for (const auto* rec : nodes()) {
    if (t != kRosout && rec->publishes.contains(t)) out.push_back(rec->name);
  }
  return out;
}

std::vector<std::string> MessageBus::subscribers_of(std::string_view topic) const {
  auto t = canonical_topic(topic);
  std::vector<std::string> out;
  for (const auto* rec : nodes()) {
    if (rec->subscribes.contains(t)) out.push_back(rec->name);
  }
  return out;
}

std::vector<std::string> MessageBus::topics() const {
  std::set<std::string> all;
  for (const auto& [_, rec] : nodes_) {
    all.insert(rec.publishes.begin(), rec.publishes.end());
    all.insert(rec.subscribes.begin(), rec.subscribes.end());
  }
  return {all.begin(), all.end()};
}

void MessageBus::declare_publisher(std::string_view node, std::string_view topic) {
  require_node(node).publishes.insert(canonical_topic(topic));
}

void MessageBus::declare_relay(std::string_view node, std::string_view input_topic,
                               std::string_view output_topic) {
  auto& rec = require_node(node);
  rec.relay_input = canonical_topic(input_topic);
  rec.publishes.insert(canonical_topic(output_topic));
  if (auto p = declared_period(input_topic)) declare_period(output_topic, *p);
}

void MessageBus::declare_period(std::string_view topic, Millis period) {
  topics_[canonical_topic(topic)].period = period;
}

std::optional<Millis> MessageBus::declared_period(std::string_view topic) const {
  auto it = topics_.find(canonical_topic(topic));
  if (it == topics_.end()) return std::nullopt;
  return it->second.period;
}

std::optional<std::string> MessageBus::resolve_upstream(std::string_view topic) const {
  auto current = canonical_topic(topic);
  std::set<std::string> visited;
  while (visited.insert(current).second) {
    auto pubs = publishers_of(current);
    if (pubs.empty()) return std::nullopt;
    const auto& rec = nodes_.find(pubs.front())->second;
    if (!rec.relay_input) return rec.name;
    current = *rec.relay_input;
  }
  return std::nullopt;  // relay cycle
}

void MessageBus::push(Event ev) {
  ev.order = next_order_++;
  queue_.push(std::move(ev));
}

Message MessageBus::enqueue(const std::string& node, std::string topic, Message msg) {
  auto& ts = topics_[topic];
  auto ptr = std::make_shared<const Message>(std::move(msg));
  ts.recent.push_back(ptr);
  if (ts.recent.size() > kHistoryDepth) ts.recent.pop_front();
  ts.arrivals.push_back(now_);
  while (!ts.arrivals.empty() && now_ - ts.arrivals.front() > kRateWindowKeep) {
    ts.arrivals.pop_front();
  }
  ++ts.published;
  if (topic == kRosout) {
    log_history_.push_back(std::get<LogEntry>(ptr->payload));
    if (log_history_.size() > kLogHistoryDepth) log_history_.pop_front();
  }

  const auto rank = nodes_.find(node)->second.rank;
  if (auto it = topic_subs_.find(topic); it != topic_subs_.end()) {
    for (auto sid : it->second) {
      const auto& sub = subs_.at(sid);
      if (!is_alive(sub.node)) continue;
      Event ev;
      ev.due = now_;
      ev.phase = Phase::normal;
      ev.rank = rank;
      ev.kind = EventKind::delivery;
      ev.ref = sid;
      ev.message = ptr;
      push(std::move(ev));
    }
  }
  return *ptr;
}

Message MessageBus::publish(std::string_view node, std::string_view topic, Payload payload) {
  auto& rec = require_node(node);
  if (!rec.alive) throw Error(Errc::dead_node, "node '" + rec.name + "' is dead");
  auto t = canonical_topic(topic);
  if (t.empty()) throw Error(Errc::invalid_argument, "topic name must be non-empty", "topic");
  if (t == kRosout && !std::holds_alternative<LogEntry>(payload)) {
    throw Error(Errc::type_mismatch, "/rosout carries LogEntry only");
  }
  rec.publishes.insert(t);
  Message msg;
  msg.topic = t;
  msg.publisher = rec.name;
  msg.seq = seq_[{rec.name, t}]++;
  msg.stamp = now_;
  msg.payload = std::move(payload);
  return enqueue(rec.name, t, std::move(msg));
}

Message MessageBus::forward(std::string_view node, std::string_view topic, const Message& original) {
  auto& rec = require_node(node);
  if (!rec.alive) throw Error(Errc::dead_node, "node '" + rec.name + "' is dead");
  auto t = canonical_topic(topic);
  rec.publishes.insert(t);
  Message msg = original;
  msg.topic = t;
  msg.publisher = rec.name;
  return enqueue(rec.name, t, std::move(msg));
}

Message MessageBus::log(std::string_view node, LogLevel level, std::string text) {
  auto name = canonical_node(node);
  return publish(name, kRosout, LogEntry{level, name, std::move(text)});
}

SubscriptionHandle MessageBus::subscribe(std::string_view node, std::string_view topic,
                                         Handler handler) {
  auto& rec = require_node(node);
  auto t = canonical_topic(topic);
  rec.subscribes.insert(t);
  auto id = next_id_++;
  subs_.emplace(id, Subscription{id, rec.name, t, std::move(handler)});
  topic_subs_[t].push_back(id);
  return id;
}

void MessageBus::arm_timer(std::uint64_t id, SimTime due) {
  const auto& timer = timers_.at(id);
  Event ev;
  ev.due = due;
  ev.phase = timer.phase;
  ev.rank = nodes_.at(timer.owner).rank;
  ev.kind = EventKind::timer;
  ev.ref = id;
  ev.generation = timer.generation;
  push(std::move(ev));
}

TimerHandle MessageBus::add_timer(std::string_view node, Millis period, std::function<void()> fn,
                                  Phase phase) {
  auto& rec = require_node(node);
  if (period <= 0) throw Error(Errc::invalid_argument, "timer period must be positive", "period");
  auto id = next_id_++;
  timers_.emplace(id, Timer{rec.name, period, std::move(fn), phase, 0});
  if (rec.alive) arm_timer(id, now_ + period);
  return id;
}

void MessageBus::schedule_at(std::string_view node, SimTime due, std::function<void()> fn,
                             Phase phase) {
  auto& rec = require_node(node);
  Event ev;
  ev.due = std::max(due, now_);
  ev.phase = phase;
  ev.rank = rec.rank;
  ev.kind = EventKind::callback;
  ev.owner = rec.name;
  ev.generation = incarnation_[rec.name];
  ev.fn = std::make_shared<std::function<void()>>(std::move(fn));
  push(std::move(ev));
}

void MessageBus::record(const Delivery& d) {
  ++delivery_count_;
  const auto& m = *d.message;
  auto digest = payload_digest(m.payload);
  trace_hash_.update_value(d.time.millis);
  trace_hash_.update(m.topic);
  trace_hash_.update_value(std::uint8_t{0});
  trace_hash_.update(m.publisher);
  trace_hash_.update_value(std::uint8_t{0});
  trace_hash_.update_value(m.seq);
  trace_hash_.update_value(digest);
  if (record_trace_) trace_.push_back(TraceEntry{d.time, m.topic, m.publisher, m.seq, digest});
}

std::vector<Delivery> MessageBus::advance(Millis duration) {
  if (duration < 0) throw Error(Errc::invalid_argument, "advance duration must be >= 0", "duration");
  const SimTime target = now_ + duration;
  std::vector<Delivery> delivered;
  while (!queue_.empty() && queue_.top().due <= target) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = std::max(now_, ev.due);
    switch (ev.kind) {
      case EventKind::timer: {
        auto it = timers_.find(ev.ref);
        if (it == timers_.end() || it->second.generation != ev.generation) break;
        if (!is_alive(it->second.owner)) break;
        arm_timer(ev.ref, now_ + it->second.period);
        auto fn = it->second.fn;  // the callback may add timers
        fn();
        break;
      }
      case EventKind::delivery: {
        const auto& sub = subs_.at(ev.ref);
        if (!is_alive(sub.node)) break;
        Delivery d{now_, sub.node, ev.message};
        record(d);
        auto handler = sub.handler;
        delivered.push_back(std::move(d));
        if (handler) handler(*ev.message, now_);
        break;
      }
      case EventKind::callback: {
        if (!is_alive(ev.owner) || incarnation_[ev.owner] != ev.generation) break;
        (*ev.fn)();
        break;
      }
    }
  }
  now_ = target;
  return delivered;
}

KillReceipt MessageBus::kill_node(std::string_view name) {
  auto& rec = require_node(name);
  if (!rec.alive) {
    return KillReceipt{rec.name, now_, true, "node '" + rec.name + "' is already dead"};
  }
  rec.alive = false;
  rec.killed_at = now_;
  ++incarnation_[rec.name];
  for (auto& [_, timer] : timers_) {
    if (timer.owner == rec.name) ++timer.generation;
  }
  log(kSupervisor, LogLevel::fatal, "process died: " + rec.name);
  return KillReceipt{rec.name, now_, false, {}};
}

bool MessageBus::restart_node(std::string_view name) {
  auto& rec = require_node(name);
  if (rec.alive) return false;
  rec.alive = true;
  rec.killed_at.reset();
  ++incarnation_[rec.name];
  for (auto& [id, timer] : timers_) {
    if (timer.owner == rec.name) {
      ++timer.generation;
      arm_timer(id, now_ + timer.period);
    }
  }
  log(kSupervisor, LogLevel::info, "process started: " + rec.name);
  if (auto it = restart_hooks_.find(rec.name); it != restart_hooks_.end()) {
    for (auto& hook : it->second) hook();
  }
  return true;
}

void MessageBus::on_restart(std::string_view node, std::function<void()> hook) {
  restart_hooks_[require_node(node).name].push_back(std::move(hook));
}

const std::deque<MessagePtr>& MessageBus::recent(std::string_view topic) const {
  auto it = topics_.find(canonical_topic(topic));
  return it == topics_.end() ? kNoMessages : it->second.recent;
}

std::size_t MessageBus::arrivals_between(std::string_view topic, SimTime from, SimTime to) const {
  auto it = topics_.find(canonical_topic(topic));
  if (it == topics_.end()) return 0;
  return static_cast<std::size_t>(std::count_if(
      it->second.arrivals.begin(), it->second.arrivals.end(),
      [&](SimTime t) { return t > from && t <= to; }));
}

std::uint64_t MessageBus::published_count(std::string_view topic) const {
  auto it = topics_.find(canonical_topic(topic));
  return it == topics_.end() ? 0 : it->second.published;
}

std::vector<LogEntry> MessageBus::log_tail(std::size_t n) const {
  auto start = log_history_.size() > n ? log_history_.size() - n : 0;
  return {log_history_.begin() + static_cast<std::ptrdiff_t>(start), log_history_.end()};
}

}  // namespace helpdesk::sim
