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

#include "helpdesk/agent/tools.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk::agent {
namespace {

std::string arg_string(const nlohmann::json& args, const char* key, const char* alt = nullptr) {
  if (args.is_string()) return args.get<std::string>();
  for (const char* k : {key, alt}) {
    if (k && args.is_object() && args.contains(k)) {
      const auto& v = args.at(k);
      return v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  throw Error(Errc::invalid_argument, std::string("missing argument '") + key + "'", key);
}

std::size_t arg_count(const nlohmann::json& args, const char* key, std::size_t fallback) {
  if (!args.is_object() || !args.contains(key)) return fallback;
  const auto& v = args.at(key);
  if (v.is_number_integer() && v.get<long long>() > 0) return v.get<std::size_t>();
  if (v.is_string()) {
    try {
      const auto n = std::stoll(v.get<std::string>());
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  throw Error(Errc::invalid_argument, std::string("'") + key + "' must be a positive integer", key);
}

bool known_topic(const sim::MessageBus& bus, const std::string& topic) {
  const auto all = bus.topics();
  return std::find(all.begin(), all.end(), topic) != all.end();
}

std::string join(const std::set<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
  return out;
}

template <typename T>
std::size_t unique_count(const std::vector<T>& values) {
  std::set<T> s(values.begin(), values.end());
  return s.size();
}

}  // namespace

void ToolRegistry::add(std::string name, std::string description, Fn fn) {
  tools_[std::move(name)] = Entry{std::move(description), std::move(fn)};
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tools_) out.push_back(name);
  return out;
}

std::string ToolRegistry::description(std::string_view name) const {
  auto it = tools_.find(name);
  return it == tools_.end() ? std::string() : it->second.description;
}

ToolResult ToolRegistry::invoke(std::string_view name, const nlohmann::json& args) const {
  auto it = tools_.find(name);
  if (it == tools_.end()) throw Error(Errc::unknown_tool, "unknown tool '" + std::string(name) + "'");
  try {
    return it->second.fn(args);
  } catch (const Error& e) {
    return ToolResult{fmt::format("error [{}]: {}", to_string(e.code()), e.what()), false, {}};
  } catch (const std::exception& e) {
    return ToolResult{fmt::format("error [tool-error]: {}", e.what()), false, {}};
  }
}

std::string render_payload(const sim::Message& msg) {
  std::string out = fmt::format("seq: {}\nstamp: {} ms\npublisher: {}\n", msg.seq, msg.stamp.millis,
                                msg.publisher);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, sim::LaserScan>) {
          out += fmt::format("type: LaserScan\nrange_min: {:.2f}\nrange_max: {:.2f}\n", p.range_min,
                             p.range_max);
          out += fmt::format("ranges[{}]: [", p.ranges.size());
          for (std::size_t i = 0; i < p.ranges.size(); ++i) {
            out += fmt::format("{}{:.3f}", i ? ", " : "", p.ranges[i]);
          }
          out += "]\n";
          out += fmt::format("unique_values: {}\n", unique_count(p.ranges));
        } else if constexpr (std::is_same_v<T, sim::Image>) {
          out += fmt::format("type: Image\nsize: {}x{}x{}\n", p.width, p.height, p.channels);
          const std::size_t shown = std::min<std::size_t>(p.pixels.size(), 48);
          out += fmt::format("data[{}]: [", p.pixels.size());
          for (std::size_t i = 0; i < shown; ++i) out += fmt::format("{}{}", i ? ", " : "", p.pixels[i]);
          out += shown < p.pixels.size() ? ", ...]\n" : "]\n";
          out += fmt::format("unique_values: {}\n", unique_count(p.pixels));
        } else {
          out += fmt::format("type: LogEntry\nlevel: {}\ntext: {}\n", sim::to_string(p.level), p.text);
        }
      },
      msg.payload);
  return out;
}

ToolRegistry make_default_tools(ToolContext ctx) {
  ToolRegistry reg;
  auto* bus = ctx.bus;

  reg.add("list_nodes", "List every node and whether it is running.", [bus](const nlohmann::json&) {
    std::string out;
    for (const auto* n : bus->nodes()) {
      out += fmt::format("{} [{}]\n", n->name, n->alive ? "alive" : "dead");
    }
    return ToolResult{out, true, {}};
  });

  reg.add("node_info", "Status, description and interfaces of one node (args: node).",
          [bus](const nlohmann::json& args) {
            const auto name = canonical_node(arg_string(args, "node", "name"));
            const auto& n = bus->node(name);
            std::string status = n.alive ? "alive" : "dead";
            if (n.killed_at) status += fmt::format(" (since {} ms)", n.killed_at->millis);
            std::string out = fmt::format("node: {}\nstatus: {}\ndescription: {}\n", n.name, status,
                                          n.description);
            if (!n.source_path.empty()) out += "source: " + n.source_path + "\n";
            if (n.relay_input) out += "relays: " + *n.relay_input + "\n";
            out += "Publishers: " + join(n.publishes) + "\n";
            out += "Subscribers: " + join(n.subscribes) + "\n";
            out += "Services: " + join(n.services) + "\n";
            nlohmann::json data = {{"node", n.name}, {"alive", n.alive}};
            return ToolResult{out, true, data};
          });

  reg.add("topic_echo", "Print the latest messages on a topic (args: topic, n).",
          [bus](const nlohmann::json& args) {
            const auto topic = canonical_topic(arg_string(args, "topic"));
            const auto n = arg_count(args, "n", 1);
            if (!known_topic(*bus, topic)) throw Error(Errc::not_found, "unknown topic " + topic, "topic");
            const auto& recent = bus->recent(topic);
            if (recent.empty()) return ToolResult{"no messages received on " + topic + "\n", true, {}};
            std::string out;
            const auto take = std::min(n, recent.size());
            for (auto it = recent.end() - static_cast<long>(take); it != recent.end(); ++it) {
              out += "---\n" + render_payload(**it);
            }
            const auto& last = *recent.back();
            const auto age = bus->now() - last.stamp;
            out += fmt::format("age of latest: {} ms\n", age);
            nlohmann::json data = {{"age_ms", age}};
            std::visit(
                [&](const auto& p) {
                  using T = std::decay_t<decltype(p)>;
                  if constexpr (std::is_same_v<T, sim::LaserScan>) data["unique_values"] = unique_count(p.ranges);
                  if constexpr (std::is_same_v<T, sim::Image>) data["unique_values"] = unique_count(p.pixels);
                },
                last.payload);
            return ToolResult{out, true, data};
          });

  reg.add("topic_hz", "Measured publish rate of a topic over the last window (args: topic).",
          [bus, window = ctx.hz_window](const nlohmann::json& args) {
            const auto topic = canonical_topic(arg_string(args, "topic"));
            if (!known_topic(*bus, topic)) throw Error(Errc::not_found, "unknown topic " + topic, "topic");
            const auto now = bus->now();
            const sim::Millis span = std::min(window, now.millis);
            const auto count = bus->arrivals_between(topic, sim::SimTime{now.millis - span}, now);
            const double hz = span > 0 ? static_cast<double>(count) * 1000.0 / static_cast<double>(span) : 0.0;
            std::string out = fmt::format("average rate: {:.2f} Hz ({} msgs in {:.1f} s window)\n", hz,
                                          count, static_cast<double>(span) / 1000.0);
            if (auto p = bus->declared_period(topic)) {
              out += fmt::format("expected: {:.2f} Hz\n", 1000.0 / static_cast<double>(*p));
            }
            nlohmann::json data = {{"hz", hz}, {"count", count}};
            return ToolResult{out, true, data};
          });

  reg.add("kb_lookup", "Search the error knowledge base for prior fixes (args: query, k).",
          [kb = ctx.kb](const nlohmann::json& args) {
            if (!kb) throw Error(Errc::storage_error, "no knowledge base configured");
            const auto query = arg_string(args, "query");
            const auto k = arg_count(args, "k", 3);
            const auto hits = kb->retrieve(query, k);
            if (hits.empty()) return ToolResult{"no matching records\n", true, {{"hits", 0}}};
            std::string out;
            nlohmann::json ids = nlohmann::json::array();
            for (std::size_t i = 0; i < hits.size(); ++i) {
              const auto rec = kb->get(hits[i].id);
              ids.push_back(hits[i].id);
              out += fmt::format("#{} [record {}] similarity {:.3f}: {}\n", i + 1, hits[i].id,
                                 hits[i].similarity, rec->signature);
              for (const auto& step : rec->resolution_steps) out += "  fix: " + step + "\n";
            }
            return ToolResult{out, true, {{"hits", hits.size()}, {"ids", ids}}};
          });

  reg.add("code_review", "Summarize a node's source and flag suspicious lines (args: path or node).",
          [bus, root = ctx.workspace, lexicon = ctx.lexicon, active = ctx.active_event](const nlohmann::json& args) {
            auto target = arg_string(args, "path", "node");
            if (bus->has_node(target)) {
              const auto& n = bus->node(target);
              if (n.source_path.empty()) {
                throw Error(Errc::not_found, "node " + n.name + " has no source file on record", "path");
              }
              target = n.source_path;
            }
            const auto summary = review::summarize_file(root, target);
            const auto* event = active ? active() : nullptr;
            const auto findings = review::match_findings(summary, event, lexicon);
            std::string out = fmt::format("{} ({}): {} functions, {} variables, {} config params\n",
                                          summary.path, review::to_string(summary.language),
                                          summary.functions.size(), summary.variables.size(),
                                          summary.config_params.size());
            for (const auto& f : findings) {
              out += fmt::format("L{} {}: `{}` ({})\n", f.line, review::to_string(f.kind), f.excerpt,
                                 f.rationale);
            }
            if (findings.empty()) out += "no findings\n";
            return ToolResult{out, true, review::findings_document(summary, findings)};
          });

  reg.add("restart_node", "Respawn a node that has died (args: node).",
          [bus, allowed = ctx.restart_allowed](const nlohmann::json& args) {
            const auto name = canonical_node(arg_string(args, "node", "name"));
            const auto& n = bus->node(name);
            if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), n.name) == allowed.end()) {
              throw Error(Errc::invalid_argument, "restart of " + n.name + " is not permitted", "node");
            }
            if (!bus->restart_node(n.name)) {
              return ToolResult{n.name + " is already running\n", true, {{"restarted", false}}};
            }
            return ToolResult{fmt::format("restarted {} at {} ms\n", n.name, bus->now().millis), true,
                              {{"restarted", true}}};
          });

  reg.add("read_log_tail", "Last n entries of /rosout (args: n).", [bus](const nlohmann::json& args) {
    const auto n = arg_count(args, "n", 20);
    std::string out;
    for (const auto& e : bus->log_tail(n)) {
      out += fmt::format("[{}] [{}] {}\n", sim::to_string(e.level), e.node, e.text);
    }
    if (out.empty()) out = "log is empty\n";
    return ToolResult{out, true, {}};
  });

  return reg;
}

}  // namespace helpdesk::agent
