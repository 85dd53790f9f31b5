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

#include "helpdesk/sim/trace.hpp"

#include <istream>

#include <nlohmann/json.hpp>

#include "helpdesk/common/error.hpp"

namespace helpdesk::sim {

void write_trace_jsonl(std::ostream& out, const std::vector<TraceEntry>& trace) {
  for (const auto& e : trace) {
    nlohmann::ordered_json line;
    line["t"] = e.t.millis;
    line["topic"] = e.topic;
    line["publisher"] = e.publisher;
    line["seq"] = e.seq;
    line["payload_digest"] = to_hex(e.payload_digest);
    out << line.dump() << '\n';
  }
}

std::vector<TraceEntry> read_trace_jsonl(std::istream& in) {
  std::vector<TraceEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      TraceEntry e;
      e.t = SimTime{j.at("t").get<Millis>()};
      e.topic = j.at("topic").get<std::string>();
      e.publisher = j.at("publisher").get<std::string>();
      e.seq = j.at("seq").get<std::uint64_t>();
      e.payload_digest = std::stoull(j.at("payload_digest").get<std::string>(), nullptr, 16);
      out.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error(Errc::parse_error, std::string("bad trace line: ") + ex.what());
    }
  }
  return out;
}

std::uint64_t stream_digest(const std::vector<Message>& messages) {
  Fnv1a h;
  for (const auto& m : messages) {
    h.update_value(m.seq);
    h.update_value(m.stamp.millis);
    h.update_value(payload_digest(m.payload));
  }
  return h.value();
}

}  // namespace helpdesk::sim
