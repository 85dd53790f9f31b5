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

#include <ostream>
#include <string>
#include <vector>

#include "helpdesk/sim/bus.hpp"

namespace helpdesk::sim {

/// One JSON object per line: {"t","topic","publisher","seq","payload_digest"}.
void write_trace_jsonl(std::ostream& out, const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> read_trace_jsonl(std::istream& in);

/// Digest over (seq, stamp, payload) of every message in order; two streams on
/// different topics compare equal when they carry the same data.
std::uint64_t stream_digest(const std::vector<Message>& messages);

}  // namespace helpdesk::sim
