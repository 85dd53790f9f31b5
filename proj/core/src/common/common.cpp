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

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/hash.hpp"
#include "helpdesk/common/io.hpp"
#include "helpdesk/common/names.hpp"

namespace helpdesk {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::unknown_node: return "unknown-node";
    case Errc::dead_node: return "dead-node";
    case Errc::duplicate_node: return "duplicate-node";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::parse_error: return "parse-error";
    case Errc::validation_error: return "validation-error";
    case Errc::type_mismatch: return "type-mismatch";
    case Errc::storage_error: return "storage-error";
    case Errc::provider_unavailable: return "provider-unavailable";
    case Errc::unknown_tool: return "unknown-tool";
    case Errc::tool_error: return "tool-error";
    case Errc::backend_error: return "backend-error";
    case Errc::no_open_event: return "no-open-event";
    case Errc::already_resolved: return "already-resolved";
    case Errc::not_found: return "not-found";
    case Errc::conflict: return "conflict";
    case Errc::path_outside_workspace: return "path-outside-workspace";
    case Errc::scenario_config_error: return "scenario-config-error";
  }
  return "unknown";
}

std::string to_hex(std::uint64_t value) { return fmt::format("{:016x}", value); }

std::string trim(std::string_view text) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  auto begin = std::find_if(text.begin(), text.end(), not_space);
  auto end = std::find_if(text.rbegin(), text.rend(), not_space).base();
  return begin < end ? std::string(begin, end) : std::string{};
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string canonical_topic(std::string_view name) {
  std::string t = trim(name);
  while (t.size() > 1 && t.back() == '/') t.pop_back();
  if (t.empty()) return t;
  if (t.front() != '/') t.insert(t.begin(), '/');
  return t;
}

std::string canonical_node(std::string_view name) {
  std::string n = trim(name);
  auto first = n.find_first_not_of('/');
  return first == std::string::npos ? std::string{} : n.substr(first);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::storage_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::storage_error, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::storage_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::storage_error, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace helpdesk
