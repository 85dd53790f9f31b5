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

#include <stdexcept>
#include <string>
#include <string_view>

namespace helpdesk {

enum class Errc {
  unknown_node,
  dead_node,
  duplicate_node,
  invalid_argument,
  parse_error,
  validation_error,
  type_mismatch,
  storage_error,
  provider_unavailable,
  unknown_tool,
  tool_error,
  backend_error,
  no_open_event,
  already_resolved,
  not_found,
  conflict,
  path_outside_workspace,
  scenario_config_error,
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for the library; `code()` drives API status mapping and
// `field()` names the offending key for validation failures.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string field = {})
      : std::runtime_error(message), code_(code), field_(std::move(field)) {}

  Errc code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Errc code_;
  std::string field_;
};

}  // namespace helpdesk
