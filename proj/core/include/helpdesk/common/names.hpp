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

#include <string>
#include <string_view>

namespace helpdesk {

// Tolerant name forms: "/scan_out" and "scan_out" name the same topic, and
// "/lidar_src" and "lidar_src" name the same node.
std::string canonical_topic(std::string_view name);
std::string canonical_node(std::string_view name);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

}  // namespace helpdesk
