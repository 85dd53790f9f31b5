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

#include <chrono>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace helpdesk {

/// POSTs `body` as JSON to an `http://host:port/path` URL and parses the JSON
/// reply. Transport failures and non-2xx replies throw provider_unavailable.
nlohmann::json post_json(std::string_view url, const nlohmann::json& body,
                         std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace helpdesk
