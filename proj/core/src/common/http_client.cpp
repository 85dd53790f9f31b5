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

#include <httplib.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/common/http.hpp"
#include "helpdesk/kb/knowledge_base.hpp"

namespace helpdesk {

nlohmann::json post_json(std::string_view url, const nlohmann::json& body,
                         std::chrono::milliseconds timeout) {
  const std::string u(url);
  const auto scheme_end = u.find("://");
  const auto path_start = u.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? u : u.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : u.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error(Errc::provider_unavailable,
                "POST " + u + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(Errc::provider_unavailable, "POST " + u + " returned HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::provider_unavailable, "POST " + u + ": reply is not JSON: " + e.what());
  }
}

namespace kb {

Embedding RemoteEmbedder::embed(std::string_view text) const {
  const auto reply = post_json(url_, nlohmann::json{{"text", std::string(text)}});
  Embedding e;
  try {
    e.values = reply.at("vector").get<std::vector<float>>();
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::provider_unavailable, std::string("embedding reply malformed: ") + ex.what());
  }
  if (e.values.size() != kEmbeddingDim) {
    throw Error(Errc::provider_unavailable,
                "embedding provider returned dimension " + std::to_string(e.values.size()));
  }
  double norm = 0.0;
  for (float v : e.values) norm += static_cast<double>(v) * v;
  e.normalized = norm > 0.0;
  if (e.normalized) {
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& v : e.values) v = static_cast<float>(v * inv);
  }
  return e;
}

}  // namespace kb
}  // namespace helpdesk
