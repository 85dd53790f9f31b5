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

#include "helpdesk/service/http_server.hpp"

#include <charconv>
#include <functional>

#define CPPHTTPLIB_THREAD_POOL_COUNT 16
#include <httplib.h>

#include <fmt/format.h>

#include "helpdesk/common/error.hpp"

namespace helpdesk::service {

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument:
    case Errc::parse_error:
    case Errc::validation_error:
    case Errc::type_mismatch:
    case Errc::scenario_config_error:
    case Errc::path_outside_workspace:
      return 400;
    case Errc::unknown_node:
    case Errc::not_found:
    case Errc::unknown_tool:
      return 404;
    case Errc::already_resolved:
    case Errc::conflict:
    case Errc::no_open_event:
    case Errc::duplicate_node:
    case Errc::dead_node:
      return 409;
    case Errc::provider_unavailable:
    case Errc::backend_error:
      return 502;
    case Errc::storage_error:
    case Errc::tool_error:
      return 500;
  }
  return 500;
}

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const std::string& field = {}) {
  nlohmann::json body = {{"error", code}, {"message", message}};
  if (!field.empty()) body["field"] = field;
  send_json(res, status, body);
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw Error(Errc::validation_error, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::parse_error, std::string("malformed JSON: ") + e.what());
  }
}

std::string body_string(const nlohmann::json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end()) throw Error(Errc::validation_error, fmt::format("missing field '{}'", key), key);
  if (!it->is_string()) throw Error(Errc::validation_error, fmt::format("field '{}' must be a string", key), key);
  return it->get<std::string>();
}

std::uint64_t parse_seq(const std::string& text) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw Error(Errc::validation_error, "after_seq must be a non-negative integer", "after_seq");
  }
  return v;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps library errors onto status codes; anything else is a 500.
httplib::Server::Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what(), e.field());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

std::string sse_frame(const Envelope& e) {
  return fmt::format("id: {}\nevent: {}\ndata: {}\n\n", e.seq, to_string(e.kind), to_json(e).dump());
}

}  // namespace

struct HttpServer::Impl {
  Service* service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  impl_->service = &service;
  auto& svr = impl_->server;
  Service* svc = &service;

  svr.Get("/healthz", guarded([](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, {{"status", "ok"}});
          }));

  svr.Post("/sessions", guarded([svc](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const auto level = body.contains("level") ? body_string(body, "level") : std::string("intermediate");
             send_json(res, 201, to_json(svc->create_session(level)));
           }));

  svr.Get(R"(/sessions/([^/]+))", guarded([svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, to_json(svc->session(req.matches[1].str())));
          }));

  svr.Post(R"(/sessions/([^/]+)/messages)", guarded([svc](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             send_json(res, 200, to_json(svc->post_message(req.matches[1].str(), body_string(body, "text"))));
           }));

  svr.Post(R"(/sessions/([^/]+)/events/([^/]+)/fix)",
           guarded([svc](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, to_json(svc->apply_fix(req.matches[1].str(), req.matches[2].str())));
           }));

  svr.Get(R"(/sessions/([^/]+)/events)", guarded([svc](const httplib::Request& req, httplib::Response& res) {
            const auto id = req.matches[1].str();
            std::uint64_t after = 0;
            if (req.has_param("after_seq")) {
              after = parse_seq(req.get_param_value("after_seq"));
            } else if (req.has_header("Last-Event-ID")) {
              after = parse_seq(req.get_header_value("Last-Event-ID"));
            }
            const bool follow = !req.has_param("follow") || req.get_param_value("follow") != "0";
            svc->session(id);  // 404 before the stream starts

            auto cursor = std::make_shared<std::uint64_t>(after);
            auto idle = std::make_shared<int>(0);
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider(
                "text/event-stream", [svc, id, cursor, idle, follow](std::size_t, httplib::DataSink& sink) {
                  if (svc->stopping()) {
                    sink.done();
                    return true;
                  }
                  for (const auto& e : svc->events_after(id, *cursor)) {
                    const auto frame = sse_frame(e);
                    if (!sink.write(frame.data(), frame.size())) return false;
                    *cursor = e.seq;
                    *idle = 0;
                  }
                  if (!follow) {
                    sink.done();
                    return true;
                  }
                  if (!svc->wait_for_events(id, *cursor, std::chrono::milliseconds(250)) && ++*idle >= 40) {
                    static constexpr std::string_view ping = ": keepalive\n\n";
                    if (!sink.write(ping.data(), ping.size())) return false;
                    *idle = 0;
                  }
                  return true;
                });
          }));

  svr.Post("/sim/advance", guarded([svc](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             auto it = body.find("ms");
             if (it == body.end() || !it->is_number_integer()) {
               throw Error(Errc::validation_error, "field 'ms' must be an integer", "ms");
             }
             svc->advance(it->get<sim::Millis>());
             send_json(res, 200, svc->status());
           }));

  svr.Get("/sim/status", guarded([svc](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, svc->status());
          }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace helpdesk::service
