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

#include <memory>
#include <string>

#include "helpdesk/common/error.hpp"
#include "helpdesk/service/service.hpp"

namespace helpdesk::service {

/// HTTP status for a library error code.
int http_status(Errc code) noexcept;

/// JSON routes and the server-sent event stream over a Service.
///
///   POST /sessions                          {"level": ...}          -> 201 session
///   GET  /sessions/{id}                                             -> session
///   POST /sessions/{id}/messages            {"text": ...}           -> envelope
///   GET  /sessions/{id}/events?after_seq=N&follow=0|1               -> text/event-stream
///   POST /sessions/{id}/events/{eid}/fix                            -> envelope
///   GET  /healthz
///   POST /sim/advance                       {"ms": ...}             -> status
///   GET  /sim/status
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen_after_bind();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace helpdesk::service
