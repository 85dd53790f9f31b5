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

// helpdesk-server: hosts one simulated robot graph behind the HTTP API.

#include <atomic>
#include <chrono>
#include <csignal>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "helpdesk/common/error.hpp"
#include "helpdesk/service/http_server.hpp"
#include "helpdesk/service/service.hpp"

using namespace helpdesk;

namespace {

std::atomic<service::HttpServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Help desk service: sessions, diagnosis stream, chat and fixes over HTTP"};
  std::string listen = "127.0.0.1:8080";
  std::string workspace;
  std::string scenario;
  std::string scenario_name;
  std::string detectors;
  std::string kb_path;
  std::string backend_url;
  std::string session_store;
  std::string markers;
  std::vector<std::string> restart_allowed;
  std::int64_t tick_ms = 100;
  double speed = 1.0;

  // Every flag also reads an environment variable; an explicit flag wins.
  app.add_option("--listen", listen, "host:port to bind")->envname("HELPDESK_LISTEN");
  app.add_option("--workspace", workspace, "Source tree root for code review")->envname("HELPDESK_WORKSPACE");
  app.add_option("--scenario", scenario, "Scenario or suite YAML")->envname("HELPDESK_SCENARIO")->required();
  app.add_option("--scenario-name", scenario_name, "Suite entry to deploy")->envname("HELPDESK_SCENARIO_NAME");
  app.add_option("--detectors", detectors, "Detector threshold YAML")->envname("HELPDESK_DETECTOR_CONFIG");
  app.add_option("--kb", kb_path, "Knowledge base JSON Lines file")->envname("HELPDESK_KB_PATH");
  app.add_option("--backend-url", backend_url, "Remote agent backend; mock script otherwise")
      ->envname("HELPDESK_BACKEND_URL");
  app.add_option("--session-store", session_store, "Session store JSON file")->envname("HELPDESK_SESSION_STORE");
  app.add_option("--markers", markers, "Injection-marker lexicon YAML")->envname("HELPDESK_MARKERS");
  app.add_option("--restart-allowed", restart_allowed, "Nodes the agent may restart (default: any)")
      ->envname("HELPDESK_RESTART_ALLOWED")
      ->delimiter(',');
  app.add_option("--tick-ms", tick_ms, "Virtual time advanced per tick; 0 advances only via /sim/advance")
      ->envname("HELPDESK_TICK_MS")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--speed", speed, "Virtual milliseconds per wall millisecond")
      ->envname("HELPDESK_SPEED")
      ->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    spdlog::error("--listen expects host:port, got '{}'", listen);
    return 2;
  }
  const auto host = listen.substr(0, colon);
  const int port = std::stoi(listen.substr(colon + 1));

  service::ServiceConfig cfg;
  cfg.scenario = scenario;
  cfg.scenario_name = scenario_name;
  cfg.workspace = workspace;
  cfg.detector_config = opt_path(detectors);
  cfg.kb_path = opt_path(kb_path);
  cfg.session_store = opt_path(session_store);
  cfg.marker_lexicon = opt_path(markers);
  cfg.backend_url = backend_url;
  cfg.restart_allowed = restart_allowed;

  try {
    service::Service svc(cfg);
    service::HttpServer http(svc);
    const int bound = http.bind(host, port);
    if (bound < 0) {
      spdlog::error("cannot bind {}", listen);
      return 1;
    }
    g_server = &http;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    std::thread ticker;
    if (tick_ms > 0) {
      ticker = std::thread([&] {
        const auto wall = std::chrono::milliseconds(static_cast<std::int64_t>(static_cast<double>(tick_ms) / speed));
        while (!svc.stopping()) {
          std::this_thread::sleep_for(wall);
          if (!svc.stopping()) svc.advance(tick_ms);
        }
      });
    }
    spdlog::info("serving scenario '{}' on {}:{}", svc.status().value("scenario", ""), host, bound);
    http.listen_after_bind();
    g_server = nullptr;
    svc.shutdown();
    if (ticker.joinable()) ticker.join();
    spdlog::info("stopped");
  } catch (const Error& e) {
    spdlog::error("{} [{}]", e.what(), to_string(e.code()));
    return 2;
  }
  return 0;
}
