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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "helpdesk/sim/bus.hpp"
#include "helpdesk/sim/workload.hpp"

namespace helpdesk::fault {

using sim::Millis;
using sim::SimTime;

enum class ErrorType { corrupted, drop, delay };

std::string_view to_string(ErrorType type) noexcept;

/// One entry of the fault YAML. Keys are exactly the member names.
struct FaultSpec {
  sim::SensorKind sensor_kind = sim::SensorKind::lidar;
  std::string message_type = "LaserScan";
  std::string input_topic;
  std::string output_topic;
  ErrorType error_type = ErrorType::drop;
  double error_value = 0.0;
  double error_frequency = 0.0;
  std::uint64_t seed = 0;
};

struct NodeCrashSpec {
  std::string node_id;
  SimTime at_time;
};

struct FaultConfig {
  std::vector<FaultSpec> faults;
  std::vector<NodeCrashSpec> crashes;
};

/// Parses and validates a fault document with top-level `faults` and/or
/// `crashes` lists. Throws Error{parse_error} on malformed YAML and
/// Error{validation_error} naming the offending field otherwise.
FaultConfig parse_fault_config(std::string_view yaml_text);

/// Throws Error{validation_error} if `spec` breaks an invariant.
void validate(const FaultSpec& spec);

struct Pass {};
struct Corrupt {
  sim::Payload payload;
};
struct Delay {
  SimTime due;
};
struct Drop {};
using FaultAction = std::variant<Pass, Corrupt, Delay, Drop>;

std::string_view action_name(const FaultAction& action) noexcept;

/// Fills every range or pixel with `value`; metadata untouched.
sim::Payload corrupt_payload(const sim::Payload& payload, double value);

/// Pure fault decision for one intercepted message.
FaultAction decide_action(const FaultSpec& spec, const sim::Message& msg, double trigger_draw,
                          SimTime now);

struct LedgerEntry {
  SimTime t;
  std::uint64_t seq = 0;
  std::string action;  // pass | corrupt | delay | drop
};

void write_ledger_jsonl(std::ostream& out, const std::vector<LedgerEntry>& ledger);

struct CrashReceipt {
  std::string node_id;
  SimTime at_time;
};

struct InjectorOptions {
  SimTime active_from;         // messages before this pass untouched
  std::string source_path;     // reported by node_info / code_review
  std::string name;            // defaults to laser_/image_fault_injector
};

/// Owns the fault injector nodes attached to one bus.
class FaultInjector {
 public:
  explicit FaultInjector(sim::MessageBus& bus, std::optional<Millis> run_duration = std::nullopt)
      : bus_(&bus), run_duration_(run_duration) {}

  std::string attach_injector(const FaultSpec& spec, const InjectorOptions& options = {});
  CrashReceipt schedule_crash(const NodeCrashSpec& spec);

  /// Ledger of every decision made by the injector named `node`.
  const std::vector<LedgerEntry>& ledger(std::string_view node) const;
  std::vector<std::string> injectors() const;

 private:
  struct Injector {
    FaultSpec spec;
    std::vector<LedgerEntry> ledger;
    std::uint64_t draws = 0;
  };

  sim::MessageBus* bus_;
  std::optional<Millis> run_duration_;
  std::map<std::string, std::unique_ptr<Injector>, std::less<>> injectors_;
};

}  // namespace helpdesk::fault
