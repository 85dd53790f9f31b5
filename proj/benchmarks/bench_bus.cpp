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

#include <benchmark/benchmark.h>

#include "helpdesk/fault/fault.hpp"
#include "helpdesk/sim/workload.hpp"

namespace {

using namespace helpdesk;

// One simulated minute of the default two-sensor workload.
void BM_BusWorkloadMinute(benchmark::State& state) {
  for (auto _ : state) {
    sim::MessageBus bus;
    bus.set_trace_recording(false);
    sim::spawn_sensor_source(bus, {"lidar_src", sim::SensorKind::lidar, "/scan", 10.0, {}, 1});
    sim::spawn_sensor_source(bus, {"camera_src", sim::SensorKind::camera, "/image_raw", 5.0, {}, 2});
    sim::spawn_consumer(bus, {"scan_consumer", "/scan", 1000, ""});
    sim::spawn_consumer(bus, {"image_consumer", "/image_raw", 2000, ""});
    bus.advance(60'000);
    benchmark::DoNotOptimize(bus.delivery_count());
    state.counters["deliveries"] = static_cast<double>(bus.delivery_count());
  }
}
BENCHMARK(BM_BusWorkloadMinute)->Unit(benchmark::kMillisecond);

void BM_InjectorRelay(benchmark::State& state) {
  for (auto _ : state) {
    sim::MessageBus bus;
    bus.set_trace_recording(false);
    fault::FaultInjector injector(bus);
    sim::spawn_sensor_source(bus, {"lidar_src", sim::SensorKind::lidar, "/scan", 100.0, {}, 1});
    fault::FaultSpec f;
    f.input_topic = "/scan";
    f.output_topic = "/scan_out";
    f.error_type = fault::ErrorType::corrupted;
    f.error_frequency = 0.3;
    injector.attach_injector(f);
    bus.advance(10'000);
    benchmark::DoNotOptimize(bus.published_count("/scan_out"));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_InjectorRelay)->Unit(benchmark::kMillisecond);

}  // namespace
