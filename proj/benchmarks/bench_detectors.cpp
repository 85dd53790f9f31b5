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

#include "helpdesk/diagnostics/diagnostics.hpp"
#include "helpdesk/sim/workload.hpp"

namespace {

using namespace helpdesk;

void BM_CheckContentScan(benchmark::State& state) {
  const sim::Payload scan = sim::generate_scan({}, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(diag::check_content(scan));
}
BENCHMARK(BM_CheckContentScan);

void BM_CheckContentImage(benchmark::State& state) {
  sim::PayloadPattern p;
  p.width = static_cast<std::uint32_t>(state.range(0));
  p.height = static_cast<std::uint32_t>(state.range(0) * 3 / 4);
  const sim::Payload image = sim::generate_image(p, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(diag::check_content(image));
}
BENCHMARK(BM_CheckContentImage)->Arg(64)->Arg(640);

void BM_ClassifyLog(benchmark::State& state) {
  const sim::LogEntry entry{sim::LogLevel::error, "scan_out_consumer", "no data on /scan_out"};
  for (auto _ : state) benchmark::DoNotOptimize(diag::classify_log(entry, sim::SimTime{1000}));
}
BENCHMARK(BM_ClassifyLog);

}  // namespace
