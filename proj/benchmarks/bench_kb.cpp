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

#include <random>
#include <string>
#include <vector>

#include "helpdesk/kb/knowledge_base.hpp"

namespace {

using namespace helpdesk;

std::string phrase(std::mt19937_64& rng, int words) {
  static const std::vector<std::string> vocab = {"lidar", "camera", "scan",  "image", "drop",    "delay",
                                                 "corrupt", "crash", "relay", "timeout", "buffer", "driver",
                                                 "usb",   "frame",  "stamp", "queue", "restart", "sensor"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  for (int i = 0; i < words; ++i) out += (i ? " " : "") + vocab[pick(rng)];
  return out;
}

void BM_KbRetrieve(benchmark::State& state) {
  kb::KnowledgeBase store(nullptr, [] { return 0; });
  std::mt19937_64 rng(1);
  for (int i = 0; i < state.range(0); ++i) store.add_record(phrase(rng, 3), phrase(rng, 6), {"step"});
  std::vector<std::string> queries;
  for (int i = 0; i < 64; ++i) queries.push_back(phrase(rng, 3));
  std::size_t q = 0;
  for (auto _ : state) benchmark::DoNotOptimize(store.retrieve(queries[q++ % queries.size()], 5));
}
BENCHMARK(BM_KbRetrieve)->Arg(100)->Arg(1000)->Arg(10000);

void BM_HashingEmbed(benchmark::State& state) {
  kb::HashingEmbedder e;
  const std::string text = "delay on /scan_out from node lidar_src: staleness 500 ms above threshold";
  for (auto _ : state) benchmark::DoNotOptimize(e.embed(text));
}
BENCHMARK(BM_HashingEmbed);

}  // namespace
