// Copyright 2026 The DetoxForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "detoxforge/adversarial.hpp"

namespace {

void BM_GenerateTestbed(benchmark::State& state) {
  auto cfg = detoxforge::adversarial::AdversaryConfig::Load(std::filesystem::path(DETOXFORGE_SOURCE_DIR) / "data" /
                                                            "adversarial_default.json");
  cfg.n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(detoxforge::adversarial::GenerateTestbed(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateTestbed)->Arg(5000)->Arg(50000);

void BM_SerializeTestbed(benchmark::State& state) {
  auto cfg = detoxforge::adversarial::AdversaryConfig::Load(std::filesystem::path(DETOXFORGE_SOURCE_DIR) / "data" /
                                                            "adversarial_default.json");
  const auto items = detoxforge::adversarial::GenerateTestbed(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(detoxforge::adversarial::SerializeTestbed(items, false));
}
BENCHMARK(BM_SerializeTestbed);

}  // namespace
