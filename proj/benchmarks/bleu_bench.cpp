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

#include "detoxforge/metrics.hpp"
#include "detoxforge/util.hpp"

namespace {

std::vector<std::string> Corpus(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> vocab{"the", "a", "you", "are", "not", "very", "kind", "today",
                                              "people", "think", "that", "this", "is", "wrong", "."};
  detoxforge::Rng rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    const auto len = 5 + rng.UniformBelow(20);
    for (std::uint64_t k = 0; k < len; ++k) s += (k ? " " : "") + vocab[rng.UniformBelow(vocab.size())];
    out.push_back(std::move(s));
  }
  return out;
}

void BM_CorpusBleu(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto hyps = Corpus(n, 1);
  const auto refs = Corpus(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(detoxforge::metrics::Bleu(hyps, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_CorpusBleu)->Arg(100)->Arg(1000)->Arg(10000);

void BM_JointMetric(benchmark::State& state) {
  double acc = 44.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(detoxforge::metrics::JointMetric(acc, 88.47, 76.0));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_JointMetric);

}  // namespace
