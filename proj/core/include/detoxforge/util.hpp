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

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

namespace detoxforge {

using Json = nlohmann::json;

// Seeded generator shared by every sampling routine in the project.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard (the 10000th draw from a default-seeded engine is
// 9981545732273789042). Bounded draws do not use std::uniform_int_distribution
// because its algorithm is implementation-defined; UniformBelow uses rejection
// sampling over the full 64-bit output instead, so a given seed yields the
// same stream on every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t UniformBelow(std::uint64_t bound);

  // Uniform integer in [lo, hi], inclusive.
  std::uint64_t UniformInclusive(std::uint64_t lo, std::uint64_t hi) {
    return lo + UniformBelow(hi - lo + 1);
  }

 private:
  std::mt19937_64 engine_;
};

// Partial Fisher-Yates: after the call the first `take` elements are a
// uniform sample without replacement, in draw order. Step i swaps element i
// with element UniformInclusive(i, n-1).
template <typename T>
void PartialShuffle(std::vector<T>& items, std::size_t take, Rng& rng) {
  const std::size_t n = items.size();
  if (take > n) take = n;
  for (std::size_t i = 0; i < take && i + 1 < n; ++i) {
    const auto j = static_cast<std::size_t>(rng.UniformInclusive(i, n - 1));
    using std::swap;
    swap(items[i], items[j]);
  }
}

template <typename T>
void Shuffle(std::vector<T>& items, Rng& rng) {
  PartialShuffle(items, items.size(), rng);
}

// Lowercase hex SHA-256 of the given bytes.
std::string Sha256Hex(std::string_view bytes);

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void AtomicWriteFile(const std::filesystem::path& path, std::string_view contents);

// One JSON document per line; blank lines are skipped. Parse errors carry
// the file path and line number.
std::vector<Json> ReadJsonLines(const std::filesystem::path& path);
void WriteJsonLines(const std::filesystem::path& path, std::span<const Json> rows);

std::string Trim(std::string_view s);
std::string ToLowerAscii(std::string_view s);

// UTF-8 helpers. Invalid sequences decode as U+FFFD, one byte at a time.
std::vector<char32_t> DecodeUtf8(std::string_view s);
std::string EncodeUtf8(std::u32string_view cps);
std::string EncodeUtf8(char32_t cp);

std::string NowIso8601();
std::string NewUuid();

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results keep index
// order. The first exception thrown by any task is rethrown after all
// workers have joined.
template <typename R>
std::vector<R> OrderedParallelMap(std::size_t n, unsigned workers,
                                  const std::function<R(std::size_t)>& fn);

}  // namespace detoxforge

#include "detoxforge/detail/parallel_impl.hpp"
