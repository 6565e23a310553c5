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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/corpus.hpp"
#include "detoxforge/error.hpp"
#include "detoxforge/gateway.hpp"

namespace detoxforge::filtration {

struct EnsemblePrediction {
  std::string classifier_id;
  corpus::Label verdict;

  bool operator==(const EnsemblePrediction&) const = default;
};

enum class Reason { Kept, SourceNeverToxic, TargetSometimesToxic };
std::string_view ToString(Reason reason);

struct FilterDecision {
  bool keep = false;
  Reason reason = Reason::Kept;
  std::vector<EnsemblePrediction> source_preds;
  std::vector<EnsemblePrediction> target_preds;
};

// Keeps a pair when at least one classifier calls the toxic side toxic and
// every classifier calls the non-toxic side non-toxic. The source clause is
// reported first when both fail.
FilterDecision FilterPair(std::vector<EnsemblePrediction> source_preds,
                          std::vector<EnsemblePrediction> target_preds);

enum class ErrorPolicy { Abort, SkipAndLog };
ErrorPolicy ParseErrorPolicy(std::string_view s);

struct PlatformFilterStats {
  std::size_t original = 0;
  std::size_t kept = 0;
  std::size_t source_never_toxic = 0;
  std::size_t target_sometimes_toxic = 0;
  std::size_t errored = 0;

  std::size_t dropped() const { return source_never_toxic + target_sometimes_toxic + errored; }
  PlatformFilterStats& operator+=(const PlatformFilterStats& other);
  bool operator==(const PlatformFilterStats&) const = default;
};

struct FilterStats {
  std::map<std::string, PlatformFilterStats> per_platform;

  PlatformFilterStats total() const;
  FilterStats& Merge(const FilterStats& other);
  // {"platforms": {name: {original, filtered, ...}}, "total": {...}}; "filtered"
  // is the kept count.
  Json ToJson() const;
};

struct RecordError {
  std::string record_id;
  std::string platform;
  Errc code;
  std::string message;
};

struct FilterOptions {
  ErrorPolicy policy = ErrorPolicy::SkipAndLog;
  unsigned jobs = 1;
};

struct FilterResult {
  std::vector<corpus::ParallelRecord> kept;  // input order
  std::vector<std::optional<FilterDecision>> decisions;  // one per input record; empty when errored
  FilterStats stats;
  std::vector<RecordError> errors;
};

// Classifier endpoints must report the toxic class as their positive label.
EnsemblePrediction Predict(gateway::Gateway& gw, std::string_view classifier_id, std::string_view text);

// Under Abort the first gateway failure is rethrown with the record id
// prepended; under SkipAndLog it is counted and listed in `errors`.
FilterResult RunFilter(gateway::Gateway& gw, const std::vector<corpus::ParallelRecord>& records,
                       const std::vector<std::string>& ensemble, const FilterOptions& options = {});

}  // namespace detoxforge::filtration
