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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "detoxforge/corpus.hpp"
#include "detoxforge/error.hpp"
#include "detoxforge/gateway.hpp"

namespace detoxforge::roundtrip {

inline constexpr std::size_t kReferenceSampleSize = 1000;

struct LangReport {
  std::string language;
  double toxicity_pct = 0;     // back-translated sources classified toxic
  double nontoxicity_pct = 0;  // back-translated targets classified non-toxic
  double source_sim = 0;
  double target_sim = 0;
  std::size_t n = 0;
  std::size_t skipped = 0;

  // Column names follow the published report: Toxicity, Non-toxicity,
  // Source Sim, Target Sim. Values rounded to two decimals.
  Json ToJson() const;
};

struct RoundtripEndpoints {
  std::string translator;
  std::string classifier;  // positive label = toxic
  std::string embedder;
};

struct PairAudit {
  std::string record_id;
  std::string language;
  std::string source;
  std::string source_translated;
  std::string source_back;
  std::string target;
  std::string target_translated;
  std::string target_back;
  bool source_toxic = false;
  bool target_nontoxic = false;
  double source_sim = 0;
  double target_sim = 0;

  Json ToJson() const;
};

struct PairFailure {
  std::string record_id;
  Errc code;
  std::string message;
};

struct RoundtripOptions {
  std::string pivot_language = "en";
  unsigned jobs = 1;
  std::optional<std::filesystem::path> audit_path;  // JSON-lines, one PairAudit per kept pair
};

struct RoundtripResult {
  LangReport report;
  std::vector<PairAudit> audits;
  std::vector<PairFailure> failures;
};

// Sends toxic and non-toxic sides of every pair to `language` and back to the
// pivot language. Failed pairs are skipped and listed; if none survive,
// throws EmptyBatch.
RoundtripResult Roundtrip(gateway::Gateway& gw, const std::vector<corpus::ParallelRecord>& pairs,
                          const std::string& language, const RoundtripEndpoints& endpoints,
                          const RoundtripOptions& options = {});

}  // namespace detoxforge::roundtrip
