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
#include <vector>

#include "detoxforge/gateway.hpp"
#include "detoxforge/metrics.hpp"

namespace detoxforge::metrics {

// Self compares each output with its input; Reference compares it with the
// gold non-toxic target.
enum class BleuMode { Self, Reference };
std::string_view ToString(BleuMode mode);
BleuMode ParseBleuMode(std::string_view s);

struct EvalItem {
  std::string platform;
  std::string source;
  std::string hypothesis;
  std::optional<std::string> reference;
};

EvalItem EvalItemFromJson(const Json& j);
std::vector<EvalItem> LoadEvalItems(const std::filesystem::path& path);

struct EvalEndpoints {
  std::string style_classifier;    // positive label = toxic
  std::string fluency_classifier;  // positive label = fluent
  std::string sim_embedder;
  std::string bertscore_embedder;

  static EvalEndpoints FromJson(const Json& j);
  Json ToJson() const;
};

struct EvalOptions {
  BleuConfig bleu;
  BleuMode bleu_mode = BleuMode::Reference;
  RefusalLexicon lexicon;
  unsigned jobs = 1;
};

struct PlatformBleuCounts {
  std::size_t pairs = 0;               // pairs that entered BLEU
  std::size_t refusals_excluded = 0;   // reference mode only
};

struct EvalReport {
  std::vector<PlatformReport> platforms;  // sorted by platform name
  PlatformReport overall;
  std::map<std::string, PlatformBleuCounts> bleu_counts;
  BleuMode bleu_mode = BleuMode::Reference;

  Json ToJson() const;
  std::string ToTable() const;
};

// Per platform: Acc and Fl are classifier rates, Sim and BS are mean
// input/output embedding similarities, J is computed from those means, BLEU
// follows the chosen mode. In reference mode, outputs flagged by the refusal
// lexicon are left out of BLEU and counted instead.
EvalReport Evaluate(gateway::Gateway& gw, const std::vector<EvalItem>& items, const EvalEndpoints& endpoints,
                    const EvalOptions& options = {});

}  // namespace detoxforge::metrics
