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

#include <optional>
#include <string>
#include <string_view>

#include "detoxforge/error.hpp"
#include "detoxforge/gateway.hpp"
#include "detoxforge/metrics.hpp"
#include "detoxforge/prompts.hpp"

namespace detoxforge::runtime {

// Vanilla sends the bare text, Prompted the zero-shot instruction, CotExpl
// asks for an explanation followed by the rewrite.
enum class DetoxMode { Vanilla, Prompted, CotExpl };
std::string_view ToString(DetoxMode mode);
DetoxMode ParseDetoxMode(std::string_view s);

struct DetoxEndpoints {
  std::string detox_model;
  std::string paraphrase_classifier;
};

struct DetoxRequest {
  std::string text;
  DetoxMode mode = DetoxMode::CotExpl;
  DetoxEndpoints endpoints;

  // Throws BadInput on empty text or endpoint ids.
  void Validate() const;
  static DetoxRequest FromJson(const Json& j);
  Json ToJson() const;
};

enum class Verdict { Paraphrase, NonParaphrase, Unknown };
std::string_view ToString(Verdict v);
Verdict ParseVerdict(std::string_view s);

struct GateResult {
  Verdict verdict = Verdict::Unknown;
  bool warning = true;
  std::optional<double> score;
  std::optional<std::string> error;
};

struct ParsedOutput {
  std::optional<std::string> explanation;
  std::string rewrite;
  bool parse_degraded = false;
};

inline constexpr std::string_view kExplanationLabel = "Explanation:";
inline constexpr std::string_view kRewriteLabel = "Non-toxic:";

// CotExpl output must hold "Explanation:" then "Non-toxic:" (labels matched
// case-insensitively, nothing but whitespace before the first). Throws
// ParseError otherwise.
ParsedOutput ParseCotStrict(std::string_view raw);
// Never throws: CotExpl output that fails ParseCotStrict becomes the whole
// trimmed text as rewrite with parse_degraded set.
ParsedOutput ParseModelOutput(std::string_view raw, DetoxMode mode);

struct DetoxProvenance {
  std::string detox_model;
  std::string paraphrase_classifier;
  std::string prompt_hash;
  bool cached = false;
};

struct DetoxResult {
  std::string rewrite;
  std::optional<std::string> explanation;
  Verdict paraphrase_verdict = Verdict::Unknown;
  bool warning = true;
  bool refusal_detected = false;
  bool parse_degraded = false;
  std::optional<double> paraphrase_score;
  std::optional<std::string> gate_error;
  DetoxProvenance provenance;

  // Refusals are left out of reference-mode BLEU.
  bool bleu_evaluable() const { return !refusal_detected; }
  Json ToJson() const;
  static DetoxResult FromJson(const Json& j);
};

enum class Stage { Generate, Parse, Gate };
std::string_view ToString(Stage stage);

class StageError : public Error {
 public:
  StageError(Stage stage, const Error& cause);
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct RuntimeOptions {
  metrics::RefusalLexicon lexicon;
};

// Reentrant; the gateway and factory must outlive it.
class DetoxRuntime {
 public:
  DetoxRuntime(gateway::Gateway& gw, const prompts::PromptFactory& factory, RuntimeOptions options = {});

  prompts::Prompt BuildPrompt(const DetoxRequest& req) const;
  // Only Generate-stage failures escape, as StageError.
  DetoxResult Detoxify(const DetoxRequest& req);
  // Score >= threshold is a paraphrase. Never throws.
  GateResult GateParaphrase(std::string_view source, std::string_view rewrite, std::string_view classifier_id);

 private:
  gateway::Gateway& gw_;
  const prompts::PromptFactory& factory_;
  RuntimeOptions options_;
};

}  // namespace detoxforge::runtime
