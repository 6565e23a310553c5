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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/corpus.hpp"
#include "detoxforge/util.hpp"

namespace detoxforge::prompts {

enum class TaskKind { ParallelGen, Explanation, ParaphraseLabel, DetoxInstruct, CotDetox, Raw };
enum class Component { Input, Task, Objective, Constraints, ResponseFormat, FewShot };

std::string_view ToString(TaskKind kind);
std::string_view ToString(Component component);
Component ParseComponent(std::string_view name);

struct Segment {
  Component component;
  std::string text;

  bool operator==(const Segment&) const = default;
};

struct DecodingParams {
  double temperature = 0.7;
  std::optional<int> max_tokens;

  bool operator==(const DecodingParams&) const = default;
};

struct Prompt {
  TaskKind task_kind;
  std::vector<Segment> segments;
  std::string rendered;  // concatenation of segment texts, in order
  DecodingParams params_hint;

  // Lowercase hex SHA-256 of `rendered`.
  std::string Hash() const;
};

struct FewShotExemplar {
  std::string input_text;
  std::string output_text;
  std::optional<corpus::ParaphraseLabel> label;
};

std::vector<FewShotExemplar> LoadExemplars(const std::filesystem::path& path);
FewShotExemplar ExemplarFromJson(const Json& j);
Json ToJson(const FewShotExemplar& e);
Json ToJson(const Prompt& p);

// A parsed template file.
//
// Lines starting with "@@ " are directives:
//   @@ template <name> <version>
//   @@ inputs <placeholder>...        placeholders that carry user input
//   @@ segment <component>            starts a segment
//   @@ exemplar                       starts the per-exemplar block
// A segment's text is everything between its directive line and the next
// directive minus its final line break, so a segment that should end in a
// newline is followed by one blank line. Segments and exemplar blocks are
// concatenated without separators. Placeholders are
// {{name}}; the special {{exemplars}} placeholder expands to the rendered
// exemplar blocks. Substitution is single-pass, so substituted values are
// never rescanned.
class Template {
 public:
  static Template Parse(std::string_view text, std::string_view origin);
  static Template Load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  int version() const { return version_; }
  bool has_exemplar_block() const { return exemplar_block_.has_value(); }

  // Throws TemplateError for unresolved placeholders.
  std::vector<Segment> Render(const std::map<std::string, std::string>& vars,
                              const std::vector<std::map<std::string, std::string>>& exemplars) const;

 private:
  std::string name_;
  int version_ = 0;
  std::vector<std::string> inputs_;
  std::vector<Segment> segments_;
  std::optional<std::string> exemplar_block_;
};

// Single-pass {{name}} substitution. Throws TemplateError naming the first
// placeholder without a binding.
std::string Substitute(std::string_view text, const std::map<std::string, std::string>& vars,
                       std::string_view origin);

struct PromptOptions {
  double generation_temperature = 0.7;  // ParallelGen, Explanation, detox prompts
  double label_temperature = 0.0;       // ParaphraseLabel
};

// Loads templates/{parallel_gen,explanation,paraphrase,detox_0shot,
// detox_3shot,cot_detox}.txt once; afterwards every Build* call is pure.
class PromptFactory {
 public:
  explicit PromptFactory(const std::filesystem::path& template_dir, PromptOptions options = {});

  Prompt BuildParallelPrompt(std::string_view input_text, corpus::Label source_label) const;
  Prompt BuildExplanationPrompt(std::string_view toxic_text) const;
  Prompt BuildParaphrasePrompt(std::string_view toxic_text, std::string_view nontoxic_text,
                               const std::vector<FewShotExemplar>& fewshots) const;
  Prompt BuildDetoxInstructionPrompt(std::string_view input_text, int shots,
                                     const std::vector<FewShotExemplar>& exemplars) const;
  Prompt BuildCotDetoxPrompt(std::string_view input_text) const;
  // The bare input, for models finetuned on direct toxic -> non-toxic pairs.
  Prompt BuildRawPrompt(std::string_view input_text) const;

  static constexpr std::size_t kParaphraseShots = 5;

 private:
  Prompt Assemble(TaskKind kind, std::vector<Segment> segments, double temperature) const;

  PromptOptions options_;
  Template parallel_gen_;
  Template explanation_;
  Template paraphrase_;
  Template detox_0shot_;
  Template detox_3shot_;
  Template cot_detox_;
};

}  // namespace detoxforge::prompts
