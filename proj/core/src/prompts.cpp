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

#include "detoxforge/prompts.hpp"

#include <algorithm>
#include <sstream>

#include "detoxforge/error.hpp"

namespace detoxforge::prompts {
namespace {

bool IsPlaceholderChar(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

// Yields (position, length, name) for every well-formed {{name}} in text.
template <typename Fn>
void ScanPlaceholders(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i + 1 < text.size()) {
    if (text[i] == '{' && text[i + 1] == '{') {
      std::size_t j = i + 2;
      while (j < text.size() && IsPlaceholderChar(text[j])) ++j;
      if (j > i + 2 && j + 1 < text.size() && text[j] == '}' && text[j + 1] == '}') {
        fn(i, j + 2 - i, text.substr(i + 2, j - i - 2));
        i = j + 2;
        continue;
      }
    }
    ++i;
  }
}

std::size_t CountPlaceholder(std::string_view text, std::string_view name) {
  std::size_t n = 0;
  ScanPlaceholders(text, [&](std::size_t, std::size_t, std::string_view found) {
    if (found == name) ++n;
  });
  return n;
}

void RequireInput(std::string_view text, std::string_view what) {
  if (Trim(text).empty()) throw Error(Errc::EmptyInput, std::string(what) + " must be non-empty");
}

std::string StyleName(corpus::Label label) { return label == corpus::Label::Toxic ? "toxic" : "non-toxic"; }

}  // namespace

std::string_view ToString(TaskKind kind) {
  switch (kind) {
    case TaskKind::ParallelGen: return "parallel_gen";
    case TaskKind::Explanation: return "explanation";
    case TaskKind::ParaphraseLabel: return "paraphrase_label";
    case TaskKind::DetoxInstruct: return "detox_instruct";
    case TaskKind::CotDetox: return "cot_detox";
    case TaskKind::Raw: return "raw";
  }
  return "unknown";
}

std::string_view ToString(Component component) {
  switch (component) {
    case Component::Input: return "input";
    case Component::Task: return "task";
    case Component::Objective: return "objective";
    case Component::Constraints: return "constraints";
    case Component::ResponseFormat: return "response_format";
    case Component::FewShot: return "few_shot";
  }
  return "unknown";
}

Component ParseComponent(std::string_view name) {
  for (auto c : {Component::Input, Component::Task, Component::Objective, Component::Constraints,
                 Component::ResponseFormat, Component::FewShot}) {
    if (ToString(c) == name) return c;
  }
  throw Error(Errc::TemplateError, "unknown segment component \"" + std::string(name) + "\"");
}

std::string Prompt::Hash() const { return Sha256Hex(rendered); }

FewShotExemplar ExemplarFromJson(const Json& j) {
  FewShotExemplar e{j.at("input_text").get<std::string>(), j.at("output_text").get<std::string>(),
                    std::nullopt};
  if (j.contains("label") && !j["label"].is_null()) {
    e.label = corpus::ParseParaphraseLabel(j["label"].get<std::string>());
  }
  if (Trim(e.input_text).empty() || Trim(e.output_text).empty()) {
    throw Error(Errc::EmptyInput, "few-shot exemplar texts must be non-empty");
  }
  return e;
}

Json ToJson(const FewShotExemplar& e) {
  Json j{{"input_text", e.input_text}, {"output_text", e.output_text}};
  j["label"] = e.label ? Json(corpus::ToString(*e.label)) : Json(nullptr);
  return j;
}

Json ToJson(const Prompt& p) {
  Json segments = Json::array();
  for (const auto& s : p.segments) segments.push_back({{"component", ToString(s.component)}, {"text", s.text}});
  Json params{{"temperature", p.params_hint.temperature}};
  if (p.params_hint.max_tokens) params["max_tokens"] = *p.params_hint.max_tokens;
  return Json{{"task_kind", ToString(p.task_kind)},
              {"segments", segments},
              {"rendered", p.rendered},
              {"params_hint", params},
              {"hash", p.Hash()}};
}

std::vector<FewShotExemplar> LoadExemplars(const std::filesystem::path& path) {
  std::vector<FewShotExemplar> out;
  for (const auto& row : ReadJsonLines(path)) {
    try {
      out.push_back(ExemplarFromJson(row));
    } catch (const Json::exception& e) {
      throw Error(Errc::Config, path.string() + ": " + e.what());
    }
  }
  return out;
}

std::string Substitute(std::string_view text, const std::map<std::string, std::string>& vars,
                       std::string_view origin) {
  std::string out;
  out.reserve(text.size());
  std::size_t copied = 0;
  ScanPlaceholders(text, [&](std::size_t pos, std::size_t len, std::string_view name) {
    auto it = vars.find(std::string(name));
    if (it == vars.end()) {
      throw Error(Errc::TemplateError,
                  std::string(origin) + ": unresolved placeholder {{" + std::string(name) + "}}");
    }
    out.append(text.substr(copied, pos - copied));
    out.append(it->second);
    copied = pos + len;
  });
  out.append(text.substr(copied));
  return out;
}

Template Template::Parse(std::string_view text, std::string_view origin) {
  Template t;
  const std::string where(origin);

  struct Block {
    bool is_exemplar;
    Component component;
    std::string body;
  };
  std::vector<Block> blocks;
  Block* current = nullptr;

  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    std::string_view line = text.substr(pos, last ? std::string_view::npos : nl - pos);
    ++lineno;
    if (line.rfind("@@ ", 0) == 0) {
      std::istringstream words{std::string(line.substr(3))};
      std::string directive;
      words >> directive;
      if (directive == "template") {
        words >> t.name_ >> t.version_;
        if (t.name_.empty() || t.version_ <= 0) {
          throw Error(Errc::TemplateError, where + ":" + std::to_string(lineno) + ": bad template directive");
        }
        current = nullptr;
      } else if (directive == "inputs") {
        std::string name;
        while (words >> name) t.inputs_.push_back(name);
        current = nullptr;
      } else if (directive == "segment") {
        std::string component;
        words >> component;
        blocks.push_back(Block{false, ParseComponent(component), {}});
        current = &blocks.back();
      } else if (directive == "exemplar") {
        blocks.push_back(Block{true, Component::FewShot, {}});
        current = &blocks.back();
      } else {
        throw Error(Errc::TemplateError,
                    where + ":" + std::to_string(lineno) + ": unknown directive \"" + directive + "\"");
      }
    } else if (current != nullptr) {
      current->body.append(line);
      if (!last) current->body.push_back('\n');
    } else if (!Trim(line).empty()) {
      throw Error(Errc::TemplateError, where + ":" + std::to_string(lineno) + ": text outside a segment");
    }
    if (last) break;
    pos = nl + 1;
  }

  for (auto& b : blocks) {
    if (!b.body.empty() && b.body.back() == '\n') b.body.pop_back();
    if (b.is_exemplar) {
      if (t.exemplar_block_) throw Error(Errc::TemplateError, where + ": more than one exemplar block");
      t.exemplar_block_ = std::move(b.body);
    } else {
      t.segments_.push_back(Segment{b.component, std::move(b.body)});
    }
  }
  if (t.name_.empty()) throw Error(Errc::TemplateError, where + ": missing '@@ template' directive");
  if (t.inputs_.empty()) throw Error(Errc::TemplateError, where + ": missing '@@ inputs' directive");

  for (const auto& input : t.inputs_) {
    std::size_t total = t.exemplar_block_ ? CountPlaceholder(*t.exemplar_block_, input) : 0;
    std::size_t in_input = 0;
    for (const auto& s : t.segments_) {
      const auto n = CountPlaceholder(s.text, input);
      total += n;
      if (s.component == Component::Input) in_input += n;
    }
    if (total != 1 || in_input != 1) {
      throw Error(Errc::TemplateError,
                  where + ": input placeholder {{" + input + "}} must appear exactly once, in the input segment");
    }
  }
  for (const auto& s : t.segments_) {
    if (CountPlaceholder(s.text, "exemplars") > 0 &&
        (s.component != Component::FewShot || !t.exemplar_block_)) {
      throw Error(Errc::TemplateError, where + ": {{exemplars}} needs an exemplar block and a few_shot segment");
    }
  }
  return t;
}

Template Template::Load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::TemplateError, "missing template " + path.string());
  return Parse(ReadFile(path), path.string());
}

std::vector<Segment> Template::Render(const std::map<std::string, std::string>& vars,
                                      const std::vector<std::map<std::string, std::string>>& exemplars) const {
  auto bound = vars;
  if (exemplar_block_) {
    std::string joined;
    for (const auto& ex : exemplars) joined += Substitute(*exemplar_block_, ex, name_ + " exemplar");
    bound["exemplars"] = std::move(joined);
  }
  std::vector<Segment> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) out.push_back(Segment{s.component, Substitute(s.text, bound, name_)});
  return out;
}

PromptFactory::PromptFactory(const std::filesystem::path& dir, PromptOptions options)
    : options_(options),
      parallel_gen_(Template::Load(dir / "parallel_gen.txt")),
      explanation_(Template::Load(dir / "explanation.txt")),
      paraphrase_(Template::Load(dir / "paraphrase.txt")),
      detox_0shot_(Template::Load(dir / "detox_0shot.txt")),
      detox_3shot_(Template::Load(dir / "detox_3shot.txt")),
      cot_detox_(Template::Load(dir / "cot_detox.txt")) {
  std::vector<Component> kinds;
  for (const auto& s : parallel_gen_.Render({{"input", "x"}, {"source_style", "x"}, {"target_style", "x"}}, {})) {
    kinds.push_back(s.component);
  }
  std::vector<Component> sorted = kinds;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<Component> required = {Component::Input, Component::Task, Component::Objective,
                                           Component::Constraints, Component::ResponseFormat};
  if (sorted != required) {
    throw Error(Errc::TemplateError,
                "parallel_gen.txt must contain input, task, objective, constraints and response_format "
                "segments exactly once");
  }
  if (!paraphrase_.has_exemplar_block() || !detox_3shot_.has_exemplar_block()) {
    throw Error(Errc::TemplateError, "paraphrase.txt and detox_3shot.txt need an exemplar block");
  }
}

Prompt PromptFactory::Assemble(TaskKind kind, std::vector<Segment> segments, double temperature) const {
  Prompt p{kind, std::move(segments), {}, DecodingParams{temperature, std::nullopt}};
  for (const auto& s : p.segments) p.rendered += s.text;
  return p;
}

Prompt PromptFactory::BuildParallelPrompt(std::string_view input_text, corpus::Label source_label) const {
  RequireInput(input_text, "input_text");
  auto segments = parallel_gen_.Render({{"input", std::string(input_text)},
                                        {"source_style", StyleName(source_label)},
                                        {"target_style", StyleName(corpus::Opposite(source_label))}},
                                       {});
  return Assemble(TaskKind::ParallelGen, std::move(segments), options_.generation_temperature);
}

Prompt PromptFactory::BuildExplanationPrompt(std::string_view toxic_text) const {
  RequireInput(toxic_text, "toxic_text");
  return Assemble(TaskKind::Explanation, explanation_.Render({{"input", std::string(toxic_text)}}, {}),
                  options_.generation_temperature);
}

Prompt PromptFactory::BuildParaphrasePrompt(std::string_view toxic_text, std::string_view nontoxic_text,
                                            const std::vector<FewShotExemplar>& fewshots) const {
  RequireInput(toxic_text, "toxic text");
  RequireInput(nontoxic_text, "non-toxic text");
  if (fewshots.size() != kParaphraseShots) {
    throw Error(Errc::BadFewShotCount, "paraphrase labeling needs exactly 5 exemplars, got " +
                                           std::to_string(fewshots.size()));
  }
  std::vector<std::map<std::string, std::string>> blocks;
  for (std::size_t i = 0; i < fewshots.size(); ++i) {
    const auto& ex = fewshots[i];
    if (!ex.label) throw Error(Errc::BadFewShotCount, "paraphrase exemplar " + std::to_string(i + 1) + " has no label");
    blocks.push_back({{"exemplar_input", ex.input_text},
                      {"exemplar_output", ex.output_text},
                      {"exemplar_label", std::string(corpus::ToString(*ex.label))},
                      {"exemplar_index", std::to_string(i + 1)}});
  }
  auto segments = paraphrase_.Render(
      {{"toxic", std::string(toxic_text)}, {"nontoxic", std::string(nontoxic_text)}}, blocks);
  return Assemble(TaskKind::ParaphraseLabel, std::move(segments), options_.label_temperature);
}

Prompt PromptFactory::BuildDetoxInstructionPrompt(std::string_view input_text, int shots,
                                                  const std::vector<FewShotExemplar>& exemplars) const {
  RequireInput(input_text, "input_text");
  if (shots != 0 && shots != 3) {
    throw Error(Errc::ExemplarCountMismatch, "shots must be 0 or 3, got " + std::to_string(shots));
  }
  if (exemplars.size() != static_cast<std::size_t>(shots)) {
    throw Error(Errc::ExemplarCountMismatch, std::to_string(shots) + "-shot prompt given " +
                                                 std::to_string(exemplars.size()) + " exemplars");
  }
  const auto& tmpl = shots == 0 ? detox_0shot_ : detox_3shot_;
  std::vector<std::map<std::string, std::string>> blocks;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    blocks.push_back({{"exemplar_input", exemplars[i].input_text},
                      {"exemplar_output", exemplars[i].output_text},
                      {"exemplar_index", std::to_string(i + 1)}});
  }
  return Assemble(TaskKind::DetoxInstruct, tmpl.Render({{"input", std::string(input_text)}}, blocks),
                  options_.generation_temperature);
}

Prompt PromptFactory::BuildCotDetoxPrompt(std::string_view input_text) const {
  RequireInput(input_text, "input_text");
  return Assemble(TaskKind::CotDetox, cot_detox_.Render({{"input", std::string(input_text)}}, {}),
                  options_.generation_temperature);
}

Prompt PromptFactory::BuildRawPrompt(std::string_view input_text) const {
  RequireInput(input_text, "input_text");
  return Assemble(TaskKind::Raw, {Segment{Component::Input, std::string(input_text)}},
                  options_.generation_temperature);
}

}  // namespace detoxforge::prompts
