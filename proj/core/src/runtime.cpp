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

#include "detoxforge/runtime.hpp"

namespace detoxforge::runtime {
namespace {

std::size_t FindCaseInsensitive(std::string_view hay, std::string_view needle, std::size_t from = 0) {
  const auto lower_hay = ToLowerAscii(hay);
  const auto lower_needle = ToLowerAscii(needle);
  return lower_hay.find(lower_needle, from);
}

}  // namespace

std::string_view ToString(DetoxMode mode) {
  switch (mode) {
    case DetoxMode::Vanilla: return "vanilla";
    case DetoxMode::Prompted: return "prompted";
    case DetoxMode::CotExpl: return "cot_expl";
  }
  return "unknown";
}

DetoxMode ParseDetoxMode(std::string_view s) {
  const auto lower = ToLowerAscii(s);
  if (lower == "vanilla") return DetoxMode::Vanilla;
  if (lower == "prompted" || lower == "prompt") return DetoxMode::Prompted;
  if (lower == "cot_expl" || lower == "cot-expl" || lower == "cotexpl") return DetoxMode::CotExpl;
  throw Error(Errc::BadInput, "unknown detox mode \"" + std::string(s) + "\"");
}

std::string_view ToString(Verdict v) {
  switch (v) {
    case Verdict::Paraphrase: return "paraphrase";
    case Verdict::NonParaphrase: return "non_paraphrase";
    case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

Verdict ParseVerdict(std::string_view s) {
  for (auto v : {Verdict::Paraphrase, Verdict::NonParaphrase, Verdict::Unknown}) {
    if (ToString(v) == s) return v;
  }
  throw Error(Errc::BadInput, "unknown paraphrase verdict \"" + std::string(s) + "\"");
}

std::string_view ToString(Stage stage) {
  switch (stage) {
    case Stage::Generate: return "generate";
    case Stage::Parse: return "parse";
    case Stage::Gate: return "gate";
  }
  return "unknown";
}

StageError::StageError(Stage stage, const Error& cause)
    : Error(cause.code(), std::string(ToString(stage)) + " stage: " + cause.message()), stage_(stage) {}

void DetoxRequest::Validate() const {
  if (Trim(text).empty()) throw Error(Errc::BadInput, "text must be non-empty");
  if (endpoints.detox_model.empty()) throw Error(Errc::BadInput, "detox_model endpoint is required");
  if (endpoints.paraphrase_classifier.empty()) throw Error(Errc::BadInput, "paraphrase_classifier endpoint is required");
}

DetoxRequest DetoxRequest::FromJson(const Json& j) {
  DetoxRequest r;
  try {
    r.text = j.at("text").get<std::string>();
    r.mode = ParseDetoxMode(j.value("mode", std::string("cot_expl")));
    const auto& e = j.at("endpoints");
    r.endpoints.detox_model = e.at("detox_model").get<std::string>();
    r.endpoints.paraphrase_classifier = e.at("paraphrase_classifier").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(Errc::BadInput, std::string("bad detox request: ") + e.what());
  }
  r.Validate();
  return r;
}

Json DetoxRequest::ToJson() const {
  return Json{{"text", text},
              {"mode", runtime::ToString(mode)},
              {"endpoints",
               {{"detox_model", endpoints.detox_model}, {"paraphrase_classifier", endpoints.paraphrase_classifier}}}};
}

ParsedOutput ParseCotStrict(std::string_view raw) {
  const auto exp = FindCaseInsensitive(raw, kExplanationLabel);
  if (exp == std::string::npos) throw Error(Errc::ParseError, "missing \"Explanation:\" block");
  if (!Trim(raw.substr(0, exp)).empty()) throw Error(Errc::ParseError, "text before \"Explanation:\" block");
  const auto body = exp + kExplanationLabel.size();
  const auto rw = FindCaseInsensitive(raw, kRewriteLabel, body);
  if (rw == std::string::npos) {
    const bool earlier = FindCaseInsensitive(raw, kRewriteLabel) != std::string::npos;
    throw Error(Errc::ParseError, earlier ? "\"Non-toxic:\" block precedes \"Explanation:\""
                                          : "missing \"Non-toxic:\" block");
  }
  ParsedOutput out;
  out.explanation = Trim(raw.substr(body, rw - body));
  out.rewrite = Trim(raw.substr(rw + kRewriteLabel.size()));
  if (out.explanation->empty()) out.explanation.reset();
  return out;
}

ParsedOutput ParseModelOutput(std::string_view raw, DetoxMode mode) {
  if (mode == DetoxMode::CotExpl) {
    try {
      return ParseCotStrict(raw);
    } catch (const Error&) {
      return ParsedOutput{std::nullopt, Trim(raw), true};
    }
  }
  return ParsedOutput{std::nullopt, Trim(raw), false};
}

Json DetoxResult::ToJson() const {
  Json j{{"rewrite", rewrite},
         {"explanation", explanation ? Json(*explanation) : Json(nullptr)},
         {"paraphrase_verdict", runtime::ToString(paraphrase_verdict)},
         {"warning", warning},
         {"refusal_detected", refusal_detected},
         {"parse_degraded", parse_degraded},
         {"bleu_evaluable", bleu_evaluable()},
         {"provenance",
          {{"detox_model", provenance.detox_model},
           {"paraphrase_classifier", provenance.paraphrase_classifier},
           {"prompt_hash", provenance.prompt_hash},
           {"cached", provenance.cached}}}};
  j["paraphrase_score"] = paraphrase_score ? Json(*paraphrase_score) : Json(nullptr);
  if (gate_error) j["gate_error"] = *gate_error;
  return j;
}

DetoxResult DetoxResult::FromJson(const Json& j) {
  DetoxResult r;
  r.rewrite = j.at("rewrite").get<std::string>();
  if (!j.at("explanation").is_null()) r.explanation = j["explanation"].get<std::string>();
  r.paraphrase_verdict = ParseVerdict(j.at("paraphrase_verdict").get<std::string>());
  r.warning = j.at("warning").get<bool>();
  r.refusal_detected = j.at("refusal_detected").get<bool>();
  r.parse_degraded = j.value("parse_degraded", false);
  if (j.contains("paraphrase_score") && !j["paraphrase_score"].is_null()) {
    r.paraphrase_score = j["paraphrase_score"].get<double>();
  }
  if (j.contains("gate_error")) r.gate_error = j["gate_error"].get<std::string>();
  const auto& p = j.at("provenance");
  r.provenance = DetoxProvenance{p.at("detox_model").get<std::string>(), p.at("paraphrase_classifier").get<std::string>(),
                                 p.at("prompt_hash").get<std::string>(), p.value("cached", false)};
  return r;
}

DetoxRuntime::DetoxRuntime(gateway::Gateway& gw, const prompts::PromptFactory& factory, RuntimeOptions options)
    : gw_(gw), factory_(factory), options_(std::move(options)) {}

prompts::Prompt DetoxRuntime::BuildPrompt(const DetoxRequest& req) const {
  switch (req.mode) {
    case DetoxMode::Vanilla: return factory_.BuildRawPrompt(req.text);
    case DetoxMode::Prompted: return factory_.BuildDetoxInstructionPrompt(req.text, 0, {});
    case DetoxMode::CotExpl: return factory_.BuildCotDetoxPrompt(req.text);
  }
  throw Error(Errc::BadInput, "unknown detox mode");
}

GateResult DetoxRuntime::GateParaphrase(std::string_view source, std::string_view rewrite,
                                        std::string_view classifier_id) {
  GateResult g;
  try {
    const auto& spec = gw_.endpoint(classifier_id);
    const auto verdict = gw_.Classify(classifier_id, source, rewrite);
    g.score = verdict.score;
    g.verdict = verdict.score >= spec.threshold ? Verdict::Paraphrase : Verdict::NonParaphrase;
  } catch (const std::exception& e) {
    g.verdict = Verdict::Unknown;
    g.error = e.what();
  }
  g.warning = g.verdict != Verdict::Paraphrase;
  return g;
}

DetoxResult DetoxRuntime::Detoxify(const DetoxRequest& req) {
  req.Validate();
  prompts::Prompt prompt;
  gateway::Completion completion;
  try {
    prompt = BuildPrompt(req);
    completion = gw_.Complete(req.endpoints.detox_model, prompt);
  } catch (const Error& e) {
    throw StageError(Stage::Generate, e);
  }

  auto parsed = ParseModelOutput(completion.text, req.mode);
  DetoxResult r;
  r.rewrite = std::move(parsed.rewrite);
  r.explanation = std::move(parsed.explanation);
  r.parse_degraded = parsed.parse_degraded;
  r.refusal_detected = Trim(r.rewrite).empty() || metrics::DetectRefusal(r.rewrite, options_.lexicon);

  const auto gate = GateParaphrase(req.text, r.rewrite, req.endpoints.paraphrase_classifier);
  r.paraphrase_verdict = gate.verdict;
  r.warning = gate.warning;
  r.paraphrase_score = gate.score;
  r.gate_error = gate.error;
  r.provenance = DetoxProvenance{req.endpoints.detox_model, req.endpoints.paraphrase_classifier, prompt.Hash(),
                                 completion.cached};
  return r;
}

}  // namespace detoxforge::runtime
