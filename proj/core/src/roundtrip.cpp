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

#include "detoxforge/roundtrip.hpp"

#include <variant>

#include "detoxforge/metrics.hpp"

namespace detoxforge::roundtrip {

Json LangReport::ToJson() const {
  return Json{{"language", language},
              {"Toxicity", metrics::Round2(toxicity_pct)},
              {"Non-toxicity", metrics::Round2(nontoxicity_pct)},
              {"Source Sim", metrics::Round2(source_sim)},
              {"Target Sim", metrics::Round2(target_sim)},
              {"n", n},
              {"skipped", skipped}};
}

Json PairAudit::ToJson() const {
  return Json{{"record_id", record_id},
              {"language", language},
              {"source", source},
              {"source_translated", source_translated},
              {"source_back", source_back},
              {"target", target},
              {"target_translated", target_translated},
              {"target_back", target_back},
              {"source_toxic", source_toxic},
              {"target_nontoxic", target_nontoxic},
              {"source_sim", source_sim},
              {"target_sim", target_sim}};
}

RoundtripResult Roundtrip(gateway::Gateway& gw, const std::vector<corpus::ParallelRecord>& pairs,
                          const std::string& language, const RoundtripEndpoints& endpoints,
                          const RoundtripOptions& options) {
  if (pairs.empty()) throw Error(Errc::EmptyBatch, "no pairs to round-trip");
  const auto& translator = gw.endpoint(endpoints.translator);
  if (!translator.language_map.empty() && !translator.language_map.count(language)) {
    throw Error(Errc::UnsupportedLanguage, "translator " + translator.id + " does not support \"" + language + "\"");
  }
  const auto& classifier = gw.endpoint(endpoints.classifier);
  const auto& pivot = options.pivot_language;

  using Outcome = std::variant<PairAudit, PairFailure>;
  auto outcomes = OrderedParallelMap<Outcome>(pairs.size(), std::max(1u, options.jobs), [&](std::size_t i) -> Outcome {
    const auto& p = pairs[i];
    try {
      PairAudit a;
      a.record_id = p.source.id;
      a.language = language;
      a.source = p.toxic_text();
      a.target = p.nontoxic_text();
      a.source_translated = gw.Translate(translator.id, a.source, pivot, language);
      a.source_back = gw.Translate(translator.id, a.source_translated, language, pivot);
      a.target_translated = gw.Translate(translator.id, a.target, pivot, language);
      a.target_back = gw.Translate(translator.id, a.target_translated, language, pivot);
      a.source_toxic = gw.Classify(classifier.id, a.source_back).positive(classifier);
      a.target_nontoxic = !gw.Classify(classifier.id, a.target_back).positive(classifier);
      a.source_sim = metrics::ContentSimilarity(gw.Embed(endpoints.embedder, a.source).values,
                                                gw.Embed(endpoints.embedder, a.source_back).values);
      a.target_sim = metrics::ContentSimilarity(gw.Embed(endpoints.embedder, a.target).values,
                                                gw.Embed(endpoints.embedder, a.target_back).values);
      return a;
    } catch (const Error& e) {
      return PairFailure{p.source.id, e.code(), e.message()};
    }
  });

  RoundtripResult result;
  result.report.language = language;
  std::vector<bool> toxic, nontoxic;
  double src_sim = 0, tgt_sim = 0;
  for (auto& o : outcomes) {
    if (auto* f = std::get_if<PairFailure>(&o)) {
      result.failures.push_back(std::move(*f));
      continue;
    }
    auto& a = std::get<PairAudit>(o);
    toxic.push_back(a.source_toxic);
    nontoxic.push_back(a.target_nontoxic);
    src_sim += a.source_sim;
    tgt_sim += a.target_sim;
    result.audits.push_back(std::move(a));
  }
  result.report.skipped = result.failures.size();
  if (result.audits.empty()) {
    throw Error(Errc::EmptyBatch, "every pair failed during round-trip (" + std::to_string(result.failures.size()) +
                                      " skipped); first failure: " + result.failures.front().message);
  }
  const double n = static_cast<double>(result.audits.size());
  result.report.n = result.audits.size();
  result.report.toxicity_pct = metrics::Rate(toxic);
  result.report.nontoxicity_pct = metrics::Rate(nontoxic);
  result.report.source_sim = src_sim / n;
  result.report.target_sim = tgt_sim / n;

  if (options.audit_path) {
    std::vector<Json> rows;
    for (const auto& a : result.audits) rows.push_back(a.ToJson());
    WriteJsonLines(*options.audit_path, rows);
  }
  return result;
}

}  // namespace detoxforge::roundtrip
