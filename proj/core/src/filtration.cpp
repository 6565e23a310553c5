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

#include "detoxforge/filtration.hpp"

#include <algorithm>
#include <set>

namespace detoxforge::filtration {
namespace {

std::vector<std::string> SortedIds(const std::vector<EnsemblePrediction>& preds) {
  std::vector<std::string> ids;
  ids.reserve(preds.size());
  for (const auto& p : preds) ids.push_back(p.classifier_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

struct Outcome {
  std::optional<FilterDecision> decision;
  std::optional<RecordError> error;
};

}  // namespace

std::string_view ToString(Reason reason) {
  switch (reason) {
    case Reason::Kept: return "kept";
    case Reason::SourceNeverToxic: return "source_never_toxic";
    case Reason::TargetSometimesToxic: return "target_sometimes_toxic";
  }
  return "unknown";
}

ErrorPolicy ParseErrorPolicy(std::string_view s) {
  if (s == "abort") return ErrorPolicy::Abort;
  if (s == "skip" || s == "skip-and-log") return ErrorPolicy::SkipAndLog;
  throw Error(Errc::Config, "unknown error policy \"" + std::string(s) + "\"");
}

FilterDecision FilterPair(std::vector<EnsemblePrediction> source_preds,
                          std::vector<EnsemblePrediction> target_preds) {
  if (source_preds.empty() || target_preds.empty()) {
    throw Error(Errc::EmptyEnsemble, "both prediction lists must be non-empty");
  }
  const auto src_ids = SortedIds(source_preds);
  const auto tgt_ids = SortedIds(target_preds);
  if (std::adjacent_find(src_ids.begin(), src_ids.end()) != src_ids.end() || src_ids != tgt_ids) {
    throw Error(Errc::MismatchedEnsembles, "source and target predictions must come from the same classifiers");
  }
  const bool any_source_toxic = std::any_of(source_preds.begin(), source_preds.end(),
                                            [](const auto& p) { return p.verdict == corpus::Label::Toxic; });
  const bool all_target_clean = std::all_of(target_preds.begin(), target_preds.end(),
                                            [](const auto& p) { return p.verdict == corpus::Label::NonToxic; });
  FilterDecision d;
  d.keep = any_source_toxic && all_target_clean;
  d.reason = !any_source_toxic ? Reason::SourceNeverToxic
             : !all_target_clean ? Reason::TargetSometimesToxic
                                 : Reason::Kept;
  d.source_preds = std::move(source_preds);
  d.target_preds = std::move(target_preds);
  return d;
}

PlatformFilterStats& PlatformFilterStats::operator+=(const PlatformFilterStats& o) {
  original += o.original;
  kept += o.kept;
  source_never_toxic += o.source_never_toxic;
  target_sometimes_toxic += o.target_sometimes_toxic;
  errored += o.errored;
  return *this;
}

PlatformFilterStats FilterStats::total() const {
  PlatformFilterStats t;
  for (const auto& [_, s] : per_platform) t += s;
  return t;
}

FilterStats& FilterStats::Merge(const FilterStats& other) {
  for (const auto& [name, s] : other.per_platform) per_platform[name] += s;
  return *this;
}

Json FilterStats::ToJson() const {
  auto row = [](const PlatformFilterStats& s) {
    return Json{{"original", s.original},
                {"filtered", s.kept},
                {"dropped", s.dropped()},
                {"source_never_toxic", s.source_never_toxic},
                {"target_sometimes_toxic", s.target_sometimes_toxic},
                {"errored", s.errored}};
  };
  Json platforms = Json::object();
  for (const auto& [name, s] : per_platform) platforms[name] = row(s);
  return Json{{"platforms", platforms}, {"total", row(total())}};
}

EnsemblePrediction Predict(gateway::Gateway& gw, std::string_view classifier_id, std::string_view text) {
  const auto verdict = gw.Classify(classifier_id, text);
  return EnsemblePrediction{std::string(classifier_id), verdict.positive(gw.endpoint(classifier_id))
                                                            ? corpus::Label::Toxic
                                                            : corpus::Label::NonToxic};
}

FilterResult RunFilter(gateway::Gateway& gw, const std::vector<corpus::ParallelRecord>& records,
                       const std::vector<std::string>& ensemble, const FilterOptions& options) {
  if (ensemble.empty()) throw Error(Errc::EmptyEnsemble, "filter ensemble must name at least one classifier");
  if (std::set<std::string>(ensemble.begin(), ensemble.end()).size() != ensemble.size()) {
    throw Error(Errc::MismatchedEnsembles, "filter ensemble lists a classifier twice");
  }
  for (const auto& id : ensemble) {
    if (gw.endpoint(id).kind != gateway::EndpointKind::Classifier) {
      throw Error(Errc::WrongEndpointKind, "ensemble member " + id + " is not a classifier");
    }
  }

  auto outcomes = OrderedParallelMap<Outcome>(records.size(), std::max(1u, options.jobs), [&](std::size_t i) {
    const auto& r = records[i];
    try {
      std::vector<EnsemblePrediction> src;
      std::vector<EnsemblePrediction> tgt;
      for (const auto& id : ensemble) {
        src.push_back(Predict(gw, id, r.toxic_text()));
        tgt.push_back(Predict(gw, id, r.nontoxic_text()));
      }
      return Outcome{FilterPair(std::move(src), std::move(tgt)), std::nullopt};
    } catch (const Error& e) {
      if (options.policy == ErrorPolicy::Abort) throw Error(e.code(), "record " + r.source.id + ": " + e.message());
      return Outcome{std::nullopt, RecordError{r.source.id, r.source.platform.name(), e.code(), e.message()}};
    }
  });

  FilterResult result;
  result.decisions.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& o = outcomes[i];
    auto& stats = result.stats.per_platform[records[i].source.platform.name()];
    ++stats.original;
    if (o.error) {
      ++stats.errored;
      result.errors.push_back(std::move(*o.error));
    } else if (o.decision->keep) {
      ++stats.kept;
      result.kept.push_back(records[i]);
    } else if (o.decision->reason == Reason::SourceNeverToxic) {
      ++stats.source_never_toxic;
    } else {
      ++stats.target_sometimes_toxic;
    }
    result.decisions.push_back(std::move(o.decision));
  }
  return result;
}

}  // namespace detoxforge::filtration
