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

#include "detoxforge/evaluation.hpp"


#include "detoxforge/error.hpp"

namespace detoxforge::metrics {
namespace {

struct ItemScores {
  bool non_toxic = false;
  bool fluent = false;
  double sim = 0;
  double bertscore = 0;
  bool refusal = false;
};

double Mean(const std::vector<double>& xs) {
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

}  // namespace

std::string_view ToString(BleuMode mode) { return mode == BleuMode::Self ? "self" : "reference"; }

BleuMode ParseBleuMode(std::string_view s) {
  if (s == "self") return BleuMode::Self;
  if (s == "reference") return BleuMode::Reference;
  throw Error(Errc::Config, "unknown BLEU mode \"" + std::string(s) + "\"");
}

EvalItem EvalItemFromJson(const Json& j) {
  EvalItem item;
  try {
    item.platform = j.at("platform").get<std::string>();
    item.source = j.at("source").get<std::string>();
    item.hypothesis = j.at("hypothesis").get<std::string>();
    if (j.contains("reference") && !j["reference"].is_null()) item.reference = j["reference"].get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(Errc::BadInput, std::string("bad evaluation item: ") + e.what());
  }
  if (item.platform.empty()) throw Error(Errc::BadInput, "evaluation item has an empty platform");
  return item;
}

std::vector<EvalItem> LoadEvalItems(const std::filesystem::path& path) {
  std::vector<EvalItem> items;
  std::size_t line = 0;
  for (const auto& row : ReadJsonLines(path)) {
    ++line;
    try {
      items.push_back(EvalItemFromJson(row));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + " row " + std::to_string(line) + ": " + e.message());
    }
  }
  return items;
}

EvalEndpoints EvalEndpoints::FromJson(const Json& j) {
  try {
    return EvalEndpoints{j.at("style").get<std::string>(), j.at("fluency").get<std::string>(),
                         j.at("sim").get<std::string>(), j.at("bertscore").get<std::string>()};
  } catch (const Json::exception& e) {
    throw Error(Errc::Config, std::string("evaluation endpoints need style, fluency, sim and bertscore: ") + e.what());
  }
}

Json EvalEndpoints::ToJson() const {
  return Json{{"style", style_classifier}, {"fluency", fluency_classifier}, {"sim", sim_embedder},
              {"bertscore", bertscore_embedder}};
}

Json EvalReport::ToJson() const {
  Json rows = Json::array();
  for (const auto& r : platforms) {
    auto j = metrics::ToJson(r);
    if (auto it = bleu_counts.find(r.platform); it != bleu_counts.end()) {
      j["bleu_pairs"] = it->second.pairs;
      j["refusals_excluded"] = it->second.refusals_excluded;
    }
    rows.push_back(std::move(j));
  }
  return Json{{"bleu_mode", metrics::ToString(bleu_mode)}, {"platforms", rows}, {"overall", metrics::ToJson(overall)}};
}

std::string EvalReport::ToTable() const {
  auto rows = platforms;
  rows.push_back(overall);
  return FormatTable(rows);
}

EvalReport Evaluate(gateway::Gateway& gw, const std::vector<EvalItem>& items, const EvalEndpoints& endpoints,
                    const EvalOptions& options) {
  if (items.empty()) throw Error(Errc::Empty, "nothing to evaluate");
  if (options.bleu_mode == BleuMode::Reference) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!items[i].reference) {
        throw Error(Errc::BadInput, "item " + std::to_string(i) + " has no reference for reference-mode BLEU");
      }
    }
  }
  const auto& style = gw.endpoint(endpoints.style_classifier);
  const auto& fluency = gw.endpoint(endpoints.fluency_classifier);

  auto scores = OrderedParallelMap<ItemScores>(items.size(), std::max(1u, options.jobs), [&](std::size_t i) {
    const auto& it = items[i];
    ItemScores s;
    s.non_toxic = !gw.Classify(style.id, it.hypothesis).positive(style);
    s.fluent = gw.Classify(fluency.id, it.hypothesis).positive(fluency);
    s.sim = ContentSimilarity(gw.Embed(endpoints.sim_embedder, it.source).values,
                              gw.Embed(endpoints.sim_embedder, it.hypothesis).values);
    s.bertscore = ContentSimilarity(gw.Embed(endpoints.bertscore_embedder, it.source).values,
                                    gw.Embed(endpoints.bertscore_embedder, it.hypothesis).values);
    s.refusal = DetectRefusal(it.hypothesis, options.lexicon);
    return s;
  });

  struct Bucket {
    std::vector<bool> non_toxic, fluent;
    std::vector<double> sim, bertscore;
    std::vector<std::string> hyps, refs;
    PlatformBleuCounts counts;
  };
  std::map<std::string, Bucket> buckets;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& b = buckets[items[i].platform];
    const auto& s = scores[i];
    b.non_toxic.push_back(s.non_toxic);
    b.fluent.push_back(s.fluent);
    b.sim.push_back(s.sim);
    b.bertscore.push_back(s.bertscore);
    if (options.bleu_mode == BleuMode::Reference) {
      if (s.refusal) {
        ++b.counts.refusals_excluded;
        continue;
      }
      b.refs.push_back(*items[i].reference);
    } else {
      b.refs.push_back(items[i].source);
    }
    b.hyps.push_back(items[i].hypothesis);
    ++b.counts.pairs;
  }

  EvalReport report;
  report.bleu_mode = options.bleu_mode;
  for (auto& [name, b] : buckets) {
    PlatformReport r;
    r.platform = name;
    r.acc = StyleAccuracy(b.non_toxic);
    r.fluency = FluencyRate(b.fluent);
    r.sim = Mean(b.sim);
    r.bertscore = Mean(b.bertscore);
    r.joint = JointMetric(r.acc, r.sim, r.fluency);
    r.bleu = b.hyps.empty() ? 0.0 : Bleu(b.hyps, b.refs, options.bleu);
    r.n = b.non_toxic.size();
    report.platforms.push_back(r);
    report.bleu_counts[name] = b.counts;
  }
  report.overall = AggregateOverall(report.platforms);
  return report;
}

}  // namespace detoxforge::metrics
