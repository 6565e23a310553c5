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

// detoxforge: command-line front end for the pipeline stages and the review
// service.
//
// Exit codes: 0 ok, 1 usage, 2 config, 3 remote, 4 data.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <pthread.h>
#include <set>
#include <string>
#include <vector>

#include "detoxforge/adversarial.hpp"
#include "detoxforge/corpus.hpp"
#include "detoxforge/error.hpp"
#include "detoxforge/evaluation.hpp"
#include "detoxforge/filtration.hpp"
#include "detoxforge/gateway.hpp"
#include "detoxforge/prompts.hpp"
#include "detoxforge/roundtrip.hpp"
#include "detoxforge/runtime.hpp"
#include "detoxforge/service.hpp"
#include "detoxforge/util.hpp"

namespace fs = std::filesystem;
using namespace detoxforge;

namespace {

constexpr int kExitUsage = 1;
constexpr std::string_view kAckFlag = "--i-understand-offensive-content";

struct Globals {
  std::string endpoints;
  std::string data_root = "data";
  std::string cache_dir = ".detoxforge-cache";
  std::string gateway_mode = "live";
  std::string templates;
  bool dry_run = false;
  unsigned jobs = 1;
  bool acknowledged = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string EnvOr(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

// First existing candidate: an explicit flag, $DETOXFORGE_SHARE, the source
// tree and the install prefix.
fs::path ShareDir(std::string_view sub) {
  std::vector<fs::path> roots;
  if (const char* env = std::getenv("DETOXFORGE_SHARE"); env && *env) roots.emplace_back(env);
  roots.emplace_back(DETOXFORGE_SOURCE_SHARE);
  roots.emplace_back(DETOXFORGE_INSTALL_SHARE);
  for (const auto& r : roots) {
    if (fs::exists(r / sub)) return r / sub;
  }
  throw Error(Errc::Config, "cannot locate shared directory \"" + std::string(sub) + "\"; set DETOXFORGE_SHARE");
}

fs::path TemplateDir(const Globals& g) {
  if (!g.templates.empty()) return g.templates;
  if (const char* env = std::getenv("DETOXFORGE_TEMPLATES"); env && *env) return env;
  return ShareDir("templates");
}

std::unique_ptr<gateway::Gateway> MakeGateway(const Globals& g) {
  const std::string path = g.endpoints.empty() ? EnvOr("DETOXFORGE_ENDPOINTS", "endpoints.json") : g.endpoints;
  if (!fs::exists(path)) throw Error(Errc::Config, "endpoints file not found: " + path);
  gateway::GatewayOptions opts;
  opts.mode = gateway::ParseMode(g.gateway_mode);
  opts.cache_dir = g.cache_dir;
  return std::make_unique<gateway::Gateway>(gateway::LoadEndpoints(path), opts);
}

void Log(std::string_view msg) { std::cerr << "detoxforge: " << msg << '\n'; }

// Writes to `path`, or stdout when empty or "-".
void Emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    std::cout.flush();
    return;
  }
  AtomicWriteFile(path, contents);
}

std::string JsonLines(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

void RequireAck(const Globals& g, std::string_view what) {
  if (!g.acknowledged) {
    throw UsageError(std::string(what) + " writes offensive content; pass " + std::string(kAckFlag) + " to proceed");
  }
}

// A skipped record: logged by id only, never by text.
struct Skip {
  std::string id;
  Errc code;
  std::string message;
};

int ReportSkips(const std::vector<Skip>& skips, std::size_t total) {
  for (const auto& s : skips) Log("skipped " + s.id + ": " + std::string(ToString(s.code)) + ": " + s.message);
  if (skips.empty()) return 0;
  Log(std::to_string(skips.size()) + " of " + std::to_string(total) + " records skipped");
  return ExitClassFor(skips.front().code);
}

// Dry-run plan line for one prompt. The input text is replaced by a mask
// unless offensive content was acknowledged.
Json PlanLine(std::string_view id, const prompts::Prompt& real, const prompts::Prompt& masked, bool ack) {
  return Json{{"id", id},
              {"task_kind", prompts::ToString(real.task_kind)},
              {"prompt_hash", real.Hash()},
              {"temperature", real.params_hint.temperature},
              {"rendered", ack ? real.rendered : masked.rendered}};
}

const std::string kMask(adversarial::kRedactionMask);

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string platform;
  std::string input;
  std::string format = "csv";
  std::string text_field = "text";
  std::string label_field = "label";
  std::string id_field;
  std::string labels;
  std::int64_t cap = 3000;
  std::uint64_t seed = 0;
  std::vector<double> ratios = {0.8, 0.1, 0.1};
};

int RunIngest(const Globals& g, const IngestArgs& a) {
  corpus::PlatformTag::Register(a.platform);
  const auto platform = corpus::PlatformTag::Parse(a.platform);
  corpus::SourceSchema schema;
  schema.format = corpus::ParseSourceFormat(a.format);
  schema.text_field = a.text_field;
  schema.label_field = a.label_field;
  schema.id_field = a.id_field;
  const auto labels =
      (a.labels.empty() ? corpus::LabelMap() : corpus::LabelMap::Load(a.labels)).WithIdentity();
  auto read = corpus::ReadSourceDump(a.input, schema, platform, labels);
  if (read.skipped_empty > 0) Log(std::to_string(read.skipped_empty) + " empty rows skipped");
  const corpus::SplitRatios ratios{a.ratios.at(0), a.ratios.at(1), a.ratios.at(2)};
  const std::size_t incoming = read.samples.size();
  auto result = corpus::Ingest(platform, std::move(read.samples), a.cap, a.seed, ratios);
  if (g.dry_run) {
    std::cout << Json{{"platform", platform.name()},
                      {"incoming", incoming},
                      {"kept", result.samples.size()},
                      {"toxic", result.manifest.counts.toxic},
                      {"nontoxic", result.manifest.counts.nontoxic},
                      {"store", (fs::path(g.data_root) / platform.name()).string()}}
                     .dump()
              << '\n';
    return 0;
  }
  RequireAck(g, "ingest");
  const auto manifest = corpus::CorpusStore(g.data_root).Write(result);
  std::cout << corpus::SerializeManifest(manifest) << '\n';
  return 0;
}

// ---------------------------------------------------------------- generate-parallel

struct GenerateArgs {
  std::string platform;
  std::string endpoint;
  std::string split = "all";
  std::uint64_t seed = 0;
  std::size_t limit = 0;
  std::string out;
};

std::vector<corpus::TextSample> SelectSamples(const Globals& g, const GenerateArgs& a) {
  const corpus::CorpusStore store(g.data_root);
  corpus::PlatformTag::Register(a.platform);
  const auto platform = corpus::PlatformTag::Parse(a.platform);
  auto samples = store.LoadSamples(platform);
  if (a.split != "all") {
    const auto manifest = store.LoadManifest(platform);
    const auto split = store.Split(platform, manifest.split_ratios, a.seed);
    const auto& ids = a.split == "train" ? split.train : a.split == "dev" ? split.dev : split.test;
    const std::set<std::string> keep(ids.begin(), ids.end());
    std::erase_if(samples, [&](const corpus::TextSample& s) { return !keep.contains(s.id); });
  }
  if (a.limit > 0 && samples.size() > a.limit) samples.erase(samples.begin() + static_cast<std::ptrdiff_t>(a.limit), samples.end());
  return samples;
}

int RunGenerate(const Globals& g, const GenerateArgs& a) {
  const prompts::PromptFactory factory(TemplateDir(g));
  const auto samples = SelectSamples(g, a);
  if (g.dry_run) {
    std::vector<Json> plan;
    for (const auto& s : samples) {
      plan.push_back(PlanLine(s.id, factory.BuildParallelPrompt(s.text, s.label),
                              factory.BuildParallelPrompt(kMask, s.label), g.acknowledged));
    }
    std::cout << JsonLines(plan);
    return 0;
  }
  auto gw = MakeGateway(g);
  struct Outcome {
    std::optional<corpus::ParallelRecord> record;
    std::optional<Skip> skip;
  };
  const auto outcomes = OrderedParallelMap<Outcome>(samples.size(), g.jobs, [&](std::size_t i) -> Outcome {
    const auto& s = samples[i];
    try {
      const auto prompt = factory.BuildParallelPrompt(s.text, s.label);
      const auto completion = gw->Complete(a.endpoint, prompt);
      const auto target = Trim(completion.text);
      if (target.empty()) return {std::nullopt, Skip{s.id, Errc::RemoteError, "empty completion (" + completion.finish_reason + ")"}};
      corpus::ParallelRecord r{s, target, s.label, std::nullopt, std::nullopt,
                               corpus::Provenance{a.endpoint, prompt.Hash(), NowIso8601()}};
      return {std::move(r), std::nullopt};
    } catch (const Error& e) {
      return {std::nullopt, Skip{s.id, e.code(), e.message()}};
    }
  });
  std::vector<corpus::ParallelRecord> rows;
  std::vector<Skip> skips;
  for (const auto& o : outcomes) {
    if (o.record) rows.push_back(*o.record);
    if (o.skip) skips.push_back(*o.skip);
  }
  const auto out = a.out.empty() ? (fs::path(g.data_root) / a.platform / "parallel.jsonl").string() : a.out;
  corpus::WriteParallelRecords(out, rows);
  Log("wrote " + std::to_string(rows.size()) + " pairs to " + out);
  return ReportSkips(skips, samples.size());
}

// ---------------------------------------------------------------- annotate-*

struct AnnotateArgs {
  std::string in;
  std::string out;
  std::string endpoint;
  std::string fewshots;
  std::size_t max_sentences = 3;
};

std::optional<corpus::ParaphraseLabel> ParseYesNo(std::string_view text) {
  std::string word;
  for (char c : Trim(text)) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (word == "yes") return corpus::ParaphraseLabel::Yes;
  if (word == "no") return corpus::ParaphraseLabel::No;
  return std::nullopt;
}

template <typename BuildFn, typename ApplyFn>
int Annotate(const Globals& g, const AnnotateArgs& a, BuildFn build, ApplyFn apply) {
  auto records = corpus::LoadParallelRecords(a.in);
  if (g.dry_run) {
    std::vector<Json> plan;
    for (const auto& r : records) {
      plan.push_back(PlanLine(r.source.id, build(r.toxic_text(), r.nontoxic_text()), build(kMask, kMask),
                              g.acknowledged));
    }
    std::cout << JsonLines(plan);
    return 0;
  }
  auto gw = MakeGateway(g);
  const auto skips = OrderedParallelMap<std::optional<Skip>>(records.size(), g.jobs, [&](std::size_t i) -> std::optional<Skip> {
    auto& r = records[i];
    try {
      const auto completion = gw->Complete(a.endpoint, build(r.toxic_text(), r.nontoxic_text()));
      if (auto err = apply(r, completion.text)) return Skip{r.source.id, Errc::ParseError, *err};
      return std::nullopt;
    } catch (const Error& e) {
      return Skip{r.source.id, e.code(), e.message()};
    }
  });
  std::vector<Skip> failed;
  for (const auto& s : skips) {
    if (s) failed.push_back(*s);
  }
  corpus::WriteParallelRecords(a.out.empty() ? a.in : a.out, records);
  return ReportSkips(failed, records.size());
}

int RunExplanations(const Globals& g, const AnnotateArgs& a) {
  const prompts::PromptFactory factory(TemplateDir(g));
  return Annotate(
      g, a, [&](std::string_view toxic, std::string_view) { return factory.BuildExplanationPrompt(toxic); },
      [&](corpus::ParallelRecord& r, const std::string& text) -> std::optional<std::string> {
        auto explanation = corpus::TruncateSentences(Trim(text), a.max_sentences);
        if (explanation.empty()) return "empty explanation";
        r.explanation = std::move(explanation);
        return std::nullopt;
      });
}

int RunParaphraseLabels(const Globals& g, const AnnotateArgs& a) {
  const prompts::PromptFactory factory(TemplateDir(g));
  const auto fewshots = prompts::LoadExemplars(
      a.fewshots.empty() ? TemplateDir(g) / "paraphrase_fewshot.jsonl" : fs::path(a.fewshots));
  return Annotate(
      g, a,
      [&](std::string_view toxic, std::string_view nontoxic) {
        return factory.BuildParaphrasePrompt(toxic, nontoxic, fewshots);
      },
      [](corpus::ParallelRecord& r, const std::string& text) -> std::optional<std::string> {
        const auto label = ParseYesNo(text);
        if (!label) return "answer is neither yes nor no";
        r.paraphrase_label = label;
        return std::nullopt;
      });
}

// ---------------------------------------------------------------- filter

struct FilterArgs {
  std::string ensemble;
  std::string in;
  std::string out = "filtered.jsonl";
  std::string stats = "stats.json";
  std::string policy = "skip-and-log";
};

std::vector<std::string> LoadEnsemble(const fs::path& path) {
  Json doc;
  try {
    doc = Json::parse(ReadFile(path));
  } catch (const Json::exception& e) {
    throw Error(Errc::Config, "ensemble file " + path.string() + ": " + e.what());
  }
  const Json& list = doc.is_object() ? doc.at("classifiers") : doc;
  return list.get<std::vector<std::string>>();
}

int RunFilterCmd(const Globals& g, const FilterArgs& a) {
  const auto ensemble = LoadEnsemble(a.ensemble);
  const auto records = corpus::LoadParallelRecords(a.in);
  if (g.dry_run) {
    std::cout << Json{{"records", records.size()},
                      {"ensemble", ensemble},
                      {"classify_calls", records.size() * ensemble.size() * 2}}
                     .dump()
              << '\n';
    return 0;
  }
  auto gw = MakeGateway(g);
  filtration::FilterOptions opts;
  opts.policy = filtration::ParseErrorPolicy(a.policy);
  opts.jobs = g.jobs;
  const auto result = filtration::RunFilter(*gw, records, ensemble, opts);
  corpus::WriteParallelRecords(a.out, result.kept);
  AtomicWriteFile(a.stats, result.stats.ToJson().dump(2) + "\n");
  std::vector<Skip> skips;
  for (const auto& e : result.errors) skips.push_back({e.record_id, e.code, e.message});
  Log("kept " + std::to_string(result.kept.size()) + " of " + std::to_string(records.size()) + " pairs");
  return ReportSkips(skips, records.size());
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string in;
  std::string eval_endpoints;
  std::string mode = "reference";
  std::string smoothing = "none";
  std::string level = "corpus";
  std::string out;
  std::string format = "table";
};

int RunEvaluateCmd(const Globals& g, const EvaluateArgs& a) {
  const auto items = metrics::LoadEvalItems(a.in);
  metrics::EvalEndpoints endpoints;
  try {
    endpoints = metrics::EvalEndpoints::FromJson(Json::parse(ReadFile(a.eval_endpoints)));
  } catch (const Json::exception& e) {
    throw Error(Errc::Config, "evaluation endpoints " + a.eval_endpoints + ": " + e.what());
  }
  metrics::EvalOptions opts;
  opts.bleu_mode = metrics::ParseBleuMode(a.mode);
  opts.bleu.smoothing = metrics::ParseSmoothing(a.smoothing);
  opts.bleu.level = metrics::ParseBleuLevel(a.level);
  opts.jobs = g.jobs;
  if (g.dry_run) {
    std::cout << Json{{"items", items.size()},
                      {"endpoints", endpoints.ToJson()},
                      {"bleu_mode", metrics::ToString(opts.bleu_mode)},
                      {"smoothing", metrics::ToString(opts.bleu.smoothing)},
                      {"level", metrics::ToString(opts.bleu.level)}}
                     .dump()
              << '\n';
    return 0;
  }
  auto gw = MakeGateway(g);
  const auto report = metrics::Evaluate(*gw, items, endpoints, opts);
  if (!a.out.empty()) AtomicWriteFile(a.out, report.ToJson().dump(2) + "\n");
  std::cout << (a.format == "json" ? report.ToJson().dump(2) + "\n" : report.ToTable());
  return 0;
}

// ---------------------------------------------------------------- adversarial

struct AdversarialArgs {
  std::string config;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int RunAdversarialCmd(const Globals& g, const AdversarialArgs& a) {
  auto cfg = adversarial::AdversaryConfig::Load(a.config.empty() ? ShareDir("data") / "adversarial_default.json"
                                                                 : fs::path(a.config));
  if (a.n) cfg.n = *a.n;
  if (a.seed) cfg.seed = *a.seed;
  cfg.Validate();
  if (g.dry_run) {
    std::cout << Json{{"n", cfg.n},
                      {"seed", cfg.seed},
                      {"templates", cfg.templates.size()},
                      {"toxic_words", cfg.toxic_words.size()},
                      {"perturb_chars", cfg.perturb_chars}}
                     .dump()
              << '\n';
    return 0;
  }
  if (!g.acknowledged) Log("perturbed words are redacted; pass " + std::string(kAckFlag) + " for the full suite");
  Emit(a.out, adversarial::SerializeTestbed(adversarial::GenerateTestbed(cfg), g.acknowledged));
  return 0;
}

struct CuratedArgs {
  std::string fixture;
  std::string out;
};

int RunCurated(const Globals& g, const CuratedArgs& a) {
  const auto suite = adversarial::CuratedSuite(a.fixture.empty() ? ShareDir("data") / "curated_adversaries.json"
                                                                  : fs::path(a.fixture));
  std::vector<Json> rows;
  for (const auto& c : suite) rows.push_back(adversarial::ToJson(c, g.acknowledged));
  if (!g.acknowledged) Log("obfuscated tokens are redacted; pass " + std::string(kAckFlag) + " for the full suite");
  Emit(a.out, JsonLines(rows));
  return 0;
}

// ---------------------------------------------------------------- roundtrip

struct RoundtripArgs {
  std::string in;
  std::string language;
  std::string translator;
  std::string classifier;
  std::string embedder;
  std::string pivot = "en";
  std::size_t limit = roundtrip::kReferenceSampleSize;
  std::optional<std::uint64_t> seed;
  std::string audit;
  std::string out;
};

int RunRoundtripCmd(const Globals& g, const RoundtripArgs& a) {
  auto pairs = corpus::LoadParallelRecords(a.in);
  if (a.seed) {
    Rng rng(*a.seed);
    PartialShuffle(pairs, a.limit, rng);
  }
  if (pairs.size() > a.limit) pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(a.limit), pairs.end());
  if (g.dry_run) {
    std::cout << Json{{"pairs", pairs.size()},
                      {"language", a.language},
                      {"pivot", a.pivot},
                      {"translate_calls", pairs.size() * 4}}
                     .dump()
              << '\n';
    return 0;
  }
  if (!a.audit.empty()) RequireAck(g, "--audit");
  auto gw = MakeGateway(g);
  roundtrip::RoundtripOptions opts;
  opts.pivot_language = a.pivot;
  opts.jobs = g.jobs;
  if (!a.audit.empty()) opts.audit_path = a.audit;
  const auto result = roundtrip::Roundtrip(*gw, pairs, a.language, {a.translator, a.classifier, a.embedder}, opts);
  Emit(a.out, result.report.ToJson().dump(2) + "\n");
  std::vector<Skip> skips;
  for (const auto& f : result.failures) skips.push_back({f.record_id, f.code, f.message});
  return ReportSkips(skips, pairs.size());
}

// ---------------------------------------------------------------- detoxify

struct DetoxifyArgs {
  std::string text;
  std::string in;
  std::string mode = "cot_expl";
  std::string detox_endpoint;
  std::string paraphrase_endpoint;
  std::string out;
};

int RunDetoxify(const Globals& g, const DetoxifyArgs& a) {
  const prompts::PromptFactory factory(TemplateDir(g));
  std::vector<std::string> texts;
  if (!a.text.empty()) texts.push_back(a.text);
  if (!a.in.empty()) {
    for (const auto& row : ReadJsonLines(a.in)) texts.push_back(row.at("text").get<std::string>());
  }
  if (texts.empty()) throw UsageError("detoxify needs --text or --in");
  auto request = [&](const std::string& text) {
    runtime::DetoxRequest r;
    r.text = text;
    r.mode = runtime::ParseDetoxMode(a.mode);
    r.endpoints = {a.detox_endpoint, a.paraphrase_endpoint};
    r.Validate();
    return r;
  };
  if (g.dry_run) {
    // Prompt construction never touches the gateway.
    gateway::Gateway offline({}, {});
    const runtime::DetoxRuntime rt(offline, factory);
    std::vector<Json> plan;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      plan.push_back(PlanLine(std::to_string(i), rt.BuildPrompt(request(texts[i])), rt.BuildPrompt(request(kMask)),
                              g.acknowledged));
    }
    std::cout << JsonLines(plan);
    return 0;
  }
  auto gw = MakeGateway(g);
  runtime::DetoxRuntime rt(*gw, factory);
  std::vector<Json> rows;
  for (const auto& t : texts) rows.push_back(rt.Detoxify(request(t)).ToJson());
  Emit(a.out, JsonLines(rows));
  return 0;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  std::string bind;
  std::string state_dir = "detoxforge-state";
  std::size_t workers = 2;
  std::size_t queue = 64;
  std::vector<std::string> cors;
};

int RunServe(const Globals& g, const ServeArgs& a) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Block before any thread starts so only sigwait below sees them.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const prompts::PromptFactory factory(TemplateDir(g));
  auto gw = MakeGateway(g);
  service::ServiceOptions opts;
  opts.bind = a.bind.empty() ? service::BindFromEnvironment() : service::ParseBind(a.bind);
  opts.state_dir = a.state_dir;
  opts.data_root = g.data_root;
  opts.adversarial_defaults = ShareDir("data") / "adversarial_default.json";
  opts.workers = a.workers;
  opts.queue_capacity = a.queue;
  opts.jobs = g.jobs;
  if (!a.cors.empty()) opts.cors_origins = a.cors;
  service::Service svc(*gw, factory, opts);
  const int port = svc.Start();
  std::cout << "listening on http://" << opts.bind.host << ':' << port << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  Log("shutting down");
  svc.Stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"detoxforge: parallel detoxification corpora, evaluation and review service"};
  app.set_version_flag("--version", DETOXFORGE_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--endpoints", g.endpoints, "Endpoint config JSON (env DETOXFORGE_ENDPOINTS, default endpoints.json)");
  app.add_option("--data-root", g.data_root, "Corpus store root")->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "Response cache directory")->capture_default_str();
  app.add_option("--gateway", g.gateway_mode, "Gateway mode")
      ->check(CLI::IsMember({"live", "record", "replay"}))
      ->capture_default_str();
  app.add_option("--templates", g.templates, "Prompt template directory (env DETOXFORGE_TEMPLATES)");
  app.add_flag("--dry-run", g.dry_run, "Print prompts or plans without network I/O");
  app.add_option("--jobs", g.jobs, "Worker cap")->check(CLI::Range(1u, 256u))->capture_default_str();
  app.add_flag(std::string(kAckFlag), g.acknowledged, "Emit offensive content unredacted");
  app.footer(
      "Environment: DETOXFORGE_ENDPOINTS, DETOXFORGE_TEMPLATES, DETOXFORGE_SHARE, DETOXFORGE_BIND, and the API-key\n"
      "variables named by each endpoint's auth_env.\n"
      "Exit codes: 1 usage, 2 config, 3 remote, 4 data.");

  std::function<int()> run;

  IngestArgs ingest;
  auto* c = app.add_subcommand("ingest", "Read a labelled source dump into the corpus store");
  c->add_option("--platform", ingest.platform, "Platform tag")->required();
  c->add_option("--input", ingest.input, "Source dump")->required()->check(CLI::ExistingFile);
  c->add_option("--format", ingest.format)->check(CLI::IsMember({"csv", "tsv", "jsonl"}))->capture_default_str();
  c->add_option("--text-field", ingest.text_field)->capture_default_str();
  c->add_option("--label-field", ingest.label_field)->capture_default_str();
  c->add_option("--id-field", ingest.id_field, "Row ids; default <platform>-<row>");
  c->add_option("--labels", ingest.labels, "Label map JSON {raw: toxic|nontoxic}")->check(CLI::ExistingFile);
  c->add_option("--cap", ingest.cap)->check(CLI::NonNegativeNumber)->capture_default_str();
  c->add_option("--seed", ingest.seed)->capture_default_str();
  c->add_option("--ratios", ingest.ratios, "Train/dev/test ratios")->expected(3)->capture_default_str();
  c->callback([&] { run = [&] { return RunIngest(g, ingest); }; });

  GenerateArgs gen;
  c = app.add_subcommand("generate-parallel", "Generate opposite-style counterparts for stored samples");
  c->add_option("--platform", gen.platform)->required();
  c->add_option("--endpoint", gen.endpoint, "Chat endpoint id")->required();
  c->add_option("--split", gen.split)->check(CLI::IsMember({"all", "train", "dev", "test"}))->capture_default_str();
  c->add_option("--seed", gen.seed, "Split seed")->capture_default_str();
  c->add_option("--limit", gen.limit, "Cap on samples (0 = all)");
  c->add_option("--out", gen.out, "Default <data-root>/<platform>/parallel.jsonl");
  c->callback([&] { run = [&] { return RunGenerate(g, gen); }; });

  AnnotateArgs expl;
  c = app.add_subcommand("annotate-explanations", "Attach toxicity explanations to parallel pairs");
  c->add_option("--in", expl.in)->required()->check(CLI::ExistingFile);
  c->add_option("--out", expl.out, "Default: rewrite --in");
  c->add_option("--endpoint", expl.endpoint, "Chat endpoint id")->required();
  c->add_option("--max-sentences", expl.max_sentences)->capture_default_str();
  c->callback([&] { run = [&] { return RunExplanations(g, expl); }; });

  AnnotateArgs para;
  c = app.add_subcommand("annotate-paraphrase", "Label pairs as paraphrase yes/no");
  c->add_option("--in", para.in)->required()->check(CLI::ExistingFile);
  c->add_option("--out", para.out, "Default: rewrite --in");
  c->add_option("--endpoint", para.endpoint, "Chat endpoint id")->required();
  c->add_option("--fewshots", para.fewshots, "Exemplar JSONL (5 lines)")->check(CLI::ExistingFile);
  c->callback([&] { run = [&] { return RunParaphraseLabels(g, para); }; });

  FilterArgs filter;
  c = app.add_subcommand("filter", "Keep pairs whose source is toxic and target non-toxic under the ensemble");
  c->add_option("--ensemble", filter.ensemble, "JSON list of classifier ids")->required()->check(CLI::ExistingFile);
  c->add_option("--in", filter.in)->required()->check(CLI::ExistingFile);
  c->add_option("--out", filter.out)->capture_default_str();
  c->add_option("--stats", filter.stats)->capture_default_str();
  c->add_option("--on-error", filter.policy)->check(CLI::IsMember({"abort", "skip-and-log"}))->capture_default_str();
  c->callback([&] { run = [&] { return RunFilterCmd(g, filter); }; });

  EvaluateArgs eval;
  c = app.add_subcommand("evaluate", "Score rewrites per platform");
  c->add_option("--in", eval.in, "EvalItem JSONL")->required()->check(CLI::ExistingFile);
  c->add_option("--eval-endpoints", eval.eval_endpoints, "Evaluation endpoint ids JSON")
      ->required()
      ->check(CLI::ExistingFile);
  c->add_option("--mode", eval.mode, "BLEU against sources or references")
      ->check(CLI::IsMember({"self", "reference"}))
      ->capture_default_str();
  c->add_option("--smoothing", eval.smoothing)->check(CLI::IsMember({"none", "add-epsilon"}))->capture_default_str();
  c->add_option("--level", eval.level)->check(CLI::IsMember({"corpus", "sentence"}))->capture_default_str();
  c->add_option("--out", eval.out, "Also write the JSON report here");
  c->add_option("--format", eval.format)->check(CLI::IsMember({"table", "json"}))->capture_default_str();
  c->callback([&] { run = [&] { return RunEvaluateCmd(g, eval); }; });

  AdversarialArgs adv;
  c = app.add_subcommand("adversarial", "Generate the perturbed-word testbed (redacted by default)");
  c->add_option("--config", adv.config, "Adversary config JSON (default: shipped word list)")->check(CLI::ExistingFile);
  c->add_option("--n", adv.n);
  c->add_option("--seed", adv.seed);
  c->add_option("--out", adv.out, "Default stdout");
  c->callback([&] { run = [&] { return RunAdversarialCmd(g, adv); }; });

  CuratedArgs curated;
  c = app.add_subcommand("curated-adversaries", "Print the curated obfuscated-token suite (redacted by default)");
  c->add_option("--fixture", curated.fixture)->check(CLI::ExistingFile);
  c->add_option("--out", curated.out, "Default stdout");
  c->callback([&] { run = [&] { return RunCurated(g, curated); }; });

  RoundtripArgs rt;
  c = app.add_subcommand("roundtrip", "Translate pairs to a language and back, then re-score");
  c->add_option("--in", rt.in)->required()->check(CLI::ExistingFile);
  c->add_option("--language", rt.language, "BCP-47 code")->required();
  c->add_option("--translator", rt.translator)->required();
  c->add_option("--classifier", rt.classifier)->required();
  c->add_option("--embedder", rt.embedder)->required();
  c->add_option("--pivot", rt.pivot)->capture_default_str();
  c->add_option("--limit", rt.limit)->capture_default_str();
  c->add_option("--seed", rt.seed, "Sample --limit pairs uniformly instead of taking the first");
  c->add_option("--audit", rt.audit, "Per-pair audit JSONL (offensive content)");
  c->add_option("--out", rt.out, "Default stdout");
  c->callback([&] { run = [&] { return RunRoundtripCmd(g, rt); }; });

  DetoxifyArgs detox;
  c = app.add_subcommand("detoxify", "Rewrite text and gate the rewrite for meaning preservation");
  c->add_option("--text", detox.text);
  c->add_option("--in", detox.in, "JSONL of {\"text\": ...}")->check(CLI::ExistingFile);
  c->add_option("--mode", detox.mode)->check(CLI::IsMember({"vanilla", "prompted", "cot_expl"}))->capture_default_str();
  c->add_option("--detox-endpoint", detox.detox_endpoint)->required();
  c->add_option("--paraphrase-endpoint", detox.paraphrase_endpoint)->required();
  c->add_option("--out", detox.out, "Default stdout");
  c->callback([&] { run = [&] { return RunDetoxify(g, detox); }; });

  ServeArgs serve;
  c = app.add_subcommand("serve", "Run the HTTP review service");
  c->add_option("--bind", serve.bind, "host:port (env DETOXFORGE_BIND, default 127.0.0.1:8080)");
  c->add_option("--state-dir", serve.state_dir)->capture_default_str();
  c->add_option("--workers", serve.workers)->check(CLI::Range(1, 64))->capture_default_str();
  c->add_option("--queue", serve.queue)->check(CLI::Range(1, 100000))->capture_default_str();
  c->add_option("--cors-origin", serve.cors, "Allowed origin (repeatable)");
  c->callback([&] { run = [&] { return RunServe(g, serve); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  try {
    return run();
  } catch (const UsageError& e) {
    Log(e.what());
    return kExitUsage;
  } catch (const Error& e) {
    Log(e.what());
    return ExitClassFor(e.code());
  } catch (const Json::exception& e) {
    Log(std::string("malformed JSON: ") + e.what());
    return ExitClassFor(Errc::Schema);
  } catch (const std::exception& e) {
    Log(e.what());
    return ExitClassFor(Errc::Io);
  }
}
