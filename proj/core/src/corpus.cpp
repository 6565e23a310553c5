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

#include "detoxforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <set>

#include "detoxforge/error.hpp"

namespace detoxforge::corpus {
namespace {

const std::vector<std::string> kBuiltInPlatforms = {
    "wiki", "twitter", "fb_yt", "stormfront", "fox",
    "reddit", "convai", "hatecheck", "gab", "yt_reddit",
};

std::mutex& RegistryMutex() {
  static std::mutex mu;
  return mu;
}

std::set<std::string>& Registry() {
  static std::set<std::string> names(kBuiltInPlatforms.begin(), kBuiltInPlatforms.end());
  return names;
}

bool IsValidPlatformName(std::string_view name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string NormalizeRawLabel(std::string_view raw) { return ToLowerAscii(Trim(raw)); }

bool IsTerminator(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

std::string_view ToString(Label label) {
  return label == Label::Toxic ? "toxic" : "nontoxic";
}

Label ParseLabel(std::string_view s) {
  if (s == "toxic") return Label::Toxic;
  if (s == "nontoxic") return Label::NonToxic;
  throw Error(Errc::UnknownLabel, "expected \"toxic\" or \"nontoxic\", got \"" + std::string(s) + "\"");
}

Label Opposite(Label label) { return label == Label::Toxic ? Label::NonToxic : Label::Toxic; }

PlatformTag PlatformTag::Parse(std::string_view name) {
  if (!IsKnown(name)) {
    throw Error(Errc::Config, "unknown platform \"" + std::string(name) +
                                  "\" (register extensions before use)");
  }
  return PlatformTag(std::string(name));
}

void PlatformTag::Register(std::string_view name) {
  if (!IsValidPlatformName(name)) {
    throw Error(Errc::Config, "platform names must match [a-z0-9_]+: \"" + std::string(name) + "\"");
  }
  std::lock_guard lock(RegistryMutex());
  Registry().emplace(name);
}

bool PlatformTag::IsKnown(std::string_view name) {
  std::lock_guard lock(RegistryMutex());
  return Registry().count(std::string(name)) > 0;
}

std::vector<std::string> PlatformTag::BuiltIns() { return kBuiltInPlatforms; }

std::string_view ToString(ParaphraseLabel label) { return label == ParaphraseLabel::Yes ? "yes" : "no"; }

ParaphraseLabel ParseParaphraseLabel(std::string_view s) {
  const auto norm = ToLowerAscii(Trim(s));
  if (norm == "yes") return ParaphraseLabel::Yes;
  if (norm == "no") return ParaphraseLabel::No;
  throw Error(Errc::ParseError, "paraphrase label must be yes/no, got \"" + std::string(s) + "\"");
}

const std::string& ParallelRecord::toxic_text() const {
  return source_label == Label::Toxic ? source.text : target_text;
}

const std::string& ParallelRecord::nontoxic_text() const {
  return source_label == Label::Toxic ? target_text : source.text;
}

std::size_t CountSentenceTerminators(std::string_view text) {
  std::size_t runs = 0;
  bool in_run = false;
  for (char c : text) {
    if (IsTerminator(c)) {
      if (!in_run) ++runs;
      in_run = true;
    } else {
      in_run = false;
    }
  }
  return runs;
}

std::string TruncateSentences(std::string_view text, std::size_t max_sentences) {
  std::size_t runs = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!IsTerminator(text[i])) continue;
    std::size_t end = i;
    while (end < text.size() && IsTerminator(text[end])) ++end;
    if (++runs == max_sentences) return Trim(text.substr(0, end));
    i = end - 1;
  }
  return Trim(text);
}

LabelMap::LabelMap(std::map<std::string, Label> entries) {
  for (auto& [k, v] : entries) entries_[NormalizeRawLabel(k)] = v;
}

LabelMap LabelMap::FromJson(const Json& doc) {
  if (!doc.is_object()) throw Error(Errc::Config, "label map must be a JSON object");
  std::map<std::string, Label> entries;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) throw Error(Errc::Config, "label map value for \"" + key + "\" must be a string");
    try {
      entries[key] = ParseLabel(value.get<std::string>());
    } catch (const Error&) {
      throw Error(Errc::Config, "label map value for \"" + key + "\" must be \"toxic\" or \"nontoxic\"");
    }
  }
  return LabelMap(std::move(entries));
}

LabelMap LabelMap::Load(const std::filesystem::path& path) {
  try {
    return FromJson(Json::parse(ReadFile(path)));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::Config, path.string() + ": " + e.what());
  }
}

LabelMap LabelMap::WithIdentity() const {
  LabelMap out = *this;
  out.entries_.try_emplace("toxic", Label::Toxic);
  out.entries_.try_emplace("nontoxic", Label::NonToxic);
  return out;
}

bool LabelMap::Covers(std::string_view raw_label) const {
  return entries_.count(NormalizeRawLabel(raw_label)) > 0;
}

Label LabelMap::Binarize(std::string_view raw_label) const {
  auto it = entries_.find(NormalizeRawLabel(raw_label));
  if (it == entries_.end()) {
    throw Error(Errc::UnknownLabel, "raw label \"" + std::string(raw_label) + "\" is not in the label map");
  }
  return it->second;
}

Label BinarizeLabel(std::string_view raw_label, const LabelMap& mapping) {
  return mapping.Binarize(raw_label);
}

IngestResult Ingest(const PlatformTag& platform, std::vector<TextSample> samples,
                    std::int64_t cap, std::uint64_t seed, SplitRatios ratios) {
  if (cap < 0) throw Error(Errc::OutOfRange, "cap must be >= 0");
  ValidateRatios(ratios);
  for (const auto& s : samples) {
    if (s.platform != platform) {
      throw Error(Errc::MixedPlatforms, "sample " + s.id + " belongs to " + s.platform.name() +
                                            ", expected " + platform.name());
    }
    if (Trim(s.text).empty()) throw Error(Errc::InvalidSample, "sample " + s.id + " has empty text");
  }
  std::sort(samples.begin(), samples.end(),
            [](const TextSample& a, const TextSample& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].id == samples[i - 1].id) throw Error(Errc::DuplicateId, "duplicate id " + samples[i].id);
  }

  const auto limit = static_cast<std::size_t>(cap);
  if (samples.size() > limit) {
    Rng rng(seed);
    PartialShuffle(samples, limit, rng);
    samples.erase(samples.begin() + static_cast<std::ptrdiff_t>(limit), samples.end());
    std::sort(samples.begin(), samples.end(),
              [](const TextSample& a, const TextSample& b) { return a.id < b.id; });
  }

  IngestResult result{
      DatasetManifest{platform, {}, cap, seed, {}, ratios},
      std::move(samples),
  };
  for (const auto& s : result.samples) {
    if (s.label == Label::Toxic) {
      ++result.manifest.counts.toxic;
    } else {
      ++result.manifest.counts.nontoxic;
    }
  }
  return result;
}

void ValidateRatios(const SplitRatios& r) {
  for (double v : {r.train, r.dev, r.test}) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw Error(Errc::BadRatios, "split ratios must lie in [0, 1]");
  }
  if (std::abs(r.train + r.dev + r.test - 1.0) > 1e-9) {
    throw Error(Errc::BadRatios, "split ratios must sum to 1");
  }
}

DataSplit SplitIds(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed) {
  ValidateRatios(ratios);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(Errc::DuplicateId, "split input contains duplicate ids");
  }
  Rng rng(seed);
  Shuffle(ids, rng);

  const std::size_t n = ids.size();
  // The epsilon keeps products such as 0.29 * 100 from flooring to 28.
  auto portion = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_dev = std::min(portion(ratios.dev), n);
  const std::size_t n_test = std::min(portion(ratios.test), n - n_dev);

  DataSplit out;
  out.dev.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_dev));
  out.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_dev),
                  ids.begin() + static_cast<std::ptrdiff_t>(n_dev + n_test));
  out.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_dev + n_test), ids.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.dev.begin(), out.dev.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

const std::vector<std::string>& TrainingPlatformNames() {
  static const std::vector<std::string> names = {"wiki", "reddit", "twitter"};
  return names;
}

std::vector<DatasetManifest> SelectTrainingPlatforms(const std::vector<DatasetManifest>& manifests) {
  std::vector<DatasetManifest> out;
  const auto& names = TrainingPlatformNames();
  for (const auto& m : manifests) {
    if (std::find(names.begin(), names.end(), m.platform.name()) != names.end()) out.push_back(m);
  }
  return out;
}

SourceFormat ParseSourceFormat(std::string_view s) {
  if (s == "csv") return SourceFormat::Csv;
  if (s == "tsv") return SourceFormat::Tsv;
  if (s == "jsonl") return SourceFormat::JsonLines;
  throw Error(Errc::Config, "unknown source format \"" + std::string(s) + "\" (csv, tsv, jsonl)");
}

std::vector<std::vector<std::string>> ParseDelimited(std::string_view text, char delimiter) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw Error(Errc::Io, "unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

namespace {

std::string FieldToString(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

std::string RowId(const PlatformTag& platform, std::size_t row) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08zu", row);
  return platform.name() + "-" + buf;
}

}  // namespace

SourceReadResult ReadSourceDump(const std::filesystem::path& path, const SourceSchema& schema,
                                const PlatformTag& platform, const LabelMap& labels) {
  SourceReadResult out;
  auto add = [&](std::size_t row, std::string id, std::string text, const std::string& raw) {
    if (Trim(text).empty()) {
      ++out.skipped_empty;
      return;
    }
    Label label;
    try {
      label = labels.Binarize(raw);
    } catch (const Error& e) {
      throw Error(Errc::UnknownLabel, path.string() + " row " + std::to_string(row) + ": " + e.message());
    }
    if (id.empty()) id = RowId(platform, row);
    out.samples.push_back(TextSample{std::move(id), std::move(text), platform, raw, label});
  };

  if (schema.format == SourceFormat::JsonLines) {
    const auto rows = ReadJsonLines(path);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (!r.is_object() || !r.contains(schema.text_field) || !r.contains(schema.label_field)) {
        throw Error(Errc::Io, path.string() + " row " + std::to_string(i + 1) + ": missing \"" +
                                  schema.text_field + "\" or \"" + schema.label_field + "\"");
      }
      std::string id = schema.id_field.empty() ? "" : FieldToString(r.value(schema.id_field, Json()));
      add(i + 1, std::move(id), FieldToString(r[schema.text_field]), FieldToString(r[schema.label_field]));
    }
    return out;
  }

  std::vector<std::vector<std::string>> rows;
  try {
    rows = ParseDelimited(ReadFile(path), schema.format == SourceFormat::Csv ? ',' : '\t');
  } catch (const Error& e) {
    throw Error(Errc::Io, path.string() + ": " + e.what());
  }
  if (rows.empty()) return out;
  const auto& header = rows.front();
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (Trim(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto text_col = column(schema.text_field);
  const auto label_col = column(schema.label_field);
  if (!text_col || !label_col) {
    throw Error(Errc::Io, path.string() + ": header lacks \"" + schema.text_field + "\" or \"" +
                              schema.label_field + "\"");
  }
  std::optional<std::size_t> id_col;
  if (!schema.id_field.empty()) {
    id_col = column(schema.id_field);
    if (!id_col) throw Error(Errc::Io, path.string() + ": header lacks \"" + schema.id_field + "\"");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto cell = [&](std::size_t c) { return c < r.size() ? r[c] : std::string(); };
    add(i, id_col ? cell(*id_col) : std::string(), cell(*text_col), cell(*label_col));
  }
  return out;
}

DatasetManifest CorpusStore::Write(const IngestResult& result) const {
  const auto& name = result.manifest.platform.name();
  const auto dir = root_ / name;
  std::vector<Json> rows;
  rows.reserve(result.samples.size());
  for (const auto& s : result.samples) rows.emplace_back(s);
  WriteJsonLines(dir / "samples.jsonl", rows);

  DatasetManifest manifest = result.manifest;
  manifest.file_paths = {name + "/samples.jsonl"};
  AtomicWriteFile(dir / "manifest.json", SerializeManifest(manifest));
  return manifest;
}

DatasetManifest CorpusStore::LoadManifest(const PlatformTag& platform) const {
  const auto path = root_ / platform.name() / "manifest.json";
  try {
    return Json::parse(ReadFile(path)).get<DatasetManifest>();
  } catch (const Json::exception& e) {
    throw Error(Errc::Io, path.string() + ": " + e.what());
  }
}

std::vector<TextSample> CorpusStore::LoadSamples(const PlatformTag& platform) const {
  const auto path = root_ / platform.name() / "samples.jsonl";
  std::vector<TextSample> out;
  for (const auto& row : ReadJsonLines(path)) {
    try {
      out.push_back(row.get<TextSample>());
    } catch (const Json::exception& e) {
      throw Error(Errc::Io, path.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<DatasetManifest> CorpusStore::LoadAllManifests() const {
  std::vector<DatasetManifest> out;
  if (!std::filesystem::exists(root_)) return out;
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root_)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    const auto name = d.filename().string();
    if (!PlatformTag::IsKnown(name)) PlatformTag::Register(name);
    out.push_back(LoadManifest(PlatformTag::Parse(name)));
  }
  return out;
}

DataSplit CorpusStore::Split(const PlatformTag& platform, const SplitRatios& ratios,
                             std::uint64_t seed) const {
  auto manifest = LoadManifest(platform);
  std::vector<std::string> ids;
  for (const auto& s : LoadSamples(platform)) ids.push_back(s.id);
  auto split = SplitIds(std::move(ids), ratios, seed);

  const auto dir = root_ / platform.name();
  auto write_ids = [&](const char* name, const std::vector<std::string>& list) {
    std::string buf;
    for (const auto& id : list) buf += id + "\n";
    AtomicWriteFile(dir / name, buf);
  };
  write_ids("split_train.txt", split.train);
  write_ids("split_dev.txt", split.dev);
  write_ids("split_test.txt", split.test);

  manifest.split_ratios = ratios;
  manifest.file_paths = {platform.name() + "/samples.jsonl", platform.name() + "/split_train.txt",
                         platform.name() + "/split_dev.txt", platform.name() + "/split_test.txt"};
  AtomicWriteFile(dir / "manifest.json", SerializeManifest(manifest));
  return split;
}

std::vector<ParallelRecord> LoadParallelRecords(const std::filesystem::path& path) {
  std::vector<ParallelRecord> out;
  std::size_t line = 0;
  for (const auto& row : ReadJsonLines(path)) {
    ++line;
    try {
      out.push_back(row.get<ParallelRecord>());
    } catch (const Json::exception& e) {
      throw Error(Errc::Io, path.string() + " record " + std::to_string(line) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + " record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

void WriteParallelRecords(const std::filesystem::path& path, const std::vector<ParallelRecord>& rows) {
  std::vector<Json> docs(rows.begin(), rows.end());
  WriteJsonLines(path, docs);
}

void to_json(Json& j, const Provenance& p) {
  j = Json{{"endpoint_id", p.endpoint_id}, {"prompt_hash", p.prompt_hash}, {"timestamp", p.timestamp}};
}

void from_json(const Json& j, Provenance& p) {
  p.endpoint_id = j.value("endpoint_id", "");
  p.prompt_hash = j.value("prompt_hash", "");
  p.timestamp = j.value("timestamp", "");
}

void to_json(Json& j, const SplitRatios& r) {
  j = Json{{"train", r.train}, {"dev", r.dev}, {"test", r.test}};
}

void from_json(const Json& j, SplitRatios& r) {
  r.train = j.at("train").get<double>();
  r.dev = j.at("dev").get<double>();
  r.test = j.at("test").get<double>();
}

std::string SerializeManifest(const DatasetManifest& m) { return Json(m).dump(2) + "\n"; }

}  // namespace detoxforge::corpus

namespace nlohmann {

using detoxforge::Errc;
using detoxforge::Error;
using namespace detoxforge::corpus;

void adl_serializer<PlatformTag>::to_json(json& j, const PlatformTag& v) { j = v.name(); }

PlatformTag adl_serializer<PlatformTag>::from_json(const json& j) {
  return PlatformTag::Parse(j.get<std::string>());
}

void adl_serializer<TextSample>::to_json(json& j, const TextSample& v) {
  j = json{{"id", v.id},
           {"text", v.text},
           {"platform", v.platform},
           {"raw_label", v.raw_label},
           {"label", ToString(v.label)}};
}

TextSample adl_serializer<TextSample>::from_json(const json& j) {
  TextSample s{j.at("id").get<std::string>(), j.at("text").get<std::string>(),
               j.at("platform").get<PlatformTag>(), j.value("raw_label", ""),
               ParseLabel(j.at("label").get<std::string>())};
  if (detoxforge::Trim(s.text).empty()) throw Error(Errc::InvalidSample, "sample " + s.id + " has empty text");
  return s;
}

void adl_serializer<ParallelRecord>::to_json(json& j, const ParallelRecord& v) {
  j = json{{"source", v.source},
           {"target_text", v.target_text},
           {"source_label", ToString(v.source_label)},
           {"explanation", v.explanation ? json(*v.explanation) : json(nullptr)},
           {"paraphrase_label", v.paraphrase_label ? json(ToString(*v.paraphrase_label)) : json(nullptr)},
           {"provenance", v.provenance}};
}

ParallelRecord adl_serializer<ParallelRecord>::from_json(const json& j) {
  ParallelRecord r{j.at("source").get<TextSample>(), j.at("target_text").get<std::string>(),
                   ParseLabel(j.at("source_label").get<std::string>()), std::nullopt, std::nullopt,
                   j.value("provenance", json::object()).get<Provenance>()};
  if (j.contains("explanation") && !j["explanation"].is_null()) {
    r.explanation = j["explanation"].get<std::string>();
  }
  if (j.contains("paraphrase_label") && !j["paraphrase_label"].is_null()) {
    r.paraphrase_label = ParseParaphraseLabel(j["paraphrase_label"].get<std::string>());
  }
  if (detoxforge::Trim(r.target_text).empty()) {
    throw Error(Errc::InvalidSample, "record " + r.source.id + " has empty target_text");
  }
  if (r.explanation && CountSentenceTerminators(*r.explanation) > 3) {
    throw Error(Errc::InvalidSample, "record " + r.source.id + " explanation exceeds three sentences");
  }
  return r;
}

void adl_serializer<DatasetManifest>::to_json(json& j, const DatasetManifest& v) {
  j = json{{"platform", v.platform},
           {"counts", {{"toxic", v.counts.toxic}, {"nontoxic", v.counts.nontoxic}}},
           {"cap", v.cap},
           {"seed", v.seed},
           {"file_paths", v.file_paths},
           {"split_ratios", v.split_ratios}};
}

DatasetManifest adl_serializer<DatasetManifest>::from_json(const json& j) {
  DatasetManifest m{j.at("platform").get<PlatformTag>(),
                    {j.at("counts").at("toxic").get<std::int64_t>(),
                     j.at("counts").at("nontoxic").get<std::int64_t>()},
                    j.at("cap").get<std::int64_t>(),
                    j.at("seed").get<std::uint64_t>(),
                    j.at("file_paths").get<std::vector<std::string>>(),
                    j.at("split_ratios").get<SplitRatios>()};
  if (m.counts.toxic < 0 || m.counts.nontoxic < 0 || m.cap < 0) {
    throw Error(Errc::InvalidSample, "manifest counts and cap must be >= 0");
  }
  detoxforge::corpus::ValidateRatios(m.split_ratios);
  return m;
}

}  // namespace nlohmann
