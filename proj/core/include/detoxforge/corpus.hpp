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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/util.hpp"

namespace detoxforge::corpus {

enum class Label { Toxic, NonToxic };

std::string_view ToString(Label label);
Label ParseLabel(std::string_view s);  // "toxic" | "nontoxic"
Label Opposite(Label label);

// Lowercase platform name drawn from the built-in set or a registered
// extension. Construction through Parse() is the only way to obtain one.
class PlatformTag {
 public:
  static PlatformTag Parse(std::string_view name);
  // Adds a name to the process-wide registry. Names must match [a-z0-9_]+.
  static void Register(std::string_view name);
  static bool IsKnown(std::string_view name);
  static std::vector<std::string> BuiltIns();

  const std::string& name() const { return name_; }
  auto operator<=>(const PlatformTag&) const = default;

 private:
  explicit PlatformTag(std::string name) : name_(std::move(name)) {}
  std::string name_;
};

struct TextSample {
  std::string id;
  std::string text;
  PlatformTag platform;
  std::string raw_label;
  Label label;

  bool operator==(const TextSample&) const = default;
};

enum class ParaphraseLabel { Yes, No };
std::string_view ToString(ParaphraseLabel label);
ParaphraseLabel ParseParaphraseLabel(std::string_view s);

struct Provenance {
  std::string endpoint_id;
  std::string prompt_hash;
  std::string timestamp;

  bool operator==(const Provenance&) const = default;
};

struct ParallelRecord {
  TextSample source;
  std::string target_text;
  Label source_label;
  std::optional<std::string> explanation;
  std::optional<ParaphraseLabel> paraphrase_label;
  Provenance provenance;

  // Whichever side of the pair carries the toxic / non-toxic style.
  const std::string& toxic_text() const;
  const std::string& nontoxic_text() const;

  bool operator==(const ParallelRecord&) const = default;
};

// Counts maximal runs of '.', '!' and '?'.
std::size_t CountSentenceTerminators(std::string_view text);

// Keeps at most the first `max_sentences` sentences of `text`.
std::string TruncateSentences(std::string_view text, std::size_t max_sentences);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;

  bool operator==(const SplitRatios&) const = default;
};

struct ClassCounts {
  std::int64_t toxic = 0;
  std::int64_t nontoxic = 0;

  bool operator==(const ClassCounts&) const = default;
};

struct DatasetManifest {
  PlatformTag platform;
  ClassCounts counts;
  std::int64_t cap = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> file_paths;
  SplitRatios split_ratios;

  bool operator==(const DatasetManifest&) const = default;
};

// raw label -> binary label. Lookups trim and lowercase the raw label.
class LabelMap {
 public:
  LabelMap() = default;
  explicit LabelMap(std::map<std::string, Label> entries);

  // JSON object {"raw": "toxic" | "nontoxic", ...}.
  static LabelMap FromJson(const Json& doc);
  static LabelMap Load(const std::filesystem::path& path);

  // Adds "toxic" -> Toxic and "nontoxic" -> NonToxic if absent.
  LabelMap WithIdentity() const;

  Label Binarize(std::string_view raw_label) const;
  bool Covers(std::string_view raw_label) const;
  const std::map<std::string, Label>& entries() const { return entries_; }

 private:
  std::map<std::string, Label> entries_;
};

Label BinarizeLabel(std::string_view raw_label, const LabelMap& mapping);

struct IngestResult {
  DatasetManifest manifest;
  std::vector<TextSample> samples;  // sorted by id
};

// Caps one platform's samples at `cap`, sampling uniformly without
// replacement when there are more. Input order does not matter: samples are
// sorted by id before the seeded shuffle.
// Every sample must belong to `platform`; ids must be unique.
IngestResult Ingest(const PlatformTag& platform, std::vector<TextSample> samples,
                    std::int64_t cap, std::uint64_t seed, SplitRatios ratios = {});

struct DataSplit {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

void ValidateRatios(const SplitRatios& ratios);

// dev and test receive floor(ratio * n) ids, train the remainder. Each list
// is sorted by id.
DataSplit SplitIds(std::vector<std::string> ids, const SplitRatios& ratios, std::uint64_t seed);

const std::vector<std::string>& TrainingPlatformNames();
std::vector<DatasetManifest> SelectTrainingPlatforms(const std::vector<DatasetManifest>& manifests);

enum class SourceFormat { Csv, Tsv, JsonLines };
SourceFormat ParseSourceFormat(std::string_view s);

struct SourceSchema {
  SourceFormat format = SourceFormat::Csv;
  std::string text_field = "text";
  std::string label_field = "label";
  std::string id_field;  // empty: ids are "<platform>-<row number>"
};

struct SourceReadResult {
  std::vector<TextSample> samples;
  std::size_t skipped_empty = 0;
};

// Reads a CSV/TSV (header row required, RFC 4180 quoting) or JSON-lines dump.
SourceReadResult ReadSourceDump(const std::filesystem::path& path, const SourceSchema& schema,
                                const PlatformTag& platform, const LabelMap& labels);

// Splits one delimited line set into rows. Exposed for tests.
std::vector<std::vector<std::string>> ParseDelimited(std::string_view text, char delimiter);

// On-disk layout rooted at a data directory:
//   <root>/<platform>/samples.jsonl
//   <root>/<platform>/manifest.json
//   <root>/<platform>/split_{train,dev,test}.txt
//   <root>/<platform>/parallel.jsonl
class CorpusStore {
 public:
  explicit CorpusStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  DatasetManifest Write(const IngestResult& result) const;
  DatasetManifest LoadManifest(const PlatformTag& platform) const;
  std::vector<TextSample> LoadSamples(const PlatformTag& platform) const;
  std::vector<DatasetManifest> LoadAllManifests() const;

  DataSplit Split(const PlatformTag& platform, const SplitRatios& ratios, std::uint64_t seed) const;

 private:
  std::filesystem::path root_;
};

std::vector<ParallelRecord> LoadParallelRecords(const std::filesystem::path& path);
void WriteParallelRecords(const std::filesystem::path& path, const std::vector<ParallelRecord>& rows);

void to_json(Json& j, const Provenance& p);
void from_json(const Json& j, Provenance& p);
void to_json(Json& j, const SplitRatios& r);
void from_json(const Json& j, SplitRatios& r);

// Serialized form used for manifests on disk (sorted keys, 2-space indent).
std::string SerializeManifest(const DatasetManifest& m);

}  // namespace detoxforge::corpus

// PlatformTag has no default state, so the types holding one are converted
// through adl_serializer specializations instead of free from_json.
namespace nlohmann {
#define DETOXFORGE_CORPUS_SERIALIZER(Type)                         \
  template <>                                                      \
  struct adl_serializer<detoxforge::corpus::Type> {                \
    static void to_json(json& j, const detoxforge::corpus::Type& v); \
    static detoxforge::corpus::Type from_json(const json& j);      \
  };
DETOXFORGE_CORPUS_SERIALIZER(PlatformTag)
DETOXFORGE_CORPUS_SERIALIZER(TextSample)
DETOXFORGE_CORPUS_SERIALIZER(ParallelRecord)
DETOXFORGE_CORPUS_SERIALIZER(DatasetManifest)
#undef DETOXFORGE_CORPUS_SERIALIZER
}  // namespace nlohmann
