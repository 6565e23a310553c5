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

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/util.hpp"

namespace detoxforge::metrics {

// Lowercases ASCII letters. Maximal runs of letters, digits and non-ASCII
// codepoints form tokens; every other non-space character is a token alone.
std::vector<std::string> Tokenize(std::string_view text);

enum class Smoothing { None, AddEpsilon };
enum class BleuLevel { Corpus, SentenceAveraged };
std::string_view ToString(Smoothing s);
std::string_view ToString(BleuLevel l);
Smoothing ParseSmoothing(std::string_view s);
BleuLevel ParseBleuLevel(std::string_view s);

// Additive constant used by AddEpsilon on every n-gram order.
inline constexpr double kBleuEpsilon = 0.1;

struct BleuConfig {
  int max_order = 4;
  Smoothing smoothing = Smoothing::None;
  BleuLevel level = BleuLevel::Corpus;
};

// Pooled clipped n-gram counts. Merging is associative and commutative, so
// corpus statistics can be accumulated in any order or in parallel.
struct BleuStats {
  std::vector<std::size_t> matches;  // per order, index 0 is unigrams
  std::vector<std::size_t> totals;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  explicit BleuStats(int max_order = 4);
  static BleuStats ForPair(const std::vector<std::string>& hyp, const std::vector<std::string>& ref, int max_order);
  BleuStats& operator+=(const BleuStats& other);
  // Score in [0,100] from these counts.
  double Score(Smoothing smoothing) const;
};

// Throws LengthMismatch for unequal list lengths, Empty for no pairs and
// OutOfRange for max_order < 1.
double Bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
            const BleuConfig& cfg = {});

// 100 * max(0, cosine). Throws DimensionMismatch or ZeroVector.
double ContentSimilarity(const std::vector<double>& a, const std::vector<double>& b);

// 100 * (true count) / n. Throws Empty.
double Rate(const std::vector<bool>& flags);
inline double StyleAccuracy(const std::vector<bool>& non_toxic) { return Rate(non_toxic); }
inline double FluencyRate(const std::vector<bool>& fluent) { return Rate(fluent); }

// acc * sim * fl / 10000, all in percent. Throws OutOfRange outside [0,100].
double JointMetric(double acc, double sim, double fl);

// Half-up rounding to two decimals, for the reporting boundary only.
double Round2(double x);

struct PlatformReport {
  std::string platform;  // "Overall" for aggregated rows
  bool overall = false;
  double acc = 0;
  double bertscore = 0;
  double sim = 0;
  double fluency = 0;
  double joint = 0;
  double bleu = 0;
  std::size_t n = 0;
};

inline constexpr std::string_view kOverall = "Overall";

// Unweighted mean of every metric across platforms; n is summed. Throws Empty
// for no rows and BadInput if an Overall row is passed in.
PlatformReport AggregateOverall(const std::vector<PlatformReport>& rows);

// Values rounded to two decimals.
Json ToJson(const PlatformReport& row);
// Aligned text table, columns Acc BS Sim Fl J BL.
std::string FormatTable(const std::vector<PlatformReport>& rows);

// Phrases written entirely in capitals (two or more letters) match as
// case-sensitive whole words; all others match as case-insensitive
// substrings. Typographic apostrophes are folded to ASCII before matching.
class RefusalLexicon {
 public:
  RefusalLexicon();  // fulfill, AI, I apologize, I understand, I'm sorry
  explicit RefusalLexicon(std::vector<std::string> phrases);

  const std::vector<std::string>& phrases() const { return phrases_; }
  bool Matches(std::string_view text) const;

 private:
  std::vector<std::string> phrases_;
};

bool DetectRefusal(std::string_view text, const RefusalLexicon& lexicon = RefusalLexicon());

}  // namespace detoxforge::metrics
