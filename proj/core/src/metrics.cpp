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

#include "detoxforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "detoxforge/error.hpp"

namespace detoxforge::metrics {
namespace {

bool IsWordCp(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool IsSpaceCp(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' || c == 0xA0;
}

bool IsAsciiAlnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::map<std::vector<std::string>, std::size_t> NGramCounts(const std::vector<std::string>& toks, int n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (toks.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++counts[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

std::string FoldApostrophes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    // U+2018 and U+2019 are E2 80 98 / E2 80 99.
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(s[i + 2]) == 0x98 || static_cast<unsigned char>(s[i + 2]) == 0x99)) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

bool IsAcronym(std::string_view p) {
  return p.size() >= 2 && std::all_of(p.begin(), p.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

bool WholeWordMatch(std::string_view text, std::string_view word) {
  for (std::size_t pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
    const bool left = pos == 0 || !IsAsciiAlnum(text[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right = end == text.size() || !IsAsciiAlnum(text[end]);
    if (left && right) return true;
  }
  return false;
}

void CheckPercent(double v, std::string_view what) {
  if (!(v >= 0 && v <= 100)) {
    std::ostringstream ss;
    ss << what << " = " << v << " outside [0,100]";
    throw Error(Errc::OutOfRange, ss.str());
  }
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::u32string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(EncodeUtf8(word));
      word.clear();
    }
  };
  for (char32_t c : DecodeUtf8(text)) {
    if (c >= 'A' && c <= 'Z') c = c - 'A' + 'a';
    if (IsWordCp(c)) {
      word.push_back(c);
    } else {
      flush();
      if (!IsSpaceCp(c)) out.push_back(EncodeUtf8(c));
    }
  }
  flush();
  return out;
}

std::string_view ToString(Smoothing s) { return s == Smoothing::None ? "none" : "add-epsilon"; }
std::string_view ToString(BleuLevel l) { return l == BleuLevel::Corpus ? "corpus" : "sentence"; }

Smoothing ParseSmoothing(std::string_view s) {
  if (s == "none") return Smoothing::None;
  if (s == "add-epsilon" || s == "epsilon") return Smoothing::AddEpsilon;
  throw Error(Errc::Config, "unknown BLEU smoothing \"" + std::string(s) + "\"");
}

BleuLevel ParseBleuLevel(std::string_view s) {
  if (s == "corpus") return BleuLevel::Corpus;
  if (s == "sentence") return BleuLevel::SentenceAveraged;
  throw Error(Errc::Config, "unknown BLEU level \"" + std::string(s) + "\"");
}

BleuStats::BleuStats(int max_order) {
  if (max_order < 1) throw Error(Errc::OutOfRange, "BLEU max_order must be >= 1");
  matches.assign(static_cast<std::size_t>(max_order), 0);
  totals.assign(static_cast<std::size_t>(max_order), 0);
}

BleuStats BleuStats::ForPair(const std::vector<std::string>& hyp, const std::vector<std::string>& ref,
                             int max_order) {
  BleuStats s(max_order);
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (int n = 1; n <= max_order; ++n) {
    const auto h = NGramCounts(hyp, n);
    const auto r = NGramCounts(ref, n);
    for (const auto& [gram, count] : h) {
      s.totals[n - 1] += count;
      auto it = r.find(gram);
      if (it != r.end()) s.matches[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  if (o.matches.size() != matches.size()) throw Error(Errc::LengthMismatch, "BLEU stats of different orders");
  for (std::size_t i = 0; i < matches.size(); ++i) {
    matches[i] += o.matches[i];
    totals[i] += o.totals[i];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

double BleuStats::Score(Smoothing smoothing) const {
  if (hyp_len == 0) return 0.0;
  double log_sum = 0;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    double p;
    if (smoothing == Smoothing::AddEpsilon) {
      p = (static_cast<double>(matches[i]) + kBleuEpsilon) / (static_cast<double>(totals[i]) + kBleuEpsilon);
    } else {
      if (matches[i] == 0) return 0.0;
      p = static_cast<double>(matches[i]) / static_cast<double>(totals[i]);
    }
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(hyp_len);
  const double r = static_cast<double>(ref_len);
  const double bp = c <= r ? std::exp(1.0 - r / c) : 1.0;
  const double score = 100.0 * bp * std::exp(log_sum / static_cast<double>(matches.size()));
  return std::clamp(score, 0.0, 100.0);
}

double Bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
            const BleuConfig& cfg) {
  if (hypotheses.size() != references.size()) {
    throw Error(Errc::LengthMismatch, "BLEU got " + std::to_string(hypotheses.size()) + " hypotheses and " +
                                          std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw Error(Errc::Empty, "BLEU needs at least one pair");
  BleuStats pooled(cfg.max_order);
  double sentence_sum = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    auto s = BleuStats::ForPair(Tokenize(hypotheses[i]), Tokenize(references[i]), cfg.max_order);
    if (cfg.level == BleuLevel::SentenceAveraged) {
      sentence_sum += s.Score(cfg.smoothing);
    } else {
      pooled += s;
    }
  }
  if (cfg.level == BleuLevel::SentenceAveraged) return sentence_sum / static_cast<double>(hypotheses.size());
  return pooled.Score(cfg.smoothing);
}

double ContentSimilarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::DimensionMismatch, "vectors of dimension " + std::to_string(a.size()) + " and " +
                                             std::to_string(b.size()));
  }
  if (a.empty()) throw Error(Errc::ZeroVector, "empty vectors");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw Error(Errc::ZeroVector, "cosine of a zero vector is undefined");
  const double cos = dot / std::sqrt(na * nb);
  return 100.0 * std::clamp(cos, 0.0, 1.0);
}

double Rate(const std::vector<bool>& flags) {
  if (flags.empty()) throw Error(Errc::Empty, "rate of an empty list");
  const auto hits = std::count(flags.begin(), flags.end(), true);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(flags.size());
}

double JointMetric(double acc, double sim, double fl) {
  CheckPercent(acc, "acc");
  CheckPercent(sim, "sim");
  CheckPercent(fl, "fl");
  return acc * sim * fl / 10000.0;
}

double Round2(double x) {
  const double scaled = x * 100.0;
  const double nudge = 1e-9 * std::max(1.0, std::fabs(scaled));
  return std::floor(scaled + 0.5 + nudge) / 100.0;
}

PlatformReport AggregateOverall(const std::vector<PlatformReport>& rows) {
  if (rows.empty()) throw Error(Errc::Empty, "no platform rows to aggregate");
  PlatformReport out;
  out.platform = std::string(kOverall);
  out.overall = true;
  for (const auto& r : rows) {
    if (r.overall) throw Error(Errc::BadInput, "Overall rows cannot be aggregated again");
    out.acc += r.acc;
    out.bertscore += r.bertscore;
    out.sim += r.sim;
    out.fluency += r.fluency;
    out.joint += r.joint;
    out.bleu += r.bleu;
    out.n += r.n;
  }
  const double k = static_cast<double>(rows.size());
  out.acc /= k;
  out.bertscore /= k;
  out.sim /= k;
  out.fluency /= k;
  out.joint /= k;
  out.bleu /= k;
  return out;
}

Json ToJson(const PlatformReport& r) {
  return Json{{"platform", r.platform}, {"overall", r.overall},           {"acc", Round2(r.acc)},
              {"bertscore", Round2(r.bertscore)}, {"sim", Round2(r.sim)}, {"fluency", Round2(r.fluency)},
              {"joint", Round2(r.joint)},         {"bleu", Round2(r.bleu)}, {"n", r.n}};
}

std::string FormatTable(const std::vector<PlatformReport>& rows) {
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.platform.size());
  std::ostringstream ss;
  ss << std::left << std::setw(static_cast<int>(width)) << "Platform";
  for (const char* h : {"Acc", "BS", "Sim", "Fl", "J", "BL"}) ss << std::right << std::setw(8) << h;
  ss << std::right << std::setw(7) << "n" << '\n';
  ss << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    ss << std::left << std::setw(static_cast<int>(width)) << r.platform << std::right;
    for (double v : {r.acc, r.bertscore, r.sim, r.fluency, r.joint, r.bleu}) ss << std::setw(8) << Round2(v);
    ss << std::setw(7) << r.n << '\n';
  }
  return ss.str();
}

RefusalLexicon::RefusalLexicon() : RefusalLexicon({"fulfill", "AI", "I apologize", "I understand", "I'm sorry"}) {}

RefusalLexicon::RefusalLexicon(std::vector<std::string> phrases) : phrases_(std::move(phrases)) {
  if (phrases_.empty()) throw Error(Errc::Config, "refusal lexicon must be non-empty");
  for (auto& p : phrases_) {
    p = FoldApostrophes(Trim(p));
    if (p.empty()) throw Error(Errc::Config, "refusal lexicon contains an empty phrase");
  }
}

bool RefusalLexicon::Matches(std::string_view text) const {
  const auto folded = FoldApostrophes(text);
  const auto lower = ToLowerAscii(folded);
  for (const auto& p : phrases_) {
    if (IsAcronym(p)) {
      if (WholeWordMatch(folded, p)) return true;
    } else if (lower.find(ToLowerAscii(p)) != std::string::npos) {
      return true;
    }
  }
  return false;
}

bool DetectRefusal(std::string_view text, const RefusalLexicon& lexicon) { return lexicon.Matches(text); }

}  // namespace detoxforge::metrics
