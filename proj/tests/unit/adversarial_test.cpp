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

#include "detoxforge/adversarial.hpp"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <map>
#include <sstream>

#include "detoxforge/error.hpp"
#include "test_support.hpp"

namespace detoxforge::adversarial {
namespace {

AdversaryConfig SmallConfig() {
  AdversaryConfig c;
  c.toxic_words = {"idiot", "jerk", "dumb", "scum"};
  c.templates = {"You <word>", "What a <word> move", "<word>!", "Such <word>"};
  c.perturb_chars = {"@", "#", "*"};
  c.n = 5000;
  c.seed = 42;
  return c;
}

std::size_t Codepoints(std::string_view s) { return DecodeUtf8(s).size(); }

std::size_t EditDistance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::u32string U32(std::string_view s) {
  auto v = DecodeUtf8(s);
  return {v.begin(), v.end()};
}

// Upper-tail p-value of the chi-square statistic against a uniform law.
double UniformityP(const std::map<std::string, int>& counts, std::size_t categories) {
  EXPECT_EQ(counts.size(), categories);
  double total = 0;
  for (const auto& [_, c] : counts) total += c;
  const double expected = total / static_cast<double>(categories);
  double stat = 0;
  for (const auto& [_, c] : counts) stat += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(categories - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

TEST(PerturbTest, InsertionAndReplacement) {
  EXPECT_EQ(Perturb("idiot", "@", 0, Perturbation::Insertion), "@idiot");
  EXPECT_EQ(Perturb("idiot", "@", 5, Perturbation::Insertion), "idiot@");
  EXPECT_EQ(Perturb("idiot", "@", 2, Perturbation::Replacement), "id@ot");
  EXPECT_EQ(Perturb("größe", "*", 2, Perturbation::Replacement), "gr*ße");
  EXPECT_EQ(Perturb("größe", "€", 3, Perturbation::Insertion), "grö€ße");
  EXPECT_THROW(Perturb("idiot", "@", 6, Perturbation::Insertion), Error);
  EXPECT_THROW(Perturb("idiot", "@", 5, Perturbation::Replacement), Error);
}

TEST(SituateTest, FillsTheSlot) {
  EXPECT_EQ(Situate("You are a <word> today", "j@rk"), "You are a j@rk today");
  EXPECT_EQ(Situate("<word>", "x"), "x");
}

TEST(TestbedTest, EverySentenceRespectsTheInvariants) {
  const auto cfg = SmallConfig();
  const auto items = GenerateTestbed(cfg);
  ASSERT_EQ(items.size(), 5000u);
  for (const auto& s : items) {
    const auto len = Codepoints(s.original_word);
    EXPECT_EQ(EditDistance(U32(s.original_word), U32(s.perturbed_word)), 1u) << s.perturbed_word;
    if (s.mode == Perturbation::Insertion) {
      EXPECT_LE(s.index, len);
      EXPECT_EQ(Codepoints(s.perturbed_word), len + 1);
    } else {
      EXPECT_LT(s.index, len);
      EXPECT_EQ(Codepoints(s.perturbed_word), len);
    }
    EXPECT_EQ(s.perturbed_word, Perturb(s.original_word, s.character, s.index, s.mode));
    EXPECT_EQ(s.sentence, Situate(s.template_text, s.perturbed_word));
    // The clean word never survives as a token of the sentence.
    std::istringstream tokens(s.sentence);
    for (std::string tok; tokens >> tok;) EXPECT_NE(tok, s.original_word) << s.sentence;
  }
}

TEST(TestbedTest, SameSeedSameBytes) {
  const auto cfg = SmallConfig();
  const auto a = SerializeTestbed(GenerateTestbed(cfg), true);
  const auto b = SerializeTestbed(GenerateTestbed(cfg), true);
  EXPECT_EQ(a, b);
  auto other = cfg;
  other.seed = 43;
  EXPECT_NE(a, SerializeTestbed(GenerateTestbed(other), true));
}

TEST(TestbedTest, DrawsAreUniform) {
  auto cfg = SmallConfig();
  cfg.n = 20000;
  const auto items = GenerateTestbed(cfg);
  std::map<std::string, int> words, templates, chars, modes;
  for (const auto& s : items) {
    ++words[s.original_word];
    ++templates[s.template_text];
    ++chars[s.character];
    ++modes[std::string(ToString(s.mode))];
  }
  constexpr double kAlpha = 0.001;
  EXPECT_GT(UniformityP(words, 4), kAlpha);
  EXPECT_GT(UniformityP(templates, 4), kAlpha);
  EXPECT_GT(UniformityP(chars, 3), kAlpha);
  EXPECT_GT(UniformityP(modes, 2), kAlpha);
}

TEST(TestbedTest, PositionsAreUniformWithinEachMode) {
  AdversaryConfig cfg;
  cfg.toxic_words = {"abcd"};
  cfg.templates = {"<word>"};
  cfg.perturb_chars = {"#"};
  cfg.n = 20000;
  cfg.seed = 9;
  std::map<std::string, int> ins, rep;
  for (const auto& s : GenerateTestbed(cfg)) {
    (s.mode == Perturbation::Insertion ? ins : rep)[std::to_string(s.index)]++;
  }
  EXPECT_GT(UniformityP(ins, 5), 0.001);
  EXPECT_GT(UniformityP(rep, 4), 0.001);
}

TEST(ConfigTest, ValidateRejectsBadConfigs) {
  auto code = [](AdversaryConfig c) {
    try {
      c.Validate();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  EXPECT_EQ(code(SmallConfig()), Errc::Io);
  auto c = SmallConfig();
  c.toxic_words.clear();
  EXPECT_EQ(code(c), Errc::ConfigInvalid);
  c = SmallConfig();
  c.templates.push_back("no slot here");
  EXPECT_EQ(code(c), Errc::ConfigInvalid);
  c = SmallConfig();
  c.templates.push_back("<word> and <word>");
  EXPECT_EQ(code(c), Errc::ConfigInvalid);
  c = SmallConfig();
  c.perturb_chars.push_back("ab");
  EXPECT_EQ(code(c), Errc::ConfigInvalid);
  c = SmallConfig();
  c.perturb_chars.push_back("i");  // occurs in "idiot"
  EXPECT_EQ(code(c), Errc::ConfigInvalid);
  c = SmallConfig();
  c.templates.push_back("you jerk <word>");
  EXPECT_EQ(code(c), Errc::ConfigInvalid);
}

TEST(ConfigTest, JsonRoundTripAndShippedDefault) {
  const auto cfg = SmallConfig();
  const auto back = AdversaryConfig::FromJson(cfg.ToJson());
  EXPECT_EQ(back.toxic_words, cfg.toxic_words);
  EXPECT_EQ(back.templates, cfg.templates);
  EXPECT_EQ(back.perturb_chars, cfg.perturb_chars);
  EXPECT_EQ(back.n, cfg.n);
  EXPECT_EQ(back.seed, cfg.seed);
  const auto shipped = AdversaryConfig::Load(testing::SourceDir() / "data" / "adversarial_default.json");
  EXPECT_NO_THROW(shipped.Validate());
  EXPECT_EQ(shipped.n, 5000u);
}

TEST(RedactionTest, WordsAreMaskedWithoutAcknowledgment) {
  const auto items = GenerateTestbed(SmallConfig());
  const auto redacted = SerializeTestbed(items, false);
  for (const auto& w : SmallConfig().toxic_words) EXPECT_EQ(redacted.find(w.substr(0, 3)), std::string::npos) << w;
  const auto j = ToJson(items[0], false);
  EXPECT_EQ(j["original_word"], kRedactionMask);
  EXPECT_EQ(j["perturbed_word"], kRedactionMask);
  EXPECT_EQ(j["sentence"], Situate(items[0].template_text, kRedactionMask));
  EXPECT_TRUE(j["redacted"].get<bool>());
  const auto full = ToJson(items[0], true);
  EXPECT_EQ(full["perturbed_word"], items[0].perturbed_word);
  EXPECT_FALSE(full.contains("redacted"));
}

TEST(CuratedTest, ShippedSuiteLoadsAndRedacts) {
  const auto suite = CuratedSuite(testing::SourceDir() / "data" / "curated_adversaries.json");
  ASSERT_EQ(suite.size(), 15u);
  for (const auto& c : suite) {
    EXPECT_EQ(c.text.substr(c.token_offset, c.token.size()), c.token);
    EXPECT_EQ(c.responses.size(), 3u);
    const auto j = ToJson(c, false);
    EXPECT_EQ(j["text"].get<std::string>().find(c.token), std::string::npos);
    for (const auto& r : j["responses"]) EXPECT_EQ(r["text"], kRedactionMask);
  }
}

TEST(CuratedTest, MissingOrInconsistentFixtures) {
  testing::TempDir dir;
  try {
    CuratedSuite(dir / "none.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::FixtureMissing);
  }
  AtomicWriteFile(dir / "bad.json",
                  R"({"entries":[{"id":"x","text":"abc","token":"zz","token_offset":0,"responses":[]}]})");
  try {
    CuratedSuite(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigInvalid);
  }
}

}  // namespace
}  // namespace detoxforge::adversarial
