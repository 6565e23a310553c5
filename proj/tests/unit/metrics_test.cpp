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

#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "detoxforge/evaluation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace detoxforge::metrics {
namespace {

using testing::ClassifierSpec;
using testing::GatewayRig;

TEST(TokenizeTest, SplitsWordsAndPunctuation) {
  EXPECT_EQ(Tokenize("Hello, World!"), (std::vector<std::string>{"hello", ",", "world", "!"}));
  EXPECT_EQ(Tokenize("  don't  "), (std::vector<std::string>{"don", "'", "t"}));
  EXPECT_EQ(Tokenize("Größe 42x"), (std::vector<std::string>{"größe", "42x"}));
  EXPECT_TRUE(Tokenize(" \t\n").empty());
}

using oracle::RandomSentence;

TEST(BleuTest, IdenticalCorporaScoreOneHundred) {
  const std::vector<std::string> xs{"the cat sat on the mat .", "a dog ran on the mat today"};
  EXPECT_DOUBLE_EQ(Bleu(xs, xs), 100.0);
  EXPECT_DOUBLE_EQ(Bleu(xs, xs, {4, Smoothing::AddEpsilon, BleuLevel::SentenceAveraged}), 100.0);
}

TEST(BleuTest, DisjointCorporaScoreZero) {
  EXPECT_DOUBLE_EQ(Bleu({"alpha beta gamma delta"}, {"one two three four"}), 0.0);
}

TEST(BleuTest, FrozenBrevityPenaltyValue) {
  // Every precision is 1 with add-epsilon, so the score is 100 * exp(1 - 4/3).
  EXPECT_NEAR(Bleu({"the cat sat"}, {"the cat sat down"}, {4, Smoothing::AddEpsilon, BleuLevel::Corpus}),
              71.6531310573789, 1e-9);
  EXPECT_DOUBLE_EQ(Bleu({"the cat sat"}, {"the cat sat down"}), 0.0);
}

TEST(BleuTest, AgreesWithBruteForceOnRandomCorpora) {
  Rng rng(99);
  for (int corpus = 0; corpus < 25; ++corpus) {
    std::vector<std::string> hyps, refs;
    const auto n = 1 + rng.UniformBelow(8);
    oracle::BleuCounts pooled;
    double sent_eps = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      hyps.push_back(RandomSentence(rng));
      refs.push_back(RandomSentence(rng));
      oracle::BleuAdd(pooled, hyps.back(), refs.back());
      oracle::BleuCounts one;
      oracle::BleuAdd(one, hyps.back(), refs.back());
      sent_eps += oracle::BleuScore(one, true);
    }
    EXPECT_NEAR(Bleu(hyps, refs), oracle::BleuScore(pooled, false), 1e-9);
    EXPECT_NEAR(Bleu(hyps, refs, {4, Smoothing::AddEpsilon, BleuLevel::Corpus}), oracle::BleuScore(pooled, true), 1e-9);
    EXPECT_NEAR(Bleu(hyps, refs, {4, Smoothing::AddEpsilon, BleuLevel::SentenceAveraged}),
                sent_eps / static_cast<double>(n), 1e-9);
  }
}

TEST(BleuTest, StatsMergeIsOrderIndependent) {
  Rng rng(5);
  std::vector<BleuStats> parts;
  for (int i = 0; i < 10; ++i) {
    parts.push_back(BleuStats::ForPair(Tokenize(RandomSentence(rng)), Tokenize(RandomSentence(rng)), 4));
  }
  BleuStats fwd, rev;
  for (const auto& p : parts) fwd += p;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) rev += *it;
  EXPECT_EQ(fwd.matches, rev.matches);
  EXPECT_EQ(fwd.totals, rev.totals);
  EXPECT_EQ(fwd.Score(Smoothing::AddEpsilon), rev.Score(Smoothing::AddEpsilon));
}

TEST(BleuTest, InputErrors) {
  EXPECT_THROW(Bleu({"a"}, {}), Error);
  EXPECT_THROW(Bleu({}, {}), Error);
  EXPECT_THROW(Bleu({"a"}, {"a"}, {0}), Error);
}

TEST(SimilarityTest, CosineScaledAndClamped) {
  EXPECT_DOUBLE_EQ(ContentSimilarity({1, 0}, {2, 0}), 100.0);
  EXPECT_NEAR(ContentSimilarity({1, 0}, {1, 1}), 100.0 / std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(ContentSimilarity({1, 0}, {-1, 0}), 0.0);
  EXPECT_THROW(ContentSimilarity({1}, {1, 2}), Error);
  EXPECT_THROW(ContentSimilarity({0, 0}, {1, 2}), Error);
}

TEST(JointMetricTest, ReproducesPublishedRows) {
  EXPECT_DOUBLE_EQ(Round2(JointMetric(44, 88.47, 76)), 29.58);
  EXPECT_DOUBLE_EQ(Round2(JointMetric(79, 79.04, 93)), 58.07);
  EXPECT_DOUBLE_EQ(JointMetric(100, 100, 100), 100.0);
  EXPECT_THROW(JointMetric(101, 50, 50), Error);
  EXPECT_THROW(JointMetric(50, -1, 50), Error);
}

TEST(JointMetricTest, MonotoneInEachArgument) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.UniformBelow(10001) / 100.0;
    const double s = rng.UniformBelow(10001) / 100.0;
    const double f = rng.UniformBelow(10001) / 100.0;
    const double j = JointMetric(a, s, f);
    EXPECT_LE(j, std::min({a, s, f}) + 1e-9);
    EXPECT_LE(j, JointMetric(std::min(100.0, a + 1), s, f));
  }
}

TEST(OverallTest, ArithmeticMeanOfPlatformRows) {
  const std::vector<double> acc{44, 79, 78, 82, 80, 24, 88};
  const std::vector<double> joint{29.58, 58.07, 64.16, 60.22, 50.99, 20.62, 68.38};
  std::vector<PlatformReport> rows;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    PlatformReport r;
    r.platform = "p" + std::to_string(i);
    r.acc = acc[i];
    r.joint = joint[i];
    r.n = 10;
    rows.push_back(r);
  }
  const auto o = AggregateOverall(rows);
  EXPECT_DOUBLE_EQ(Round2(o.acc), 67.86);
  EXPECT_DOUBLE_EQ(Round2(o.joint), 50.29);
  EXPECT_EQ(o.n, 70u);
  EXPECT_TRUE(o.overall);
  EXPECT_THROW(AggregateOverall({o}), Error);
  EXPECT_THROW(AggregateOverall({}), Error);
}

TEST(RoundTest, HalfUpAtTwoDecimals) {
  EXPECT_DOUBLE_EQ(Round2(1.005), 1.01);
  EXPECT_DOUBLE_EQ(Round2(2.675), 2.68);
  EXPECT_DOUBLE_EQ(Round2(67.857142857), 67.86);
  EXPECT_DOUBLE_EQ(Round2(0.0), 0.0);
}

Json Fixtures() { return Json::parse(ReadFile(testing::FixtureDir() / "refusal_fixtures.json")); }

TEST(RefusalTest, LexiconRules) {
  EXPECT_TRUE(DetectRefusal("As an AI, no."));
  EXPECT_FALSE(DetectRefusal("I said it again"));  // "ai" inside "said" is not the word AI
  EXPECT_TRUE(DetectRefusal("i apologize for that"));
  EXPECT_TRUE(DetectRefusal("I’m sorry, no."));
  EXPECT_TRUE(DetectRefusal("I cannot FULFILL that"));
  EXPECT_FALSE(DetectRefusal("I'm so sorry to hear it"));
  EXPECT_EQ(RefusalLexicon().phrases().size(), 5u);
}

TEST(RefusalTest, DetoxAndBaselineOutputsAreNotFlagged) {
  const auto fx = Fixtures();
  for (const char* key : {"detox_outputs", "baseline_outputs"}) {
    for (const auto& t : fx[key]) EXPECT_FALSE(DetectRefusal(t.get<std::string>())) << t;
  }
}

TEST(RefusalTest, ChatModelOutputs) {
  const auto fx = Fixtures();
  int flagged = 0;
  for (const auto& t : fx["chat_model_outputs"]) flagged += DetectRefusal(t.get<std::string>());
  EXPECT_EQ(flagged, 7);
}

TEST(RefusalTest, GenericStatementsFromTheFixture) {
  const auto fx = Fixtures();
  int flagged = 0;
  for (const auto& t : fx["generic_statements"]) flagged += DetectRefusal(t.get<std::string>());
  // The last statement uses none of the five phrases.
  EXPECT_EQ(flagged, static_cast<int>(fx["generic_statements"].size()) - 1);
}

TEST(RefusalTest, AppendingNonWordTextNeverUnflags) {
  const auto fx = Fixtures();
  Rng rng(11);
  const std::string tails[] = {".", "!!", " :)", " --", "?", " 123"};
  for (const auto& t : fx["generic_statements"]) {
    const auto text = t.get<std::string>();
    const bool base = DetectRefusal(text);
    for (int i = 0; i < 5; ++i) {
      EXPECT_EQ(DetectRefusal(text + tails[rng.UniformBelow(6)]), base);
    }
  }
}

// Style flags text containing "toxic"; fluency rejects text containing "@@";
// embeddings are letter-count vectors so similarity is easy to predict.
struct EvalRig : GatewayRig {
  EvalRig()
      : GatewayRig({ClassifierSpec("style"), ClassifierSpec("fluency", "fluent", "disfluent"),
                    testing::Spec("sim", gateway::EndpointKind::Embedder),
                    testing::Spec("bs", gateway::EndpointKind::Embedder)}) {
    transport->Route("http://fake.test/style", [](auto&, const Json& b) {
      return testing::LabelReply("toxic", b["text"].get<std::string>().find("toxic") != std::string::npos ? 0.9 : 0.1);
    });
    transport->Route("http://fake.test/fluency", [](auto&, const Json& b) {
      return testing::LabelReply("fluent", b["text"].get<std::string>().find("@@") != std::string::npos ? 0.2 : 0.8);
    });
    auto embed = [](auto&, const Json& b) { return testing::VectorReply(Letters(b["text"].get<std::string>())); };
    transport->Route("http://fake.test/sim", embed);
    transport->Route("http://fake.test/bs", embed);
  }

  static std::vector<double> Letters(const std::string& s) {
    std::vector<double> v(27, 0.0);
    for (char c : s) v[std::isalpha(static_cast<unsigned char>(c)) ? std::tolower(c) - 'a' : 26] += 1;
    return v;
  }
};

TEST(EvaluateTest, PerPlatformRowsAndOverall) {
  EvalRig rig;
  const std::vector<EvalItem> items{
      {"gab", "you toxic idiot", "you are wrong", std::string("you are wrong")},
      {"gab", "toxic stuff", "toxic stuff", std::string("bad stuff")},
      {"wiki", "shut up fool", "please stop @@", std::string("please stop")},
      {"wiki", "stupid edit", "I'm sorry, I cannot help", std::string("bad edit")},
  };
  const auto report = Evaluate(*rig.gw, items, {"style", "fluency", "sim", "bs"});
  ASSERT_EQ(report.platforms.size(), 2u);
  const auto& gab = report.platforms[0];
  const auto& wiki = report.platforms[1];
  EXPECT_EQ(gab.platform, "gab");
  EXPECT_DOUBLE_EQ(gab.acc, 50.0);
  EXPECT_DOUBLE_EQ(gab.fluency, 100.0);
  const double sim_gab = (ContentSimilarity(EvalRig::Letters("you toxic idiot"), EvalRig::Letters("you are wrong")) +
                          100.0) / 2;
  EXPECT_NEAR(gab.sim, sim_gab, 1e-12);
  EXPECT_NEAR(gab.bertscore, sim_gab, 1e-12);
  EXPECT_NEAR(gab.joint, JointMetric(50, sim_gab, 100), 1e-12);
  EXPECT_DOUBLE_EQ(wiki.acc, 100.0);
  EXPECT_DOUBLE_EQ(wiki.fluency, 50.0);
  // The refusal is left out of reference BLEU.
  EXPECT_EQ(report.bleu_counts.at("wiki").refusals_excluded, 1u);
  EXPECT_EQ(report.bleu_counts.at("wiki").pairs, 1u);
  EXPECT_NEAR(wiki.bleu, Bleu({"please stop @@"}, {"please stop"}), 1e-12);
  EXPECT_NEAR(report.overall.acc, 75.0, 1e-12);
  EXPECT_NEAR(report.overall.joint, (gab.joint + wiki.joint) / 2, 1e-12);

  const auto j = report.ToJson();
  EXPECT_EQ(j["bleu_mode"], "reference");
  EXPECT_EQ(j["platforms"].size(), 2u);
  EXPECT_EQ(j["overall"]["acc"], 75.0);
}

TEST(EvaluateTest, SelfModeComparesWithSources) {
  EvalRig rig;
  const std::vector<EvalItem> items{{"gab", "a b c d e", "a b c d e", std::nullopt}};
  EvalOptions opts;
  opts.bleu_mode = BleuMode::Self;
  const auto report = Evaluate(*rig.gw, items, {"style", "fluency", "sim", "bs"}, opts);
  EXPECT_DOUBLE_EQ(report.platforms[0].bleu, 100.0);
  EXPECT_DOUBLE_EQ(report.platforms[0].sim, 100.0);
  EXPECT_THROW(Evaluate(*rig.gw, items, {"style", "fluency", "sim", "bs"}), Error);
  EXPECT_THROW(Evaluate(*rig.gw, {}, {"style", "fluency", "sim", "bs"}, opts), Error);
}

TEST(EvaluateTest, ParallelMatchesSerial) {
  EvalRig a, b;
  std::vector<EvalItem> items;
  Rng rng(1);
  for (int i = 0; i < 40; ++i) {
    items.push_back({i % 3 ? "gab" : "fox", RandomSentence(rng) + (i % 4 ? "" : " toxic"), RandomSentence(rng),
                     RandomSentence(rng)});
  }
  EvalOptions serial;
  EvalOptions par;
  par.jobs = 4;
  EXPECT_EQ(Evaluate(*a.gw, items, {"style", "fluency", "sim", "bs"}, serial).ToJson(),
            Evaluate(*b.gw, items, {"style", "fluency", "sim", "bs"}, par).ToJson());
}

}  // namespace
}  // namespace detoxforge::metrics
