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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_support.hpp"

namespace detoxforge::filtration {
namespace {

using corpus::Label;
using testing::ClassifierSpec;
using testing::GatewayRig;

std::vector<EnsemblePrediction> Preds(unsigned bits, int n) {
  std::vector<EnsemblePrediction> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({"c" + std::to_string(i), (bits >> i) & 1u ? Label::Toxic : Label::NonToxic});
  }
  return out;
}

TEST(FilterPairTest, MatchesTheRuleOnEveryThreeClassifierCase) {
  int kept = 0;
  for (unsigned src = 0; src < 8; ++src) {
    for (unsigned tgt = 0; tgt < 8; ++tgt) {
      const auto d = FilterPair(Preds(src, 3), Preds(tgt, 3));
      EXPECT_EQ(d.keep, oracle::FilterKeep(src, tgt, 3)) << src << "/" << tgt;
      if (d.keep) {
        EXPECT_EQ(d.reason, Reason::Kept);
        ++kept;
      } else if (src == 0) {
        EXPECT_EQ(d.reason, Reason::SourceNeverToxic);
      } else {
        EXPECT_EQ(d.reason, Reason::TargetSometimesToxic);
      }
    }
  }
  // 7 toxic-source patterns times the single clean-target pattern.
  EXPECT_EQ(kept, 7);
}

TEST(FilterPairTest, FlippingAPredictionTowardTheDesiredSideNeverDropsAKeptPair) {
  Rng rng(20260101);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + static_cast<int>(rng.UniformBelow(5));
    const unsigned mask = (1u << n) - 1;
    const auto src = static_cast<unsigned>(rng.UniformBelow(mask + 1));
    const auto tgt = static_cast<unsigned>(rng.UniformBelow(mask + 1));
    const bool before = FilterPair(Preds(src, n), Preds(tgt, n)).keep;
    const unsigned bit = 1u << rng.UniformBelow(n);
    // More toxic source or cleaner target can only help.
    const bool src_up = FilterPair(Preds(src | bit, n), Preds(tgt, n)).keep;
    const bool tgt_down = FilterPair(Preds(src, n), Preds(tgt & ~bit, n)).keep;
    ASSERT_TRUE(!before || src_up);
    ASSERT_TRUE(!before || tgt_down);
    // And the opposite flips can only hurt.
    const bool src_down = FilterPair(Preds(src & ~bit, n), Preds(tgt, n)).keep;
    const bool tgt_up = FilterPair(Preds(src, n), Preds(tgt | bit, n)).keep;
    ASSERT_TRUE(before || !src_down);
    ASSERT_TRUE(before || !tgt_up);
  }
}

TEST(FilterPairTest, RejectsEmptyOrMismatchedEnsembles) {
  EXPECT_THROW(FilterPair({}, {}), Error);
  auto a = Preds(1, 2);
  auto b = Preds(1, 3);
  try {
    FilterPair(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MismatchedEnsembles);
  }
  auto dup = Preds(0, 2);
  dup[1].classifier_id = "c0";
  EXPECT_THROW(FilterPair(dup, dup), Error);
}

corpus::ParallelRecord Record(const std::string& id, const std::string& platform, const std::string& source,
                              const std::string& target, Label label = Label::Toxic) {
  corpus::TextSample s{id, source, corpus::PlatformTag::Parse(platform), "1", label};
  return corpus::ParallelRecord{s, target, label, std::nullopt, std::nullopt, {}};
}

// Classifier cN flags any text containing "!N"; "boom" fails the request.
struct FilterRig : GatewayRig {
  FilterRig() : GatewayRig({ClassifierSpec("c1"), ClassifierSpec("c2"), ClassifierSpec("c3")}) {
    for (int i = 1; i <= 3; ++i) {
      transport->Route("http://fake.test/c" + std::to_string(i), [i](auto&, const Json& body) {
        const auto text = body["text"].get<std::string>();
        if (text.find("boom") != std::string::npos) return testing::JsonReply(Json::object(), 400);
        const bool toxic = text.find("!" + std::to_string(i)) != std::string::npos;
        return testing::LabelReply("toxic", toxic ? 0.9 : 0.1);
      });
    }
  }
};

std::vector<corpus::ParallelRecord> Sample() {
  return {
      Record("a", "gab", "hate !1", "fine"),                 // kept
      Record("b", "gab", "mild", "fine"),                    // source never toxic
      Record("c", "reddit", "hate !2 !3", "still !3"),       // target sometimes toxic
      Record("d", "reddit", "fine", "hate !2", Label::NonToxic),  // kept; toxic side is the target
      Record("e", "reddit", "boom", "fine"),                 // errored
  };
}

TEST(RunFilterTest, CountsDecisionsPerPlatform) {
  FilterRig rig;
  const auto res = RunFilter(*rig.gw, Sample(), {"c1", "c2", "c3"});
  ASSERT_EQ(res.kept.size(), 2u);
  EXPECT_EQ(res.kept[0].source.id, "a");
  EXPECT_EQ(res.kept[1].source.id, "d");
  ASSERT_EQ(res.decisions.size(), 5u);
  EXPECT_FALSE(res.decisions[4].has_value());
  EXPECT_EQ(res.decisions[1]->reason, Reason::SourceNeverToxic);
  EXPECT_EQ(res.decisions[2]->reason, Reason::TargetSometimesToxic);
  ASSERT_EQ(res.errors.size(), 1u);
  EXPECT_EQ(res.errors[0].record_id, "e");
  EXPECT_EQ(res.errors[0].code, Errc::RemoteError);

  EXPECT_EQ(res.stats.per_platform.at("gab"), (PlatformFilterStats{2, 1, 1, 0, 0}));
  EXPECT_EQ(res.stats.per_platform.at("reddit"), (PlatformFilterStats{3, 1, 0, 1, 1}));
  const auto total = res.stats.total();
  EXPECT_EQ(total.original, total.kept + total.dropped());
  const auto j = res.stats.ToJson();
  EXPECT_EQ(j["total"]["original"], 5);
  EXPECT_EQ(j["total"]["filtered"], 2);
  EXPECT_EQ(j["platforms"]["reddit"]["errored"], 1);
}

TEST(RunFilterTest, AbortPolicyRethrowsWithTheRecordId) {
  FilterRig rig;
  try {
    RunFilter(*rig.gw, Sample(), {"c1", "c2", "c3"}, {ErrorPolicy::Abort, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RemoteError);
    EXPECT_NE(std::string(e.what()).find("record e"), std::string::npos);
  }
}

TEST(RunFilterTest, ParallelRunsMatchSerialRuns) {
  std::vector<corpus::ParallelRecord> records;
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    std::string src = "s" + std::to_string(i);
    std::string tgt = "t" + std::to_string(i);
    for (int c = 1; c <= 3; ++c) {
      if (rng.UniformBelow(2)) src += " !" + std::to_string(c);
      if (rng.UniformBelow(4) == 0) tgt += " !" + std::to_string(c);
    }
    records.push_back(Record("r" + std::to_string(1000 + i), i % 2 ? "gab" : "wiki", src, tgt));
  }
  FilterRig serial;
  FilterRig parallel;
  const auto a = RunFilter(*serial.gw, records, {"c1", "c2", "c3"}, {ErrorPolicy::SkipAndLog, 1});
  const auto b = RunFilter(*parallel.gw, records, {"c1", "c2", "c3"}, {ErrorPolicy::SkipAndLog, 4});
  EXPECT_EQ(a.kept, b.kept);
  EXPECT_EQ(a.stats.ToJson(), b.stats.ToJson());
  EXPECT_GT(a.kept.size(), 0u);
  EXPECT_LT(a.kept.size(), records.size());
}

TEST(RunFilterTest, ValidatesTheEnsemble) {
  GatewayRig rig({ClassifierSpec("c1"), testing::Spec("chat", gateway::EndpointKind::Chat)});
  const std::vector<corpus::ParallelRecord> none;
  auto code = [&](const std::vector<std::string>& ensemble) {
    try {
      RunFilter(*rig.gw, none, ensemble);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  EXPECT_EQ(code({}), Errc::EmptyEnsemble);
  EXPECT_EQ(code({"c1", "c1"}), Errc::MismatchedEnsembles);
  EXPECT_EQ(code({"c1", "chat"}), Errc::WrongEndpointKind);
}

TEST(FilterStatsTest, MergeAddsPlatformwise) {
  FilterStats a;
  a.per_platform["gab"] = {10, 4, 3, 2, 1};
  FilterStats b;
  b.per_platform["gab"] = {5, 5, 0, 0, 0};
  b.per_platform["wiki"] = {1, 0, 1, 0, 0};
  a.Merge(b);
  EXPECT_EQ(a.per_platform["gab"], (PlatformFilterStats{15, 9, 3, 2, 1}));
  EXPECT_EQ(a.total(), (PlatformFilterStats{16, 9, 4, 2, 1}));
}

}  // namespace
}  // namespace detoxforge::filtration
