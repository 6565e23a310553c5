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

#include "detoxforge/job_store.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "detoxforge/error.hpp"
#include "test_support.hpp"

namespace detoxforge::service {
namespace {

using testing::TempDir;

void AppendRaw(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::app);
  out << bytes;
}

ReviewRecord Review(const std::string& job, Detoxifiability d, const std::string& rating) {
  ReviewRecord r;
  r.job_id = job;
  r.reviewer_id = "rev-1";
  r.detoxifiability = d;
  r.rating = rating;
  return r;
}

TEST(JobStoreTest, LifecycleSurvivesReopen) {
  TempDir dir;
  std::string done_id, failed_id, queued_id;
  {
    JobStore store(dir.path());
    done_id = store.Create(JobKind::Detox, Json{{"text", "a"}}).id;
    failed_id = store.Create(JobKind::Evaluate, Json::object()).id;
    queued_id = store.Create(JobKind::Adversarial, Json::object()).id;
    store.MarkRunning(done_id);
    const auto done = store.Complete(done_id, Json{{"rewrite", "b"}});
    EXPECT_EQ(done.state, JobState::Done);
    EXPECT_TRUE(done.started_at && done.finished_at);
    store.MarkRunning(failed_id);
    store.Fail(failed_id, "boom");
  }
  JobStore reopened(dir.path());
  const auto jobs = reopened.List();
  ASSERT_EQ(jobs.size(), 3u);
  EXPECT_EQ(jobs[0].id, done_id);
  EXPECT_EQ(jobs[0].result.value(), (Json{{"rewrite", "b"}}));
  EXPECT_EQ(jobs[0].payload, (Json{{"text", "a"}}));
  EXPECT_EQ(jobs[1].state, JobState::Failed);
  EXPECT_EQ(jobs[1].error.value(), "boom");
  EXPECT_EQ(jobs[2].state, JobState::Queued);
  EXPECT_EQ(reopened.pending_on_load(), std::vector<std::string>{queued_id});
}

TEST(JobStoreTest, RunningJobsBecomeInterruptedFailures) {
  TempDir dir;
  std::string id;
  {
    JobStore store(dir.path());
    id = store.Create(JobKind::Roundtrip, Json::object()).id;
    store.MarkRunning(id);
  }
  {
    JobStore store(dir.path());
    EXPECT_EQ(store.Get(id)->state, JobState::Failed);
    EXPECT_EQ(store.Get(id)->error.value(), "interrupted");
    EXPECT_TRUE(store.pending_on_load().empty());
  }
  // The failure was itself persisted.
  JobStore again(dir.path());
  EXPECT_EQ(again.Get(id)->state, JobState::Failed);
}

TEST(JobStoreTest, IllegalTransitionsAreRejected) {
  TempDir dir;
  JobStore store(dir.path());
  const auto id = store.Create(JobKind::Detox, Json::object()).id;
  EXPECT_THROW(store.Complete(id, Json::object()), Error);
  store.MarkRunning(id);
  EXPECT_THROW(store.MarkRunning(id), Error);
  store.Complete(id, Json::object());
  EXPECT_THROW(store.Fail(id, "late"), Error);
  EXPECT_THROW(store.MarkRunning("missing"), Error);
  EXPECT_FALSE(store.Get("missing").has_value());
  // Queued jobs may fail directly, e.g. when their payload is rejected.
  const auto other = store.Create(JobKind::Detox, Json::object()).id;
  EXPECT_EQ(store.Fail(other, "bad payload").state, JobState::Failed);
}

TEST(JobStoreTest, TornTailIsDroppedAndLaterAppendsStayReadable) {
  TempDir dir;
  std::string id;
  {
    JobStore store(dir.path());
    id = store.Create(JobKind::Detox, Json::object()).id;
  }
  AppendRaw(dir / "jobs.jsonl", R"({"seq": 99, "job": {"id": "half)");
  {
    JobStore store(dir.path());
    ASSERT_EQ(store.List().size(), 1u);
    store.MarkRunning(id);
  }
  JobStore store(dir.path());
  EXPECT_EQ(store.List().size(), 1u);
  EXPECT_EQ(store.Get(id)->state, JobState::Failed);  // was running at shutdown
}

TEST(JobStoreTest, CorruptionBeforeTheTailIsAnError) {
  TempDir dir;
  { JobStore(dir.path()).Create(JobKind::Detox, Json::object()); }
  const auto log = ReadFile(dir / "jobs.jsonl");
  AtomicWriteFile(dir / "jobs.jsonl", "garbage\n" + log);
  EXPECT_THROW(JobStore{dir.path()}, Error);
}

TEST(JobStoreTest, SnapshotPlusLaterEventsRestoreState) {
  TempDir dir;
  std::vector<std::string> ids;
  {
    JobStore store(dir.path(), 3);
    for (int i = 0; i < 5; ++i) ids.push_back(store.Create(JobKind::Detox, Json{{"i", i}}).id);
    store.MarkRunning(ids[0]);
    store.Complete(ids[0], Json{{"ok", true}});
  }
  ASSERT_TRUE(std::filesystem::exists(dir / "snapshot.json"));
  // Snapshot alone, without the log, still holds everything it covered.
  const auto snap = Json::parse(ReadFile(dir / "snapshot.json"));
  EXPECT_GE(snap["seq"].get<int>(), 3);
  JobStore store(dir.path());
  const auto jobs = store.List();
  ASSERT_EQ(jobs.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(jobs[i].id, ids[i]);
  EXPECT_EQ(jobs[0].state, JobState::Done);
  EXPECT_EQ(store.pending_on_load().size(), 4u);
}

TEST(ReviewTest, RatingsMustMatchTheBranch) {
  for (const char* r : {"A", "B", "C", "D"}) {
    EXPECT_TRUE(RatingMatchesBranch(Detoxifiability::Detoxifiable, r));
    EXPECT_FALSE(RatingMatchesBranch(Detoxifiability::NonDetoxifiable, r));
  }
  for (const char* r : {"N", "T"}) {
    EXPECT_TRUE(RatingMatchesBranch(Detoxifiability::NonDetoxifiable, r));
    EXPECT_FALSE(RatingMatchesBranch(Detoxifiability::Detoxifiable, r));
  }
  EXPECT_FALSE(RatingMatchesBranch(Detoxifiability::Detoxifiable, "E"));
}

TEST(ReviewTest, ConsistencyRules) {
  TempDir dir;
  JobStore store(dir.path());
  const auto with_expl = store.Create(JobKind::Detox, Json::object()).id;
  store.MarkRunning(with_expl);
  store.Complete(with_expl, Json{{"rewrite", "r"}, {"explanation", "e"}});
  const auto without = store.Create(JobKind::Detox, Json::object()).id;
  store.MarkRunning(without);
  store.Complete(without, Json{{"rewrite", "r"}, {"explanation", nullptr}});

  EXPECT_THROW(store.AddReview(Review(with_expl, Detoxifiability::Detoxifiable, "N")), ReviewConflict);
  auto rated = Review(without, Detoxifiability::Detoxifiable, "A");
  rated.explanation_ratings = ExplanationRatings{"A", "A", "B"};
  EXPECT_THROW(store.AddReview(rated), ReviewConflict);
  rated.job_id = with_expl;
  const auto first = store.AddReview(rated);
  EXPECT_FALSE(first.id.empty());
  EXPECT_FALSE(first.created_at.empty());

  auto foreign = Review(without, Detoxifiability::NonDetoxifiable, "T");
  foreign.supersedes = first.id;
  EXPECT_THROW(store.AddReview(foreign), ReviewConflict);
  auto revision = Review(with_expl, Detoxifiability::Detoxifiable, "B");
  revision.supersedes = first.id;
  revision.edited_rewrite = "better";
  store.AddReview(revision);
  EXPECT_THROW(store.AddReview(Review("nope", Detoxifiability::Detoxifiable, "A")), Error);

  JobStore reopened(dir.path());
  const auto reviews = reopened.Reviews(with_expl);
  ASSERT_EQ(reviews.size(), 2u);
  EXPECT_EQ(reviews[1].supersedes.value(), first.id);
  EXPECT_EQ(reviews[1].edited_rewrite.value(), "better");
  EXPECT_EQ(reviews[0].explanation_ratings->convincing, "B");
  EXPECT_TRUE(reopened.Reviews(without).empty());
}

TEST(JobTest, JsonRoundTrip) {
  Job j;
  j.id = "x";
  j.kind = JobKind::Roundtrip;
  j.state = JobState::Done;
  j.submitted_at = "2026-01-01T00:00:00Z";
  j.result = Json{{"n", 1}};
  EXPECT_EQ(Job::FromJson(j.ToJson()).ToJson(), j.ToJson());
  EXPECT_THROW(ParseJobKind("bake"), Error);
}

}  // namespace
}  // namespace detoxforge::service
