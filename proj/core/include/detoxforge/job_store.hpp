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

#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/util.hpp"

namespace detoxforge::service {

enum class JobKind { Detox, Evaluate, Adversarial, Roundtrip };
enum class JobState { Queued, Running, Done, Failed };
std::string_view ToString(JobKind kind);
std::string_view ToString(JobState state);
JobKind ParseJobKind(std::string_view s);
JobState ParseJobState(std::string_view s);

struct Job {
  std::string id;
  JobKind kind = JobKind::Detox;
  JobState state = JobState::Queued;
  std::string submitted_at;
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
  Json payload = Json::object();
  std::optional<Json> result;  // present iff Done
  std::optional<std::string> error;

  Json ToJson() const;
  static Job FromJson(const Json& j);
};

enum class Detoxifiability { Detoxifiable, NonDetoxifiable };
std::string_view ToString(Detoxifiability d);
Detoxifiability ParseDetoxifiability(std::string_view s);

struct ExplanationRatings {
  std::string relevance;
  std::string comprehensiveness;
  std::string convincing;
};

struct ReviewRecord {
  std::string id;
  std::string job_id;
  std::string reviewer_id;
  Detoxifiability detoxifiability = Detoxifiability::Detoxifiable;
  std::string rating;
  std::optional<ExplanationRatings> explanation_ratings;
  std::optional<std::string> edited_rewrite;
  std::optional<std::string> supersedes;
  std::string created_at;

  Json ToJson() const;
  static ReviewRecord FromJson(const Json& j);
};

// A..D belong to the detoxifiable branch, N and T to the other.
bool RatingMatchesBranch(Detoxifiability d, std::string_view rating);

// Thrown for review records that break a consistency rule.
class ReviewConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Durable job and review storage under one directory:
//   jobs.jsonl       one line per job state change {"seq", "job"}
//   reviews.jsonl    one line per review record
//   snapshot.json    {"seq", "jobs"}: every job as of event `seq`
// Loading reads the snapshot, replays later job events, then marks jobs left
// Running as Failed ("interrupted"). Queued jobs stay queued and are listed by
// pending_on_load().
class JobStore {
 public:
  explicit JobStore(std::filesystem::path dir, std::size_t snapshot_every = 64);
  ~JobStore();
  JobStore(const JobStore&) = delete;
  JobStore& operator=(const JobStore&) = delete;

  Job Create(JobKind kind, Json payload);
  Job MarkRunning(const std::string& id);
  Job Complete(const std::string& id, Json result);
  Job Fail(const std::string& id, std::string error);

  std::optional<Job> Get(const std::string& id) const;
  std::vector<Job> List() const;
  const std::vector<std::string>& pending_on_load() const { return pending_on_load_; }

  // Throws ReviewConflict when the rating does not fit its branch, when
  // explanation ratings are given for a job without an explanation, or when
  // `supersedes` names a review of another job. Returns the stored record
  // with id and created_at filled in.
  ReviewRecord AddReview(ReviewRecord review);
  std::vector<ReviewRecord> Reviews(std::optional<std::string> job_id = std::nullopt) const;

  void Snapshot();
  const std::filesystem::path& dir() const { return dir_; }

 private:
  Job Transition(const std::string& id, JobState from, JobState to, std::optional<Json> result,
                 std::optional<std::string> error);
  void AppendJobEvent(const Job& job);
  void SnapshotLocked();

  std::filesystem::path dir_;
  std::size_t snapshot_every_;
  mutable std::mutex mu_;
  std::map<std::string, Job> jobs_;
  std::vector<std::string> job_order_;
  std::vector<ReviewRecord> reviews_;
  std::vector<std::string> pending_on_load_;
  std::uint64_t seq_ = 0;
  std::uint64_t since_snapshot_ = 0;
  std::FILE* job_log_ = nullptr;
  std::FILE* review_log_ = nullptr;
};

}  // namespace detoxforge::service
