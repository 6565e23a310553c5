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

#include <unistd.h>

#include <algorithm>

#include "detoxforge/error.hpp"

namespace detoxforge::service {
namespace {

std::FILE* OpenAppend(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "ab");
  if (f == nullptr) throw Error(Errc::Io, "cannot open " + path.string() + " for append");
  return f;
}

void AppendLine(std::FILE* f, const std::string& line, const std::filesystem::path& path) {
  const std::string buf = line + "\n";
  if (std::fwrite(buf.data(), 1, buf.size(), f) != buf.size() || std::fflush(f) != 0) {
    throw Error(Errc::Io, "short append to " + path.string());
  }
  ::fsync(::fileno(f));
}

// A torn final line from a crash mid-append is cut off the file so later
// appends start on a fresh line; damage anywhere else is an error.
std::vector<Json> ReadLog(const std::filesystem::path& path) {
  std::vector<Json> rows;
  if (!std::filesystem::exists(path)) return rows;
  const std::string data = ReadFile(path);
  std::size_t good_end = 0;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const auto end = terminated ? nl : data.size();
    const std::string_view line(data.data() + pos, end - pos);
    ++lineno;
    if (!Trim(line).empty()) {
      std::string problem = "unterminated line";
      if (terminated) {
        try {
          rows.push_back(Json::parse(line));
          problem.clear();
        } catch (const Json::parse_error& e) {
          problem = e.what();
        }
      }
      if (!problem.empty()) {
        if (data.find_first_not_of(" \t\r\n", end) != std::string::npos) {
          throw Error(Errc::Io, path.string() + ": corrupt event " + std::to_string(lineno) + ": " + problem);
        }
        std::filesystem::resize_file(path, good_end);
        return rows;
      }
    }
    pos = terminated ? nl + 1 : data.size();
    good_end = pos;
  }
  return rows;
}

Json OptionalString(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

std::optional<std::string> ReadOptionalString(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

}  // namespace

std::string_view ToString(JobKind kind) {
  switch (kind) {
    case JobKind::Detox: return "detox";
    case JobKind::Evaluate: return "evaluate";
    case JobKind::Adversarial: return "adversarial";
    case JobKind::Roundtrip: return "roundtrip";
  }
  return "unknown";
}

std::string_view ToString(JobState state) {
  switch (state) {
    case JobState::Queued: return "queued";
    case JobState::Running: return "running";
    case JobState::Done: return "done";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

JobKind ParseJobKind(std::string_view s) {
  for (auto k : {JobKind::Detox, JobKind::Evaluate, JobKind::Adversarial, JobKind::Roundtrip}) {
    if (ToString(k) == s) return k;
  }
  throw Error(Errc::Schema, "unknown job kind \"" + std::string(s) + "\"");
}

JobState ParseJobState(std::string_view s) {
  for (auto st : {JobState::Queued, JobState::Running, JobState::Done, JobState::Failed}) {
    if (ToString(st) == s) return st;
  }
  throw Error(Errc::Schema, "unknown job state \"" + std::string(s) + "\"");
}

Json Job::ToJson() const {
  return Json{{"id", id},
              {"kind", service::ToString(kind)},
              {"state", service::ToString(state)},
              {"submitted_at", submitted_at},
              {"started_at", OptionalString(started_at)},
              {"finished_at", OptionalString(finished_at)},
              {"payload", payload},
              {"result", result ? *result : Json(nullptr)},
              {"error", OptionalString(error)}};
}

Job Job::FromJson(const Json& j) {
  Job job;
  job.id = j.at("id").get<std::string>();
  job.kind = ParseJobKind(j.at("kind").get<std::string>());
  job.state = ParseJobState(j.at("state").get<std::string>());
  job.submitted_at = j.at("submitted_at").get<std::string>();
  job.started_at = ReadOptionalString(j, "started_at");
  job.finished_at = ReadOptionalString(j, "finished_at");
  job.payload = j.value("payload", Json::object());
  if (j.contains("result") && !j["result"].is_null()) job.result = j["result"];
  job.error = ReadOptionalString(j, "error");
  return job;
}

std::string_view ToString(Detoxifiability d) {
  return d == Detoxifiability::Detoxifiable ? "detoxifiable" : "non_detoxifiable";
}

Detoxifiability ParseDetoxifiability(std::string_view s) {
  if (s == "detoxifiable") return Detoxifiability::Detoxifiable;
  if (s == "non_detoxifiable") return Detoxifiability::NonDetoxifiable;
  throw Error(Errc::Schema, "unknown detoxifiability \"" + std::string(s) + "\"");
}

bool RatingMatchesBranch(Detoxifiability d, std::string_view rating) {
  static constexpr std::string_view kDetox[] = {"A", "B", "C", "D"};
  static constexpr std::string_view kNonDetox[] = {"N", "T"};
  if (d == Detoxifiability::Detoxifiable) return std::find(std::begin(kDetox), std::end(kDetox), rating) != std::end(kDetox);
  return std::find(std::begin(kNonDetox), std::end(kNonDetox), rating) != std::end(kNonDetox);
}

Json ReviewRecord::ToJson() const {
  Json j{{"id", id},
         {"job_id", job_id},
         {"reviewer_id", reviewer_id},
         {"detoxifiability", service::ToString(detoxifiability)},
         {"rating", rating},
         {"created_at", created_at}};
  if (explanation_ratings) {
    j["explanation_ratings"] = Json{{"relevance", explanation_ratings->relevance},
                                    {"comprehensiveness", explanation_ratings->comprehensiveness},
                                    {"convincing", explanation_ratings->convincing}};
  }
  if (edited_rewrite) j["edited_rewrite"] = *edited_rewrite;
  if (supersedes) j["supersedes"] = *supersedes;
  return j;
}

ReviewRecord ReviewRecord::FromJson(const Json& j) {
  ReviewRecord r;
  r.id = j.value("id", std::string());
  r.job_id = j.at("job_id").get<std::string>();
  r.reviewer_id = j.at("reviewer_id").get<std::string>();
  r.detoxifiability = ParseDetoxifiability(j.at("detoxifiability").get<std::string>());
  r.rating = j.at("rating").get<std::string>();
  if (j.contains("explanation_ratings") && !j["explanation_ratings"].is_null()) {
    const auto& e = j["explanation_ratings"];
    r.explanation_ratings = ExplanationRatings{e.at("relevance").get<std::string>(),
                                               e.at("comprehensiveness").get<std::string>(),
                                               e.at("convincing").get<std::string>()};
  }
  r.edited_rewrite = ReadOptionalString(j, "edited_rewrite");
  r.supersedes = ReadOptionalString(j, "supersedes");
  r.created_at = j.value("created_at", std::string());
  return r;
}

JobStore::JobStore(std::filesystem::path dir, std::size_t snapshot_every)
    : dir_(std::move(dir)), snapshot_every_(std::max<std::size_t>(1, snapshot_every)) {
  std::filesystem::create_directories(dir_);
  const auto snapshot = dir_ / "snapshot.json";
  if (std::filesystem::exists(snapshot)) {
    try {
      const auto doc = Json::parse(ReadFile(snapshot));
      seq_ = doc.at("seq").get<std::uint64_t>();
      for (const auto& j : doc.at("jobs")) {
        auto job = Job::FromJson(j);
        job_order_.push_back(job.id);
        jobs_.emplace(job.id, std::move(job));
      }
    } catch (const Json::exception& e) {
      throw Error(Errc::Io, snapshot.string() + ": " + e.what());
    }
  }
  for (const auto& ev : ReadLog(dir_ / "jobs.jsonl")) {
    const auto seq = ev.at("seq").get<std::uint64_t>();
    if (seq <= seq_) continue;
    seq_ = seq;
    auto job = Job::FromJson(ev.at("job"));
    if (!jobs_.count(job.id)) job_order_.push_back(job.id);
    jobs_[job.id] = std::move(job);
  }
  for (const auto& r : ReadLog(dir_ / "reviews.jsonl")) reviews_.push_back(ReviewRecord::FromJson(r));

  job_log_ = OpenAppend(dir_ / "jobs.jsonl");
  review_log_ = OpenAppend(dir_ / "reviews.jsonl");
  for (const auto& id : job_order_) {
    auto& job = jobs_[id];
    if (job.state == JobState::Running) {
      job.state = JobState::Failed;
      job.finished_at = NowIso8601();
      job.error = "interrupted";
      AppendJobEvent(job);
    } else if (job.state == JobState::Queued) {
      pending_on_load_.push_back(id);
    }
  }
}

JobStore::~JobStore() {
  if (job_log_ != nullptr) std::fclose(job_log_);
  if (review_log_ != nullptr) std::fclose(review_log_);
}

void JobStore::AppendJobEvent(const Job& job) {
  ++seq_;
  AppendLine(job_log_, Json{{"seq", seq_}, {"job", job.ToJson()}}.dump(), dir_ / "jobs.jsonl");
  if (++since_snapshot_ >= snapshot_every_) SnapshotLocked();
}

void JobStore::SnapshotLocked() {
  Json jobs = Json::array();
  for (const auto& id : job_order_) jobs.push_back(jobs_.at(id).ToJson());
  AtomicWriteFile(dir_ / "snapshot.json", Json{{"seq", seq_}, {"jobs", jobs}}.dump() + "\n");
  since_snapshot_ = 0;
}

void JobStore::Snapshot() {
  std::lock_guard lock(mu_);
  SnapshotLocked();
}

Job JobStore::Create(JobKind kind, Json payload) {
  std::lock_guard lock(mu_);
  Job job;
  job.id = NewUuid();
  job.kind = kind;
  job.state = JobState::Queued;
  job.submitted_at = NowIso8601();
  job.payload = std::move(payload);
  AppendJobEvent(job);
  job_order_.push_back(job.id);
  jobs_.emplace(job.id, job);
  return job;
}

Job JobStore::Transition(const std::string& id, JobState from, JobState to, std::optional<Json> result,
                         std::optional<std::string> error) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(Errc::BadInput, "unknown job " + id);
  Job next = it->second;
  const bool allowed = next.state == from || (to == JobState::Failed && next.state == JobState::Queued);
  if (!allowed) {
    throw Error(Errc::BadInput, "job " + id + " cannot go from " + std::string(ToString(next.state)) + " to " +
                                    std::string(ToString(to)));
  }
  next.state = to;
  if (to == JobState::Running) {
    next.started_at = NowIso8601();
  } else {
    next.finished_at = NowIso8601();
  }
  next.result = std::move(result);
  next.error = std::move(error);
  AppendJobEvent(next);
  it->second = next;
  return next;
}

Job JobStore::MarkRunning(const std::string& id) {
  return Transition(id, JobState::Queued, JobState::Running, std::nullopt, std::nullopt);
}

Job JobStore::Complete(const std::string& id, Json result) {
  return Transition(id, JobState::Running, JobState::Done, std::move(result), std::nullopt);
}

Job JobStore::Fail(const std::string& id, std::string error) {
  return Transition(id, JobState::Running, JobState::Failed, std::nullopt, std::move(error));
}

std::optional<Job> JobStore::Get(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<Job> JobStore::List() const {
  std::lock_guard lock(mu_);
  std::vector<Job> out;
  for (const auto& id : job_order_) out.push_back(jobs_.at(id));
  return out;
}

ReviewRecord JobStore::AddReview(ReviewRecord review) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(review.job_id);
  if (it == jobs_.end()) throw Error(Errc::BadInput, "unknown job " + review.job_id);
  if (!RatingMatchesBranch(review.detoxifiability, review.rating)) {
    throw ReviewConflict("rating " + review.rating + " is not allowed for " +
                         std::string(ToString(review.detoxifiability)) + " inputs");
  }
  if (review.explanation_ratings) {
    const auto& job = it->second;
    const bool has_explanation = job.result && job.result->contains("explanation") &&
                                 (*job.result)["explanation"].is_string();
    if (!has_explanation) throw ReviewConflict("explanation ratings given for a job without an explanation");
  }
  if (review.supersedes) {
    auto prior = std::find_if(reviews_.begin(), reviews_.end(), [&](const auto& r) { return r.id == *review.supersedes; });
    if (prior == reviews_.end() || prior->job_id != review.job_id) {
      throw ReviewConflict("superseded review " + *review.supersedes + " does not belong to job " + review.job_id);
    }
  }
  review.id = NewUuid();
  review.created_at = NowIso8601();
  AppendLine(review_log_, review.ToJson().dump(), dir_ / "reviews.jsonl");
  reviews_.push_back(review);
  return review;
}

std::vector<ReviewRecord> JobStore::Reviews(std::optional<std::string> job_id) const {
  std::lock_guard lock(mu_);
  std::vector<ReviewRecord> out;
  for (const auto& r : reviews_) {
    if (!job_id || r.job_id == *job_id) out.push_back(r);
  }
  return out;
}

}  // namespace detoxforge::service
