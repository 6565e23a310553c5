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

// Shared doubles for unit and acceptance tests: a scripted transport, a
// manual clock and scratch directories.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "detoxforge/error.hpp"
#include "detoxforge/gateway.hpp"
#include "detoxforge/util.hpp"

namespace detoxforge::testing {

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "detoxforge-test-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view sub) const { return path_ / sub; }

 private:
  std::filesystem::path path_;
};

// Routes requests by base_url + path. Unrouted requests fail as unreachable.
class FakeTransport : public gateway::Transport {
 public:
  using Handler = std::function<gateway::HttpResponse(const gateway::HttpRequest&, const Json&)>;

  void Route(const std::string& url, Handler handler) {
    std::lock_guard lock(mu_);
    routes_[url] = std::move(handler);
  }

  gateway::HttpResponse Post(const gateway::HttpRequest& request) override {
    Handler h;
    {
      std::lock_guard lock(mu_);
      requests_.push_back(request);
      auto it = routes_.find(request.base_url + request.path);
      if (it == routes_.end()) throw Error(Errc::Unreachable, "no route to " + request.base_url + request.path);
      h = it->second;
    }
    return h(request, Json::parse(request.body));
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return requests_.size();
  }
  std::vector<gateway::HttpRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, Handler> routes_;
  std::vector<gateway::HttpRequest> requests_;
};

// Time advances only through SleepUntil.
class FakeClock : public gateway::Clock {
 public:
  TimePoint Now() override {
    std::lock_guard lock(mu_);
    return now_;
  }
  void SleepUntil(TimePoint t) override {
    std::lock_guard lock(mu_);
    if (t > now_) {
      sleeps_.push_back(std::chrono::duration<double>(t - now_).count());
      now_ = t;
    }
  }
  double elapsed_s() const {
    std::lock_guard lock(mu_);
    return std::chrono::duration<double>(now_ - TimePoint{}).count();
  }
  std::vector<double> sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
  }

 private:
  mutable std::mutex mu_;
  TimePoint now_{};
  std::vector<double> sleeps_;
};

inline gateway::HttpResponse JsonReply(const Json& body, int status = 200) { return {status, body.dump()}; }

inline gateway::HttpResponse ChatReply(const std::string& text, const std::string& finish = "stop") {
  return JsonReply(Json{{"choices", Json::array({Json{{"message", {{"role", "assistant"}, {"content", text}}},
                                                      {"finish_reason", finish}}})},
                        {"usage", {{"prompt_tokens", 1}, {"completion_tokens", 1}, {"total_tokens", 2}}}});
}

inline gateway::HttpResponse LabelReply(const std::string& label, double score) {
  return JsonReply(Json{{"label", label}, {"score", score}});
}

inline gateway::HttpResponse VectorReply(const std::vector<double>& v) { return JsonReply(Json{{"vector", v}}); }

inline gateway::EndpointSpec Spec(const std::string& id, gateway::EndpointKind kind) {
  gateway::EndpointSpec s;
  s.id = id;
  s.kind = kind;
  s.base_url = "http://fake.test";
  s.path = "/" + id;
  s.model = id + "-model";
  s.auth_env = gateway::DefaultAuthEnv(id);
  return s;
}

inline std::string Url(const gateway::EndpointSpec& s) { return s.base_url + s.path; }

inline gateway::EndpointSpec ClassifierSpec(const std::string& id, const std::string& positive = "toxic",
                                            const std::string& negative = "nontoxic", double threshold = 0.5) {
  auto s = Spec(id, gateway::EndpointKind::Classifier);
  s.positive_label = positive;
  s.negative_label = negative;
  s.threshold = threshold;
  return s;
}

struct GatewayRig {
  TempDir dir;
  std::shared_ptr<FakeTransport> transport = std::make_shared<FakeTransport>();
  std::shared_ptr<FakeClock> clock = std::make_shared<FakeClock>();
  std::unique_ptr<gateway::Gateway> gw;

  explicit GatewayRig(std::vector<gateway::EndpointSpec> specs, gateway::Mode mode = gateway::Mode::Live) {
    gateway::GatewayOptions o;
    o.mode = mode;
    o.cache_dir = dir / "cache";
    gw = std::make_unique<gateway::Gateway>(std::move(specs), o, transport, clock);
  }
};

// Repository paths baked in by the build.
inline std::filesystem::path SourceDir() { return DETOXFORGE_TEST_SOURCE_DIR; }
inline std::filesystem::path FixtureDir() { return SourceDir() / "tests" / "fixtures"; }
inline std::filesystem::path TemplateDir() { return SourceDir() / "templates"; }

}  // namespace detoxforge::testing
