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

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/prompts.hpp"
#include "detoxforge/util.hpp"

namespace detoxforge::gateway {

enum class EndpointKind { Chat, Classifier, Embedder, Translator };
std::string_view ToString(EndpointKind kind);
EndpointKind ParseEndpointKind(std::string_view s);

// One remote service. The API key is never stored here: `auth_env` names the
// environment variable read at call time.
struct EndpointSpec {
  std::string id;
  EndpointKind kind = EndpointKind::Chat;
  std::string base_url;
  std::string path;
  std::string model;
  std::string auth_env;  // defaults to DefaultAuthEnv(id)
  double timeout_s = 30.0;
  int max_retries = 3;
  double rate_limit = 0.0;  // requests per second; 0 disables limiting

  // Classifier endpoints.
  double threshold = 0.5;
  std::string positive_label = "toxic";
  std::string negative_label = "nontoxic";

  // Embedder endpoints.
  std::optional<std::size_t> dimension;

  // Translator endpoints: BCP-47 code -> service language code. Empty means
  // codes pass through unchanged.
  std::map<std::string, std::string> language_map;
};

// DETOXFORGE_API_KEY_<ID>, with the id uppercased and every other character
// that is not a letter or digit replaced by '_'.
std::string DefaultAuthEnv(std::string_view endpoint_id);

EndpointSpec EndpointFromJson(const Json& j);
Json ToJson(const EndpointSpec& spec);
// Reads {"endpoints": [...]} or a bare array. Throws Config on duplicate ids,
// non-positive timeouts or negative retry counts.
std::vector<EndpointSpec> LoadEndpoints(const std::filesystem::path& path);
std::vector<EndpointSpec> EndpointsFromJson(const Json& j);

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int total_tokens = 0;
};

struct Completion {
  std::string text;
  std::string finish_reason;
  Usage usage;
  bool cached = false;
  int retries = 0;
};

struct ClassVerdict {
  std::string label;
  double score = 0.0;  // probability of the endpoint's positive label
  bool cached = false;

  bool positive(const EndpointSpec& spec) const { return label == spec.positive_label; }
};

struct EmbeddingVec {
  std::vector<double> values;
  std::string model_id;
  bool cached = false;
};

// Live reads the cache and fills it on a miss. Record always calls out and
// overwrites. Replay answers from the cache only and never touches the network.
enum class Mode { Live, Record, Replay };
std::string_view ToString(Mode mode);
Mode ParseMode(std::string_view s);

struct HttpRequest {
  std::string base_url;
  std::string path;
  std::string body;
  std::map<std::string, std::string> headers;
  double timeout_s = 30.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Throws Error(Timeout) or Error(Unreachable) when no HTTP response arrives.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse Post(const HttpRequest& request) = 0;
};

std::shared_ptr<Transport> MakeHttpTransport();

class Clock {
 public:
  using TimePoint = std::chrono::steady_clock::time_point;
  using Duration = std::chrono::steady_clock::duration;
  virtual ~Clock() = default;
  virtual TimePoint Now() = 0;
  virtual void SleepUntil(TimePoint t) = 0;
};

std::shared_ptr<Clock> SystemClock();

// Sliding-window admission: any window of length `capacity / rate` seconds
// admits at most `capacity` requests, where capacity = max(1, floor(rate)).
// For rate >= 1 this bounds every 1-second window by floor(rate).
class RateLimiter {
 public:
  RateLimiter(double rate, std::shared_ptr<Clock> clock);

  // Blocks until a slot is free; returns the admission time.
  Clock::TimePoint Acquire();

 private:
  double rate_;
  std::size_t capacity_;
  Clock::Duration window_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::deque<Clock::TimePoint> admitted_;
};

struct GatewayOptions {
  Mode mode = Mode::Live;
  std::filesystem::path cache_dir = ".detoxforge-cache";
  double backoff_base_s = 0.5;
  double backoff_max_s = 8.0;
};

struct EndpointStats {
  std::uint64_t requests = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t network_attempts = 0;
  std::uint64_t retries = 0;
};

// Content-addressed cache file layout: <cache_dir>/<key>.json holding
// {"key", "endpoint", "op", "input", "output"}; key is the lowercase hex
// SHA-256 of the compact, key-sorted JSON {"endpoint", "op", "input"}.
std::string CacheKey(std::string_view endpoint_id, std::string_view op, const Json& input);

// Thread-safe. Shared by every module that calls out.
class Gateway {
 public:
  Gateway(std::vector<EndpointSpec> endpoints, GatewayOptions options,
          std::shared_ptr<Transport> transport = nullptr, std::shared_ptr<Clock> clock = nullptr);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  const EndpointSpec& endpoint(std::string_view id) const;
  bool has_endpoint(std::string_view id) const;
  std::vector<std::string> endpoint_ids() const;
  Mode mode() const { return options_.mode; }

  Completion Complete(std::string_view endpoint_id, const prompts::Prompt& prompt,
                      const prompts::DecodingParams& params);
  Completion Complete(std::string_view endpoint_id, const prompts::Prompt& prompt) {
    return Complete(endpoint_id, prompt, prompt.params_hint);
  }
  // The optional pair is sent as "text_pair" for sentence-pair classifiers.
  ClassVerdict Classify(std::string_view endpoint_id, std::string_view text,
                        std::optional<std::string_view> text_pair = std::nullopt);
  EmbeddingVec Embed(std::string_view endpoint_id, std::string_view text);
  std::string Translate(std::string_view endpoint_id, std::string_view text, std::string_view src_lang,
                        std::string_view tgt_lang);

  EndpointStats stats(std::string_view endpoint_id) const;

 private:
  struct Slot;
  struct CallResult {
    Json output;
    bool cached = false;
    int retries = 0;
  };

  Slot& slot(std::string_view id, EndpointKind expected);
  // The wire body doubles as the cache-key input.
  CallResult Call(Slot& slot, std::string_view op, const Json& wire_body);
  Json Send(Slot& slot, const Json& wire_body, int& retries);

  GatewayOptions options_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Clock> clock_;
  std::map<std::string, std::unique_ptr<Slot>, std::less<>> slots_;
};

}  // namespace detoxforge::gateway
