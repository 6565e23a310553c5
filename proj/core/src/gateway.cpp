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

#include "detoxforge/gateway.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include "detoxforge/error.hpp"

namespace detoxforge::gateway {
namespace {

std::string Excerpt(std::string_view body) {
  constexpr std::size_t kMax = 200;
  return std::string(body.substr(0, kMax)) + (body.size() > kMax ? "..." : "");
}

class HttpTransport final : public Transport {
 public:
  HttpResponse Post(const HttpRequest& request) override {
    httplib::Client client(request.base_url);
    const auto timeout = std::chrono::duration<double>(request.timeout_s);
    const auto usec = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
    client.set_connection_timeout(usec);
    client.set_read_timeout(usec);
    client.set_write_timeout(usec);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto res = client.Post(request.path, headers, request.body, "application/json");
    if (!res) {
      const auto err = res.error();
      const std::string what = request.base_url + request.path + ": " + httplib::to_string(err);
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
          err == httplib::Error::Write) {
        throw Error(Errc::Timeout, what);
      }
      throw Error(Errc::Unreachable, what);
    }
    return HttpResponse{res->status, res->body};
  }
};

class RealClock final : public Clock {
 public:
  TimePoint Now() override { return std::chrono::steady_clock::now(); }
  void SleepUntil(TimePoint t) override { std::this_thread::sleep_until(t); }
};

bool Retryable(int status) { return status == 429 || status >= 500; }

void RequireText(std::string_view text, std::string_view what) {
  if (Trim(text).empty()) throw Error(Errc::BadInput, std::string(what) + " must be non-empty");
}

Json ParseBody(const HttpResponse& res, const EndpointSpec& spec) {
  try {
    return Json::parse(res.body);
  } catch (const Json::parse_error&) {
    throw Error(Errc::RemoteError, spec.id + ": status " + std::to_string(res.status) +
                                       ", unparseable body: " + Excerpt(res.body));
  }
}

}  // namespace

std::string_view ToString(EndpointKind kind) {
  switch (kind) {
    case EndpointKind::Chat: return "chat";
    case EndpointKind::Classifier: return "classifier";
    case EndpointKind::Embedder: return "embedder";
    case EndpointKind::Translator: return "translator";
  }
  return "unknown";
}

EndpointKind ParseEndpointKind(std::string_view s) {
  const auto lower = ToLowerAscii(s);
  for (auto k : {EndpointKind::Chat, EndpointKind::Classifier, EndpointKind::Embedder, EndpointKind::Translator}) {
    if (ToString(k) == lower) return k;
  }
  throw Error(Errc::Config, "unknown endpoint kind \"" + std::string(s) + "\"");
}

std::string_view ToString(Mode mode) {
  switch (mode) {
    case Mode::Live: return "live";
    case Mode::Record: return "record";
    case Mode::Replay: return "replay";
  }
  return "unknown";
}

Mode ParseMode(std::string_view s) {
  const auto lower = ToLowerAscii(s);
  for (auto m : {Mode::Live, Mode::Record, Mode::Replay}) {
    if (ToString(m) == lower) return m;
  }
  throw Error(Errc::Config, "unknown gateway mode \"" + std::string(s) + "\"");
}

std::string DefaultAuthEnv(std::string_view endpoint_id) {
  std::string out = "DETOXFORGE_API_KEY_";
  for (char c : endpoint_id) {
    const auto u = static_cast<unsigned char>(c);
    out.push_back(std::isalnum(u) ? static_cast<char>(std::toupper(u)) : '_');
  }
  return out;
}

EndpointSpec EndpointFromJson(const Json& j) {
  EndpointSpec s;
  try {
    s.id = j.at("id").get<std::string>();
    s.kind = ParseEndpointKind(j.at("kind").get<std::string>());
    s.base_url = j.at("base_url").get<std::string>();
    s.path = j.value("path", std::string());
    s.model = j.value("model", std::string());
    s.auth_env = j.value("auth_env", DefaultAuthEnv(s.id));
    s.timeout_s = j.value("timeout_s", s.timeout_s);
    s.max_retries = j.value("max_retries", s.max_retries);
    s.rate_limit = j.value("rate_limit", s.rate_limit);
    s.threshold = j.value("threshold", s.threshold);
    s.positive_label = j.value("positive_label", s.positive_label);
    s.negative_label = j.value("negative_label", s.negative_label);
    if (j.contains("dimension") && !j["dimension"].is_null()) s.dimension = j["dimension"].get<std::size_t>();
    if (j.contains("language_map")) s.language_map = j["language_map"].get<std::map<std::string, std::string>>();
  } catch (const Json::exception& e) {
    throw Error(Errc::Config, std::string("bad endpoint entry: ") + e.what());
  }
  if (s.id.empty()) throw Error(Errc::Config, "endpoint id must be non-empty");
  if (j.contains("api_key")) {
    throw Error(Errc::Config, "endpoint " + s.id + ": keys are read from the environment, not the config file");
  }
  if (!(s.timeout_s > 0)) throw Error(Errc::Config, "endpoint " + s.id + ": timeout_s must be > 0");
  if (s.max_retries < 0) throw Error(Errc::Config, "endpoint " + s.id + ": max_retries must be >= 0");
  if (s.rate_limit < 0) throw Error(Errc::Config, "endpoint " + s.id + ": rate_limit must be >= 0");
  if (s.threshold < 0 || s.threshold > 1) throw Error(Errc::Config, "endpoint " + s.id + ": threshold must be in [0,1]");
  if (s.dimension && *s.dimension == 0) throw Error(Errc::Config, "endpoint " + s.id + ": dimension must be > 0");
  return s;
}

Json ToJson(const EndpointSpec& s) {
  Json j{{"id", s.id},
         {"kind", ToString(s.kind)},
         {"base_url", s.base_url},
         {"path", s.path},
         {"model", s.model},
         {"auth_env", s.auth_env},
         {"timeout_s", s.timeout_s},
         {"max_retries", s.max_retries},
         {"rate_limit", s.rate_limit}};
  if (s.kind == EndpointKind::Classifier) {
    j["threshold"] = s.threshold;
    j["positive_label"] = s.positive_label;
    j["negative_label"] = s.negative_label;
  }
  if (s.dimension) j["dimension"] = *s.dimension;
  if (!s.language_map.empty()) j["language_map"] = s.language_map;
  return j;
}

std::vector<EndpointSpec> EndpointsFromJson(const Json& j) {
  const Json& list = j.is_object() ? j.at("endpoints") : j;
  if (!list.is_array()) throw Error(Errc::Config, "endpoints must be an array");
  std::vector<EndpointSpec> out;
  std::set<std::string> seen;
  for (const auto& e : list) {
    auto spec = EndpointFromJson(e);
    if (!seen.insert(spec.id).second) throw Error(Errc::Config, "duplicate endpoint id " + spec.id);
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<EndpointSpec> LoadEndpoints(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(ReadFile(path));
  } catch (const Json::exception& e) {
    throw Error(Errc::Config, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::Config, e.message());
  }
  return EndpointsFromJson(j);
}

std::shared_ptr<Transport> MakeHttpTransport() { return std::make_shared<HttpTransport>(); }

std::shared_ptr<Clock> SystemClock() {
  static auto clock = std::make_shared<RealClock>();
  return clock;
}

RateLimiter::RateLimiter(double rate, std::shared_ptr<Clock> clock)
    : rate_(rate),
      capacity_(rate >= 1 ? static_cast<std::size_t>(std::floor(rate)) : 1),
      window_(rate > 0 ? std::chrono::duration_cast<Clock::Duration>(
                             std::chrono::duration<double>(static_cast<double>(capacity_) / rate))
                       : Clock::Duration::zero()),
      clock_(std::move(clock)) {}

Clock::TimePoint RateLimiter::Acquire() {
  if (rate_ <= 0) return clock_->Now();
  std::lock_guard lock(mu_);
  auto now = clock_->Now();
  while (!admitted_.empty() && now - admitted_.front() >= window_) admitted_.pop_front();
  if (admitted_.size() >= capacity_) {
    clock_->SleepUntil(admitted_.front() + window_);
    now = std::max(clock_->Now(), admitted_.front() + window_);
    while (!admitted_.empty() && now - admitted_.front() >= window_) admitted_.pop_front();
  }
  admitted_.push_back(now);
  return now;
}

std::string CacheKey(std::string_view endpoint_id, std::string_view op, const Json& input) {
  const Json keyed{{"endpoint", endpoint_id}, {"op", op}, {"input", input}};
  return Sha256Hex(keyed.dump());
}

struct Gateway::Slot {
  Slot(EndpointSpec s, std::shared_ptr<Clock> clock) : spec(std::move(s)), limiter(spec.rate_limit, std::move(clock)) {}

  EndpointSpec spec;
  RateLimiter limiter;
  std::atomic<std::uint64_t> requests{0};
  std::atomic<std::uint64_t> cache_hits{0};
  std::atomic<std::uint64_t> network_attempts{0};
  std::atomic<std::uint64_t> retries{0};
};

Gateway::Gateway(std::vector<EndpointSpec> endpoints, GatewayOptions options, std::shared_ptr<Transport> transport,
                 std::shared_ptr<Clock> clock)
    : options_(std::move(options)),
      transport_(transport ? std::move(transport) : MakeHttpTransport()),
      clock_(clock ? std::move(clock) : SystemClock()) {
  for (auto& e : endpoints) {
    if (e.auth_env.empty()) e.auth_env = DefaultAuthEnv(e.id);
    auto id = e.id;
    if (!slots_.emplace(id, std::make_unique<Slot>(std::move(e), clock_)).second) {
      throw Error(Errc::Config, "duplicate endpoint id " + id);
    }
  }
}

Gateway::~Gateway() = default;

bool Gateway::has_endpoint(std::string_view id) const { return slots_.find(id) != slots_.end(); }

const EndpointSpec& Gateway::endpoint(std::string_view id) const {
  auto it = slots_.find(id);
  if (it == slots_.end()) throw Error(Errc::Config, "unknown endpoint \"" + std::string(id) + "\"");
  return it->second->spec;
}

std::vector<std::string> Gateway::endpoint_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : slots_) ids.push_back(id);
  return ids;
}

EndpointStats Gateway::stats(std::string_view id) const {
  auto it = slots_.find(id);
  if (it == slots_.end()) throw Error(Errc::Config, "unknown endpoint \"" + std::string(id) + "\"");
  const auto& s = *it->second;
  return EndpointStats{s.requests.load(), s.cache_hits.load(), s.network_attempts.load(), s.retries.load()};
}

Gateway::Slot& Gateway::slot(std::string_view id, EndpointKind expected) {
  auto it = slots_.find(id);
  if (it == slots_.end()) throw Error(Errc::Config, "unknown endpoint \"" + std::string(id) + "\"");
  if (it->second->spec.kind != expected) {
    throw Error(Errc::WrongEndpointKind, "endpoint " + std::string(id) + " is a " +
                                             std::string(ToString(it->second->spec.kind)) + " endpoint, expected " +
                                             std::string(ToString(expected)));
  }
  return *it->second;
}

Json Gateway::Send(Slot& s, const Json& wire_body, int& retries) {
  HttpRequest req{s.spec.base_url, s.spec.path, wire_body.dump(), {}, s.spec.timeout_s};
  if (const char* key = std::getenv(s.spec.auth_env.c_str()); key != nullptr && *key != '\0') {
    req.headers["Authorization"] = std::string("Bearer ") + key;
  }
  const int attempts = 1 + s.spec.max_retries;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 0) {
      const double delay = std::min(options_.backoff_max_s, options_.backoff_base_s * std::pow(2.0, attempt - 1));
      clock_->SleepUntil(clock_->Now() +
                         std::chrono::duration_cast<Clock::Duration>(std::chrono::duration<double>(delay)));
      ++retries;
      ++s.retries;
    }
    const bool last = attempt + 1 >= attempts;
    s.limiter.Acquire();
    ++s.network_attempts;
    HttpResponse res;
    try {
      res = transport_->Post(req);
    } catch (const Error& e) {
      if (last || (e.code() != Errc::Timeout && e.code() != Errc::Unreachable)) throw;
      continue;
    }
    if (res.status >= 200 && res.status < 300) return ParseBody(res, s.spec);
    if (Retryable(res.status) && !last) continue;
    const std::string what = s.spec.id + ": status " + std::to_string(res.status) + " after " +
                             std::to_string(attempt + 1) + " attempt(s): " + Excerpt(res.body);
    throw Error(res.status == 429 ? Errc::RateLimited : Errc::RemoteError, what);
  }
}

Gateway::CallResult Gateway::Call(Slot& s, std::string_view op, const Json& wire_body) {
  ++s.requests;
  const auto key = CacheKey(s.spec.id, op, wire_body);
  const auto file = options_.cache_dir / (key + ".json");
  if (options_.mode != Mode::Record && std::filesystem::exists(file)) {
    try {
      auto entry = Json::parse(ReadFile(file));
      ++s.cache_hits;
      return CallResult{entry.at("output"), true, 0};
    } catch (const Json::exception& e) {
      throw Error(Errc::Io, "corrupt cache entry " + file.string() + ": " + e.what());
    }
  }
  if (options_.mode == Mode::Replay) {
    throw Error(Errc::ReplayMiss, s.spec.id + ": no recorded " + std::string(op) + " response for key " + key);
  }
  int retries = 0;
  Json output = Send(s, wire_body, retries);
  const Json entry{{"key", key}, {"endpoint", s.spec.id}, {"op", op}, {"input", wire_body}, {"output", output}};
  AtomicWriteFile(file, entry.dump(2) + "\n");
  return CallResult{std::move(output), false, retries};
}

Completion Gateway::Complete(std::string_view endpoint_id, const prompts::Prompt& prompt,
                             const prompts::DecodingParams& params) {
  auto& s = slot(endpoint_id, EndpointKind::Chat);
  RequireText(prompt.rendered, "prompt");
  Json body{{"model", s.spec.model},
            {"messages", Json::array({Json{{"role", "user"}, {"content", prompt.rendered}}})},
            {"temperature", params.temperature}};
  if (params.max_tokens) body["max_tokens"] = *params.max_tokens;
  auto r = Call(s, "complete", body);
  Completion c;
  c.cached = r.cached;
  c.retries = r.retries;
  try {
    const auto& choice = r.output.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    c.text = content.is_null() ? std::string() : content.get<std::string>();
    c.finish_reason = choice.value("finish_reason", std::string());
    if (r.output.contains("usage")) {
      const auto& u = r.output["usage"];
      c.usage = Usage{u.value("prompt_tokens", 0), u.value("completion_tokens", 0), u.value("total_tokens", 0)};
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::RemoteError, s.spec.id + ": malformed chat response: " + e.what());
  }
  if (Trim(c.text).empty() && c.finish_reason != "content_filter") {
    throw Error(Errc::RemoteError, s.spec.id + ": empty completion with finish_reason \"" + c.finish_reason + "\"");
  }
  return c;
}

ClassVerdict Gateway::Classify(std::string_view endpoint_id, std::string_view text,
                               std::optional<std::string_view> text_pair) {
  auto& s = slot(endpoint_id, EndpointKind::Classifier);
  RequireText(text, "text");
  Json body{{"text", text}};
  if (!s.spec.model.empty()) body["model"] = s.spec.model;
  if (text_pair) {
    RequireText(*text_pair, "text_pair");
    body["text_pair"] = *text_pair;
  }
  auto r = Call(s, "classify", body);
  std::string label;
  double p = 0;
  try {
    label = r.output.at("label").get<std::string>();
    p = r.output.at("score").get<double>();
  } catch (const Json::exception& e) {
    throw Error(Errc::RemoteError, s.spec.id + ": malformed classifier response: " + e.what());
  }
  if (!(p >= 0 && p <= 1)) throw Error(Errc::RemoteError, s.spec.id + ": score outside [0,1]");
  double positive;
  if (label == s.spec.positive_label) {
    positive = p;
  } else if (label == s.spec.negative_label) {
    positive = 1.0 - p;
  } else {
    throw Error(Errc::RemoteError, s.spec.id + ": unexpected label \"" + label + "\"");
  }
  ClassVerdict v;
  v.score = positive;
  v.label = positive > s.spec.threshold ? s.spec.positive_label : s.spec.negative_label;
  v.cached = r.cached;
  return v;
}

EmbeddingVec Gateway::Embed(std::string_view endpoint_id, std::string_view text) {
  auto& s = slot(endpoint_id, EndpointKind::Embedder);
  RequireText(text, "text");
  Json body{{"text", text}};
  if (!s.spec.model.empty()) body["model"] = s.spec.model;
  auto r = Call(s, "embed", body);
  EmbeddingVec v;
  try {
    v.values = r.output.at("vector").get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw Error(Errc::RemoteError, s.spec.id + ": malformed embedding response: " + e.what());
  }
  if (v.values.empty()) throw Error(Errc::RemoteError, s.spec.id + ": empty embedding");
  if (!std::all_of(v.values.begin(), v.values.end(), [](double x) { return std::isfinite(x); })) {
    throw Error(Errc::RemoteError, s.spec.id + ": non-finite embedding entry");
  }
  if (s.spec.dimension && v.values.size() != *s.spec.dimension) {
    throw Error(Errc::DimensionMismatch, s.spec.id + ": expected dimension " + std::to_string(*s.spec.dimension) +
                                             ", got " + std::to_string(v.values.size()));
  }
  v.model_id = s.spec.model.empty() ? s.spec.id : s.spec.model;
  v.cached = r.cached;
  return v;
}

std::string Gateway::Translate(std::string_view endpoint_id, std::string_view text, std::string_view src_lang,
                               std::string_view tgt_lang) {
  auto& s = slot(endpoint_id, EndpointKind::Translator);
  RequireText(text, "text");
  auto map_code = [&](std::string_view code) {
    if (s.spec.language_map.empty()) return std::string(code);
    auto it = s.spec.language_map.find(std::string(code));
    if (it == s.spec.language_map.end()) {
      throw Error(Errc::UnsupportedLanguage, s.spec.id + ": no mapping for language \"" + std::string(code) + "\"");
    }
    return it->second;
  };
  Json body{{"text", text}, {"src_lang", map_code(src_lang)}, {"tgt_lang", map_code(tgt_lang)}};
  if (!s.spec.model.empty()) body["model"] = s.spec.model;
  auto r = Call(s, "translate", body);
  try {
    return r.output.at("text").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(Errc::RemoteError, s.spec.id + ": malformed translation response: " + e.what());
  }
}

}  // namespace detoxforge::gateway
