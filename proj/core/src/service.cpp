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

#include "detoxforge/service.hpp"

#include <httplib.h>
#include <sys/socket.h>

#include <algorithm>
#include <cstdlib>

#include "detoxforge/adversarial.hpp"
#include "detoxforge/error.hpp"
#include "detoxforge/evaluation.hpp"
#include "detoxforge/roundtrip.hpp"
#include "detoxforge/runtime.hpp"
#include "detoxforge/schema.hpp"

namespace detoxforge::service {
namespace {

constexpr const char* kJson = "application/json";

struct HttpError {
  int status;
  std::string code;
  std::string message;
  std::optional<std::string> job_id;
};

void SendJson(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void SendError(httplib::Response& res, const HttpError& e) {
  Json err{{"code", e.code}, {"message", e.message}};
  if (e.job_id) err["job_id"] = *e.job_id;
  SendJson(res, e.status, Json{{"error", err}});
}

int StatusFor(Errc code) {
  switch (code) {
    case Errc::Unreachable:
    case Errc::Timeout:
      return 503;
    case Errc::RemoteError:
    case Errc::RateLimited:
    case Errc::ReplayMiss:
      return 502;
    default:
      return 400;
  }
}

bool DefaultProbe(const gateway::EndpointSpec& spec) {
  httplib::Client client(spec.base_url);
  client.set_connection_timeout(std::chrono::seconds(1));
  client.set_read_timeout(std::chrono::seconds(2));
  return static_cast<bool>(client.Get("/"));
}

}  // namespace

BindAddress ParseBind(std::string_view spec) {
  BindAddress b;
  const auto colon = spec.rfind(':');
  std::string_view host = colon == std::string_view::npos ? spec : spec.substr(0, colon);
  if (!host.empty()) b.host = std::string(host);
  if (colon != std::string_view::npos) {
    const std::string port(spec.substr(colon + 1));
    char* end = nullptr;
    const long p = std::strtol(port.c_str(), &end, 10);
    if (port.empty() || *end != '\0' || p < 0 || p > 65535) {
      throw Error(Errc::Config, "bad port in bind address \"" + std::string(spec) + "\"");
    }
    b.port = static_cast<int>(p);
  }
  return b;
}

BindAddress BindFromEnvironment() {
  const char* env = std::getenv("DETOXFORGE_BIND");
  return env != nullptr && *env != '\0' ? ParseBind(env) : BindAddress{};
}

WorkerPool::WorkerPool(std::size_t workers, std::size_t capacity) : capacity_(capacity) {
  for (std::size_t i = 0; i < std::max<std::size_t>(1, workers); ++i) threads_.emplace_back([this] { Loop(); });
}

WorkerPool::~WorkerPool() { Shutdown(); }

bool WorkerPool::TrySubmit(const std::function<std::function<void()>()>& admit) {
  {
    std::lock_guard lock(mu_);
    if (stopping_ || queue_.size() >= capacity_) return false;
    queue_.push_back(admit());
  }
  cv_.notify_one();
  return true;
}

void WorkerPool::Submit(std::function<void()> task) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back(std::move(task));
  }
  cv_.notify_one();
}

void WorkerPool::Shutdown() {
  {
    std::lock_guard lock(mu_);
    if (stopping_ && threads_.empty()) return;
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  threads_.clear();
}

void WorkerPool::Loop() {
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

struct Service::Impl {
  Impl(gateway::Gateway& g, const prompts::PromptFactory& f, ServiceOptions o)
      : gw(g),
        factory(f),
        options(std::move(o)),
        store(options.state_dir),
        validator(schema::OpenApiDocument()),
        runtime(gw, factory),
        pool(options.workers, options.queue_capacity) {
    if (!options.probe) options.probe = DefaultProbe;
    Routes();
  }

  gateway::Gateway& gw;
  const prompts::PromptFactory& factory;
  ServiceOptions options;
  JobStore store;
  schema::Validator validator;
  runtime::DetoxRuntime runtime;
  WorkerPool pool;
  httplib::Server server;
  std::thread listener;

  Json ParseBody(const httplib::Request& req, std::string_view schema_name) const {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      throw HttpError{400, "Schema", std::string("body is not JSON: ") + e.what(), std::nullopt};
    }
    const auto violations = validator.ValidateRef(body, "#/components/schemas/" + std::string(schema_name));
    if (!violations.empty()) throw HttpError{400, "Schema", schema::Describe(violations), std::nullopt};
    return body;
  }

  void RequireEndpoint(const std::string& id, gateway::EndpointKind kind) const {
    if (!gw.has_endpoint(id)) throw HttpError{400, "Config", "unknown endpoint \"" + id + "\"", std::nullopt};
    if (gw.endpoint(id).kind != kind) {
      throw HttpError{400, "WrongEndpointKind",
                      "endpoint " + id + " is not a " + std::string(gateway::ToString(kind)), std::nullopt};
    }
  }

  std::filesystem::path DataPath(const std::string& rel) const {
    const std::filesystem::path p(rel);
    if (p.is_absolute() || std::any_of(p.begin(), p.end(), [](const auto& part) { return part == ".."; })) {
      throw Error(Errc::BadInput, "data paths must be relative to the data root: " + rel);
    }
    return options.data_root / p;
  }

  Json RunEvaluate(const Json& payload) {
    std::vector<metrics::EvalItem> items;
    if (payload.contains("items")) {
      for (const auto& j : payload["items"]) items.push_back(metrics::EvalItemFromJson(j));
    } else if (payload.contains("items_path")) {
      items = metrics::LoadEvalItems(DataPath(payload["items_path"].get<std::string>()));
    } else {
      throw Error(Errc::BadInput, "evaluate needs items or items_path");
    }
    metrics::EvalOptions eo;
    eo.jobs = options.jobs;
    const auto bleu = payload.value("bleu", Json::object());
    eo.bleu_mode = metrics::ParseBleuMode(bleu.value("mode", std::string("reference")));
    eo.bleu.smoothing = metrics::ParseSmoothing(bleu.value("smoothing", std::string("none")));
    eo.bleu.level = metrics::ParseBleuLevel(bleu.value("level", std::string("corpus")));
    eo.bleu.max_order = bleu.value("max_order", 4);
    auto report = metrics::Evaluate(gw, items, metrics::EvalEndpoints::FromJson(payload.at("endpoints")), eo);
    auto out = report.ToJson();
    out["table"] = report.ToTable();
    return out;
  }

  Json RunAdversarial(const Json& payload) {
    const bool ack = payload.value("acknowledge_offensive_content", false);
    Json cfg_json = payload;
    cfg_json.erase("acknowledge_offensive_content");
    if (!cfg_json.contains("toxic_words") || !cfg_json.contains("templates")) {
      if (options.adversarial_defaults.empty()) throw Error(Errc::Config, "no default adversary config configured");
      auto defaults = Json::parse(ReadFile(options.adversarial_defaults));
      for (const auto& [k, v] : cfg_json.items()) defaults[k] = v;
      cfg_json = std::move(defaults);
    }
    const auto cfg = adversarial::AdversaryConfig::FromJson(cfg_json);
    const auto items = adversarial::GenerateTestbed(cfg);
    Json rows = Json::array();
    for (const auto& s : items) rows.push_back(adversarial::ToJson(s, ack));
    return Json{{"count", items.size()}, {"seed", cfg.seed}, {"redacted", !ack}, {"items", rows}};
  }

  Json RunRoundtrip(const std::string& job_id, const Json& payload) {
    std::vector<corpus::ParallelRecord> pairs;
    if (payload.contains("pairs")) {
      for (const auto& j : payload["pairs"]) pairs.push_back(j.get<corpus::ParallelRecord>());
    } else if (payload.contains("pairs_path")) {
      pairs = corpus::LoadParallelRecords(DataPath(payload["pairs_path"].get<std::string>()));
    } else {
      throw Error(Errc::BadInput, "roundtrip needs pairs or pairs_path");
    }
    const auto limit = payload.value("limit", roundtrip::kReferenceSampleSize);
    if (pairs.size() > limit) pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(limit), pairs.end());
    const auto& e = payload.at("endpoints");
    roundtrip::RoundtripOptions ro;
    ro.jobs = options.jobs;
    ro.audit_path = options.state_dir / "roundtrip" / (job_id + ".jsonl");
    auto r = roundtrip::Roundtrip(gw, pairs, payload.at("language").get<std::string>(),
                                  {e.at("translator").get<std::string>(), e.at("classifier").get<std::string>(),
                                   e.at("embedder").get<std::string>()},
                                  ro);
    Json failures = Json::array();
    for (const auto& f : r.failures) {
      failures.push_back(Json{{"record_id", f.record_id}, {"code", ToString(f.code)}, {"message", f.message}});
    }
    return Json{{"report", r.report.ToJson()}, {"failures", failures}, {"audit_path", ro.audit_path->string()}};
  }

  void Execute(const std::string& id) {
    Job job;
    try {
      job = store.MarkRunning(id);
    } catch (const Error&) {
      return;
    }
    try {
      Json result;
      switch (job.kind) {
        case JobKind::Evaluate: result = RunEvaluate(job.payload); break;
        case JobKind::Adversarial: result = RunAdversarial(job.payload); break;
        case JobKind::Roundtrip: result = RunRoundtrip(job.id, job.payload); break;
        case JobKind::Detox: result = runtime.Detoxify(runtime::DetoxRequest::FromJson(job.payload)).ToJson(); break;
      }
      store.Complete(id, std::move(result));
    } catch (const std::exception& e) {
      store.Fail(id, e.what());
    }
  }

  void Enqueue(httplib::Response& res, JobKind kind, Json payload) {
    Job created;
    const bool ok = pool.TrySubmit([&] {
      created = store.Create(kind, std::move(payload));
      return [this, id = created.id] { Execute(id); };
    });
    if (!ok) throw HttpError{429, "QueueFull", "job queue is full, retry later", std::nullopt};
    SendJson(res, 202, created.ToJson());
  }

  template <typename Fn>
  httplib::Server::Handler Guard(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        SendError(res, e);
      } catch (const ReviewConflict& e) {
        SendError(res, {409, "Conflict", e.what(), std::nullopt});
      } catch (const Error& e) {
        SendError(res, {StatusFor(e.code()), std::string(ToString(e.code())), e.message(), std::nullopt});
      } catch (const Json::exception& e) {
        SendError(res, {400, "Schema", e.what(), std::nullopt});
      } catch (const std::exception& e) {
        SendError(res, {500, "Internal", e.what(), std::nullopt});
      }
    };
  }

  bool OriginAllowed(const std::string& origin) const {
    return std::any_of(options.cors_origins.begin(), options.cors_origins.end(),
                       [&](const std::string& o) { return o == "*" || o == origin; });
  }

  void Routes() {
    server.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      const auto origin = req.get_header_value("Origin");
      if (!origin.empty() && OriginAllowed(origin)) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
      }
    });
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Max-Age", "600");
    });

    server.Post("/detoxify", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = ParseBody(req, "DetoxRequest");
      const auto request = runtime::DetoxRequest::FromJson(body);
      RequireEndpoint(request.endpoints.detox_model, gateway::EndpointKind::Chat);
      RequireEndpoint(request.endpoints.paraphrase_classifier, gateway::EndpointKind::Classifier);
      const auto job = store.Create(JobKind::Detox, request.ToJson());
      store.MarkRunning(job.id);
      try {
        auto done = store.Complete(job.id, runtime.Detoxify(request).ToJson());
        SendJson(res, 200, done.ToJson());
      } catch (const Error& e) {
        store.Fail(job.id, e.what());
        throw HttpError{StatusFor(e.code()), std::string(ToString(e.code())), e.message(), job.id};
      }
    }));

    server.Post("/evaluate", Guard([this](const httplib::Request& req, httplib::Response& res) {
      auto body = ParseBody(req, "EvaluateRequest");
      if (!body.contains("items") && !body.contains("items_path")) {
        throw HttpError{400, "Schema", "one of items or items_path is required", std::nullopt};
      }
      const auto& e = body["endpoints"];
      RequireEndpoint(e["style"], gateway::EndpointKind::Classifier);
      RequireEndpoint(e["fluency"], gateway::EndpointKind::Classifier);
      RequireEndpoint(e["sim"], gateway::EndpointKind::Embedder);
      RequireEndpoint(e["bertscore"], gateway::EndpointKind::Embedder);
      Enqueue(res, JobKind::Evaluate, std::move(body));
    }));

    server.Post("/adversarial/generate", Guard([this](const httplib::Request& req, httplib::Response& res) {
      auto body = ParseBody(req, "AdversarialRequest");
      if (body.contains("toxic_words") && body.contains("templates")) {
        auto cfg = body;
        cfg.erase("acknowledge_offensive_content");
        try {
          adversarial::AdversaryConfig::FromJson(cfg);
        } catch (const Error& e) {
          throw HttpError{400, std::string(ToString(e.code())), e.message(), std::nullopt};
        }
      }
      Enqueue(res, JobKind::Adversarial, std::move(body));
    }));

    server.Post("/roundtrip", Guard([this](const httplib::Request& req, httplib::Response& res) {
      auto body = ParseBody(req, "RoundtripRequest");
      if (!body.contains("pairs") && !body.contains("pairs_path")) {
        throw HttpError{400, "Schema", "one of pairs or pairs_path is required", std::nullopt};
      }
      const auto& e = body["endpoints"];
      RequireEndpoint(e["translator"], gateway::EndpointKind::Translator);
      RequireEndpoint(e["classifier"], gateway::EndpointKind::Classifier);
      RequireEndpoint(e["embedder"], gateway::EndpointKind::Embedder);
      Enqueue(res, JobKind::Roundtrip, std::move(body));
    }));

    server.Get(R"(/jobs/([^/]+))", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto id = req.matches[1].str();
      auto job = store.Get(id);
      if (!job) throw HttpError{404, "NotFound", "unknown job " + id, std::nullopt};
      SendJson(res, 200, job->ToJson());
    }));

    server.Post("/reviews", Guard([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = ParseBody(req, "ReviewInput");
      auto review = ReviewRecord::FromJson(body);
      if (!store.Get(review.job_id)) throw HttpError{404, "NotFound", "unknown job " + review.job_id, std::nullopt};
      SendJson(res, 201, store.AddReview(std::move(review)).ToJson());
    }));

    server.Get("/reviews", Guard([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::string> job_id;
      if (req.has_param("job_id")) job_id = req.get_param_value("job_id");
      Json list = Json::array();
      for (const auto& r : store.Reviews(job_id)) list.push_back(r.ToJson());
      SendJson(res, 200, Json{{"reviews", list}});
    }));

    server.Get("/healthz", Guard([this](const httplib::Request&, httplib::Response& res) {
      Json endpoints = Json::array();
      bool healthy = true;
      for (const auto& id : gw.endpoint_ids()) {
        const auto& spec = gw.endpoint(id);
        Json reachable = nullptr;
        if (gw.mode() != gateway::Mode::Replay) {
          const bool up = options.probe(spec);
          healthy = healthy && up;
          reachable = up;
        }
        endpoints.push_back(Json{{"id", id}, {"kind", gateway::ToString(spec.kind)}, {"reachable", reachable}});
      }
      SendJson(res, 200,
               Json{{"status", healthy ? "ok" : "degraded"}, {"mode", gateway::ToString(gw.mode())},
                    {"endpoints", endpoints}});
    }));

    server.Get("/openapi.json", [](const httplib::Request&, httplib::Response& res) {
      SendJson(res, 200, schema::OpenApiDocument());
    });
    server.Get("/schema/ratings", [](const httplib::Request&, httplib::Response& res) {
      SendJson(res, 200, schema::RatingTaxonomy());
    });
  }
};

Service::Service(gateway::Gateway& gw, const prompts::PromptFactory& factory, ServiceOptions options)
    : impl_(std::make_unique<Impl>(gw, factory, std::move(options))) {}

Service::~Service() { Stop(); }

JobStore& Service::store() { return impl_->store; }

int Service::Start() {
  auto& s = impl_->server;
  const auto& bind = impl_->options.bind;
  int port = bind.port;
  // SO_REUSEPORT, httplib's default, would let a second instance share the
  // port and split traffic with this one.
  s.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (port == 0) {
    port = s.bind_to_any_port(bind.host);
    if (port < 0) throw Error(Errc::Config, "cannot bind " + bind.host);
  } else if (!s.bind_to_port(bind.host, port)) {
    throw Error(Errc::Config, "cannot bind " + bind.host + ":" + std::to_string(port));
  }
  for (const auto& id : impl_->store.pending_on_load()) {
    impl_->pool.Submit([impl = impl_.get(), id] { impl->Execute(id); });
  }
  impl_->listener = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port;
}

void Service::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->listener.joinable()) impl_->listener.join();
  impl_->pool.Shutdown();
}

}  // namespace detoxforge::service
