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

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "detoxforge/gateway.hpp"
#include "detoxforge/job_store.hpp"
#include "detoxforge/prompts.hpp"

namespace detoxforge::service {

struct BindAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// "host:port", ":port" or "host". Throws Config on a malformed port.
BindAddress ParseBind(std::string_view spec);
// DETOXFORGE_BIND, or the default 127.0.0.1:8080.
BindAddress BindFromEnvironment();

// Fixed threads over a bounded queue.
class WorkerPool {
 public:
  WorkerPool(std::size_t workers, std::size_t capacity);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  // Runs `admit` under the queue lock and enqueues its task only when there
  // is room. Returns false, without calling `admit`, when the queue is full.
  bool TrySubmit(const std::function<std::function<void()>()>& admit);
  // Ignores the capacity bound.
  void Submit(std::function<void()> task);
  void Shutdown();

 private:
  void Loop();

  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

struct ServiceOptions {
  BindAddress bind;
  std::filesystem::path state_dir = "detoxforge-state";
  std::filesystem::path data_root = "data";
  std::filesystem::path adversarial_defaults;  // used when a request omits the word list
  std::size_t workers = 2;
  std::size_t queue_capacity = 64;
  unsigned jobs = 1;  // parallelism inside one job
  std::vector<std::string> cors_origins = {"http://localhost:5173", "http://127.0.0.1:5173"};
  // Reachability check for /healthz; defaults to an HTTP round trip.
  std::function<bool(const gateway::EndpointSpec&)> probe;
};

class Service {
 public:
  Service(gateway::Gateway& gw, const prompts::PromptFactory& factory, ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds (port 0 picks a free port), re-enqueues jobs left queued by a
  // previous run, and serves on a background thread. Returns the bound port.
  int Start();
  void Stop();

  JobStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace detoxforge::service
