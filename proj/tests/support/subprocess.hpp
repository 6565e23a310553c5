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

// Runs the built CLI as a child process for end-to-end tests.

#pragma once

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "detoxforge/util.hpp"
#include "test_support.hpp"

namespace detoxforge::testing {

// stdout and stderr go to the given files. DETOXFORGE_SHARE points the child
// at the source tree's templates and data.
inline pid_t SpawnCli(const std::vector<std::string>& args, const std::filesystem::path& out,
                      const std::filesystem::path& err) {
  const pid_t pid = ::fork();
  if (pid == 0) {
    const int o = ::open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    const int e = ::open(err.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
    ::dup2(o, 1);
    ::dup2(e, 2);
    std::string exe = DETOXFORGE_CLI_PATH;
    std::vector<std::string> copy = args;
    std::vector<char*> argv{exe.data()};
    for (auto& a : copy) argv.push_back(a.data());
    argv.push_back(nullptr);
    ::setenv("DETOXFORGE_SHARE", DETOXFORGE_TEST_SOURCE_DIR, 1);
    ::execv(exe.c_str(), argv.data());
    ::_exit(127);
  }
  return pid;
}

// Exit status, or 128 + signal number.
inline int Reap(pid_t pid) {
  int status = 0;
  ::waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline RunResult RunCli(const std::vector<std::string>& args) {
  TempDir io;
  RunResult r;
  r.exit_code = Reap(SpawnCli(args, io / "out", io / "err"));
  r.out = ReadFile(io / "out");
  r.err = ReadFile(io / "err");
  return r;
}

// A port that was free a moment ago. The probe socket is closed on return.
inline int FreePort() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  socklen_t len = sizeof(addr);
  if (fd < 0 || ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    if (fd >= 0) ::close(fd);
    throw std::runtime_error("cannot find a free port");
  }
  ::close(fd);
  return ntohs(addr.sin_port);
}

inline bool WaitListening(httplib::Client& c) {
  for (int i = 0; i < 500; ++i) {
    if (auto res = c.Get("/healthz"); res && res->status == 200) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return false;
}

// The job JSON once it reaches `state`, or null after about ten seconds.
inline Json WaitJob(httplib::Client& c, const std::string& id, const std::string& state) {
  for (int i = 0; i < 1000; ++i) {
    if (auto res = c.Get("/jobs/" + id); res && res->status == 200) {
      auto j = Json::parse(res->body);
      if (j["state"] == state) return j;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return Json();
}

}  // namespace detoxforge::testing
