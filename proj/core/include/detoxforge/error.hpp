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

#include <stdexcept>
#include <string>
#include <string_view>

namespace detoxforge {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps codes onto exit classes (see ExitClassFor).
enum class Errc {
  // corpus
  UnknownLabel,
  BadRatios,
  DuplicateId,
  MixedPlatforms,
  InvalidSample,
  // prompts
  EmptyInput,
  BadFewShotCount,
  ExemplarCountMismatch,
  TemplateError,
  // gateway
  Timeout,
  RateLimited,
  RemoteError,
  ReplayMiss,
  BadInput,
  Unreachable,
  WrongEndpointKind,
  // filtration
  EmptyEnsemble,
  MismatchedEnsembles,
  // metrics
  LengthMismatch,
  Empty,
  DimensionMismatch,
  ZeroVector,
  OutOfRange,
  // adversarial
  IndexOutOfRange,
  ConfigInvalid,
  FixtureMissing,
  // runtime / roundtrip
  ParseError,
  EmptyBatch,
  UnsupportedLanguage,
  // shared
  Io,
  Config,
  Schema,
};

std::string_view ToString(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  // what() without the leading code name.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

// Process exit classes used by the CLI: 1 usage, 2 config, 3 remote, 4 data.
int ExitClassFor(Errc code);

}  // namespace detoxforge
