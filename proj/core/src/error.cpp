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

#include "detoxforge/error.hpp"

namespace detoxforge {

std::string_view ToString(Errc code) {
  switch (code) {
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::BadRatios: return "BadRatios";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::MixedPlatforms: return "MixedPlatforms";
    case Errc::InvalidSample: return "InvalidSample";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::BadFewShotCount: return "BadFewShotCount";
    case Errc::ExemplarCountMismatch: return "ExemplarCountMismatch";
    case Errc::TemplateError: return "TemplateError";
    case Errc::Timeout: return "Timeout";
    case Errc::RateLimited: return "RateLimited";
    case Errc::RemoteError: return "RemoteError";
    case Errc::ReplayMiss: return "ReplayMiss";
    case Errc::BadInput: return "BadInput";
    case Errc::Unreachable: return "Unreachable";
    case Errc::WrongEndpointKind: return "WrongEndpointKind";
    case Errc::EmptyEnsemble: return "EmptyEnsemble";
    case Errc::MismatchedEnsembles: return "MismatchedEnsembles";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::Empty: return "Empty";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::FixtureMissing: return "FixtureMissing";
    case Errc::ParseError: return "ParseError";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::UnsupportedLanguage: return "UnsupportedLanguage";
    case Errc::Io: return "Io";
    case Errc::Config: return "Config";
    case Errc::Schema: return "Schema";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(ToString(code)) + ": " + message),
      code_(code),
      message_(message) {}

int ExitClassFor(Errc code) {
  switch (code) {
    case Errc::Config:
    case Errc::ConfigInvalid:
    case Errc::TemplateError:
    case Errc::WrongEndpointKind:
    case Errc::UnsupportedLanguage:
      return 2;
    case Errc::Timeout:
    case Errc::RateLimited:
    case Errc::RemoteError:
    case Errc::ReplayMiss:
    case Errc::Unreachable:
      return 3;
    default:
      return 4;
  }
}

}  // namespace detoxforge
