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

#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/util.hpp"

namespace detoxforge::schema {

struct Violation {
  std::string path;  // JSON pointer into the instance
  std::string message;
};

// Validates against the JSON Schema keywords the service documents use:
// type (single or list), properties, required, additionalProperties (bool or
// schema), enum, items, minimum, maximum, minLength, maxLength, minItems,
// maxItems and local "$ref" pointers into the owning document.
class Validator {
 public:
  explicit Validator(Json document);

  const Json& document() const { return document_; }
  std::vector<Violation> Validate(const Json& instance, const Json& schema) const;
  // `ref` is a pointer such as "#/components/schemas/Job".
  std::vector<Violation> ValidateRef(const Json& instance, std::string_view ref) const;

 private:
  const Json& Resolve(std::string_view ref) const;
  void Check(const Json& instance, const Json& schema, const std::string& path, std::vector<Violation>& out,
             int depth) const;

  Json document_;
};

// The service's OpenAPI document and rating taxonomy, compiled into the library.
const Json& OpenApiDocument();
const Json& RatingTaxonomy();

std::string Describe(const std::vector<Violation>& violations);

}  // namespace detoxforge::schema
