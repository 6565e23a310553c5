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

#include "detoxforge/schema.hpp"

#include <algorithm>
#include <cmath>

#include "detoxforge/error.hpp"

namespace detoxforge::schema {

// Generated at configure time from api/.
extern const char* const kOpenApiJson;
extern const char* const kRatingsJson;

namespace {

bool HasType(const Json& v, std::string_view type) {
  if (type == "null") return v.is_null();
  if (type == "boolean") return v.is_boolean();
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
  }
  return false;
}

std::string EscapePointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

Validator::Validator(Json document) : document_(std::move(document)) {}

const Json& Validator::Resolve(std::string_view ref) const {
  if (ref.empty() || ref[0] != '#') throw Error(Errc::Schema, "only local references are supported: " + std::string(ref));
  try {
    return document_.at(Json::json_pointer(std::string(ref.substr(1))));
  } catch (const Json::exception&) {
    throw Error(Errc::Schema, "unresolvable reference " + std::string(ref));
  }
}

std::vector<Violation> Validator::Validate(const Json& instance, const Json& schema) const {
  std::vector<Violation> out;
  Check(instance, schema, "", out, 0);
  return out;
}

std::vector<Violation> Validator::ValidateRef(const Json& instance, std::string_view ref) const {
  return Validate(instance, Resolve(ref));
}

void Validator::Check(const Json& v, const Json& s, const std::string& path, std::vector<Violation>& out,
                      int depth) const {
  if (depth > 64) throw Error(Errc::Schema, "schema nesting too deep at " + path);
  const std::string where = path.empty() ? "/" : path;
  if (s.contains("$ref")) {
    Check(v, Resolve(s["$ref"].get<std::string>()), path, out, depth + 1);
    return;
  }
  if (s.contains("type")) {
    const auto& t = s["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = HasType(v, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || HasType(v, alt.get<std::string>());
    }
    if (!ok) {
      out.push_back({where, "expected type " + t.dump() + ", got " + std::string(v.type_name())});
      return;
    }
  }
  if (s.contains("enum")) {
    const auto& e = s["enum"];
    if (std::find(e.begin(), e.end(), v) == e.end()) out.push_back({where, "value " + v.dump() + " not in " + e.dump()});
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (s.contains("minimum") && x < s["minimum"].get<double>()) out.push_back({where, "below minimum " + s["minimum"].dump()});
    if (s.contains("maximum") && x > s["maximum"].get<double>()) out.push_back({where, "above maximum " + s["maximum"].dump()});
  }
  if (v.is_string()) {
    const auto len = DecodeUtf8(v.get_ref<const std::string&>()).size();
    if (s.contains("minLength") && len < s["minLength"].get<std::size_t>()) {
      out.push_back({where, "shorter than " + s["minLength"].dump() + " characters"});
    }
    if (s.contains("maxLength") && len > s["maxLength"].get<std::size_t>()) {
      out.push_back({where, "longer than " + s["maxLength"].dump() + " characters"});
    }
  }
  if (v.is_array()) {
    if (s.contains("minItems") && v.size() < s["minItems"].get<std::size_t>()) {
      out.push_back({where, "fewer than " + s["minItems"].dump() + " items"});
    }
    if (s.contains("maxItems") && v.size() > s["maxItems"].get<std::size_t>()) {
      out.push_back({where, "more than " + s["maxItems"].dump() + " items"});
    }
    if (s.contains("items")) {
      for (std::size_t i = 0; i < v.size(); ++i) Check(v[i], s["items"], path + "/" + std::to_string(i), out, depth + 1);
    }
  }
  if (v.is_object()) {
    if (s.contains("required")) {
      for (const auto& k : s["required"]) {
        if (!v.contains(k.get<std::string>())) out.push_back({where, "missing required property \"" + k.get<std::string>() + "\""});
      }
    }
    const Json empty = Json::object();
    const auto& props = s.contains("properties") ? s["properties"] : empty;
    for (const auto& [key, value] : v.items()) {
      const auto child = path + "/" + EscapePointer(key);
      if (props.contains(key)) {
        Check(value, props[key], child, out, depth + 1);
      } else if (s.contains("additionalProperties")) {
        const auto& ap = s["additionalProperties"];
        if (ap.is_boolean()) {
          if (!ap.get<bool>()) out.push_back({child, "unexpected property \"" + key + "\""});
        } else {
          Check(value, ap, child, out, depth + 1);
        }
      }
    }
  }
}

const Json& OpenApiDocument() {
  static const Json doc = Json::parse(kOpenApiJson);
  return doc;
}

const Json& RatingTaxonomy() {
  static const Json doc = Json::parse(kRatingsJson);
  return doc;
}

std::string Describe(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.path + ": " + v.message;
  }
  return out;
}

}  // namespace detoxforge::schema
