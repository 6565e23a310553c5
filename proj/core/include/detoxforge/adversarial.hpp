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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "detoxforge/util.hpp"

namespace detoxforge::adversarial {

inline constexpr std::string_view kSlot = "<word>";

enum class Perturbation { Insertion, Replacement };
std::string_view ToString(Perturbation p);
Perturbation ParsePerturbation(std::string_view s);

// Words, templates and perturbation characters are UTF-8; lengths and
// indices count codepoints.
struct AdversaryConfig {
  std::vector<std::string> toxic_words;
  std::vector<std::string> templates;
  std::vector<std::string> perturb_chars = {"!", "@", "#", "*"};
  std::size_t n = 5000;
  std::uint64_t seed = 0;

  // Throws ConfigInvalid when a list is empty, a template does not hold the
  // slot exactly once, a perturbation entry is not one character, a
  // perturbation character occurs in a toxic word or template, or a template
  // already contains a toxic word as a whitespace-delimited token.
  void Validate() const;

  static AdversaryConfig FromJson(const Json& j);
  static AdversaryConfig Load(const std::filesystem::path& path);
  Json ToJson() const;
};

struct AdversarialSentence {
  std::string sentence;
  std::string template_text;
  std::string original_word;
  std::string perturbed_word;
  Perturbation mode = Perturbation::Insertion;
  std::string character;
  std::size_t index = 0;

  bool operator==(const AdversarialSentence&) const = default;
};

// Insertion accepts index in [0, len]; Replacement in [0, len). Throws
// IndexOutOfRange otherwise.
std::string Perturb(std::string_view word, std::string_view character, std::size_t index, Perturbation mode);

std::string Situate(std::string_view template_text, std::string_view word);

// Per iteration the generator draws, in order: word, template, character,
// index in [0, len), perturbation; for Insertion the index is then drawn
// again from [0, len].
std::vector<AdversarialSentence> GenerateTestbed(const AdversaryConfig& cfg);

// Without acknowledgment, the word fields are replaced by a mask and the
// sentence shows the mask in the slot.
Json ToJson(const AdversarialSentence& s, bool acknowledged);
std::string SerializeTestbed(const std::vector<AdversarialSentence>& items, bool acknowledged);

inline constexpr std::string_view kRedactionMask = "[redacted]";

struct CuratedResponse {
  std::string system;
  std::string text;
  std::string category;
};

struct CuratedAdversary {
  std::string id;
  std::string text;
  std::string token;  // the obfuscated toxic token
  std::size_t token_offset = 0;
  std::vector<CuratedResponse> responses;
};

// Throws FixtureMissing when the file is absent and ConfigInvalid when the
// token metadata does not match the text.
std::vector<CuratedAdversary> CuratedSuite(const std::filesystem::path& fixture);
Json ToJson(const CuratedAdversary& c, bool acknowledged);

}  // namespace detoxforge::adversarial
