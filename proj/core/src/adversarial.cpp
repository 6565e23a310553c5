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

#include "detoxforge/adversarial.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "detoxforge/error.hpp"

namespace detoxforge::adversarial {
namespace {

std::size_t CountOccurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

std::vector<std::string> WhitespaceTokens(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

std::string_view ToString(Perturbation p) { return p == Perturbation::Insertion ? "insertion" : "replacement"; }

Perturbation ParsePerturbation(std::string_view s) {
  if (s == "insertion") return Perturbation::Insertion;
  if (s == "replacement") return Perturbation::Replacement;
  throw Error(Errc::ConfigInvalid, "unknown perturbation \"" + std::string(s) + "\"");
}

void AdversaryConfig::Validate() const {
  if (toxic_words.empty()) throw Error(Errc::ConfigInvalid, "toxic word list is empty");
  if (templates.empty()) throw Error(Errc::ConfigInvalid, "template list is empty");
  if (perturb_chars.empty()) throw Error(Errc::ConfigInvalid, "perturbation character list is empty");
  std::set<char32_t> chars;
  for (const auto& c : perturb_chars) {
    const auto cps = DecodeUtf8(c);
    if (cps.size() != 1) throw Error(Errc::ConfigInvalid, "perturbation entry \"" + c + "\" is not one character");
    chars.insert(cps[0]);
  }
  for (const auto& w : toxic_words) {
    if (w.empty()) throw Error(Errc::ConfigInvalid, "toxic word list contains an empty entry");
    for (char32_t cp : DecodeUtf8(w)) {
      if (chars.count(cp)) {
        throw Error(Errc::ConfigInvalid, "toxic word \"" + w + "\" contains perturbation character " + EncodeUtf8(cp));
      }
    }
  }
  for (const auto& t : templates) {
    if (CountOccurrences(t, kSlot) != 1) {
      throw Error(Errc::ConfigInvalid, "template \"" + t + "\" must contain " + std::string(kSlot) + " exactly once");
    }
    for (char32_t cp : DecodeUtf8(t)) {
      if (chars.count(cp)) {
        throw Error(Errc::ConfigInvalid, "template \"" + t + "\" contains perturbation character " + EncodeUtf8(cp));
      }
    }
    for (const auto& tok : WhitespaceTokens(t)) {
      if (std::find(toxic_words.begin(), toxic_words.end(), tok) != toxic_words.end()) {
        throw Error(Errc::ConfigInvalid, "template \"" + t + "\" already contains a toxic word");
      }
    }
  }
}

AdversaryConfig AdversaryConfig::FromJson(const Json& j) {
  AdversaryConfig c;
  try {
    c.toxic_words = j.at("toxic_words").get<std::vector<std::string>>();
    c.templates = j.at("templates").get<std::vector<std::string>>();
    if (j.contains("perturb_chars")) c.perturb_chars = j["perturb_chars"].get<std::vector<std::string>>();
    c.n = j.value("n", c.n);
    c.seed = j.value("seed", c.seed);
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigInvalid, std::string("bad adversary config: ") + e.what());
  }
  c.Validate();
  return c;
}

AdversaryConfig AdversaryConfig::Load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(Errc::Config, "missing adversary config " + path.string());
  try {
    return FromJson(Json::parse(ReadFile(path)));
  } catch (const Json::parse_error& e) {
    throw Error(Errc::ConfigInvalid, path.string() + ": " + e.what());
  }
}

Json AdversaryConfig::ToJson() const {
  return Json{{"toxic_words", toxic_words}, {"templates", templates}, {"perturb_chars", perturb_chars},
              {"n", n},                     {"seed", seed}};
}

std::string Perturb(std::string_view word, std::string_view character, std::size_t index, Perturbation mode) {
  const auto cps = DecodeUtf8(word);
  const std::size_t len = cps.size();
  const bool ok = mode == Perturbation::Insertion ? index <= len : index < len;
  if (!ok) {
    throw Error(Errc::IndexOutOfRange, std::string(ToString(mode)) + " index " + std::to_string(index) +
                                           " out of range for a word of length " + std::to_string(len));
  }
  std::u32string out(cps.begin(), cps.begin() + static_cast<std::ptrdiff_t>(index));
  for (char32_t c : DecodeUtf8(character)) out.push_back(c);
  const std::size_t resume = mode == Perturbation::Insertion ? index : index + 1;
  out.append(cps.begin() + static_cast<std::ptrdiff_t>(resume), cps.end());
  return EncodeUtf8(out);
}

std::string Situate(std::string_view template_text, std::string_view word) {
  const auto pos = template_text.find(kSlot);
  if (pos == std::string_view::npos) throw Error(Errc::ConfigInvalid, "template has no slot");
  std::string out(template_text.substr(0, pos));
  out.append(word);
  out.append(template_text.substr(pos + kSlot.size()));
  return out;
}

std::vector<AdversarialSentence> GenerateTestbed(const AdversaryConfig& cfg) {
  cfg.Validate();
  Rng rng(cfg.seed);
  std::vector<AdversarialSentence> out;
  out.reserve(cfg.n);
  for (std::size_t iter = 0; iter < cfg.n; ++iter) {
    const auto& word = cfg.toxic_words[rng.UniformBelow(cfg.toxic_words.size())];
    const auto& tmpl = cfg.templates[rng.UniformBelow(cfg.templates.size())];
    const auto& ch = cfg.perturb_chars[rng.UniformBelow(cfg.perturb_chars.size())];
    const std::size_t len = DecodeUtf8(word).size();
    std::size_t index = rng.UniformBelow(len);
    const auto mode = rng.UniformBelow(2) == 0 ? Perturbation::Insertion : Perturbation::Replacement;
    if (mode == Perturbation::Insertion) index = rng.UniformBelow(len + 1);
    auto perturbed = Perturb(word, ch, index, mode);
    out.push_back(AdversarialSentence{Situate(tmpl, perturbed), tmpl, word, std::move(perturbed), mode, ch, index});
  }
  return out;
}

Json ToJson(const AdversarialSentence& s, bool acknowledged) {
  if (acknowledged) {
    return Json{{"sentence", s.sentence},         {"template", s.template_text}, {"original_word", s.original_word},
                {"perturbed_word", s.perturbed_word}, {"mode", ToString(s.mode)},  {"char", s.character},
                {"index", s.index}};
  }
  return Json{{"sentence", Situate(s.template_text, kRedactionMask)},
              {"template", s.template_text},
              {"original_word", kRedactionMask},
              {"perturbed_word", kRedactionMask},
              {"mode", ToString(s.mode)},
              {"char", s.character},
              {"index", s.index},
              {"redacted", true}};
}

std::string SerializeTestbed(const std::vector<AdversarialSentence>& items, bool acknowledged) {
  std::string out;
  for (const auto& s : items) {
    out += ToJson(s, acknowledged).dump();
    out += '\n';
  }
  return out;
}

std::vector<CuratedAdversary> CuratedSuite(const std::filesystem::path& fixture) {
  if (!std::filesystem::exists(fixture)) {
    throw Error(Errc::FixtureMissing, "curated adversary fixture not found: " + fixture.string());
  }
  std::vector<CuratedAdversary> out;
  try {
    const auto doc = Json::parse(ReadFile(fixture));
    for (const auto& e : doc.at("entries")) {
      CuratedAdversary c;
      c.id = e.at("id").get<std::string>();
      c.text = e.at("text").get<std::string>();
      c.token = e.at("token").get<std::string>();
      c.token_offset = e.at("token_offset").get<std::size_t>();
      for (const auto& r : e.value("responses", Json::array())) {
        c.responses.push_back(CuratedResponse{r.at("system").get<std::string>(), r.at("text").get<std::string>(),
                                              r.at("category").get<std::string>()});
      }
      if (c.text.compare(c.token_offset, c.token.size(), c.token) != 0) {
        throw Error(Errc::ConfigInvalid, "curated entry " + c.id + ": token does not sit at token_offset");
      }
      out.push_back(std::move(c));
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::ConfigInvalid, fixture.string() + ": " + e.what());
  } catch (const std::out_of_range&) {
    throw Error(Errc::ConfigInvalid, fixture.string() + ": token_offset beyond text");
  }
  return out;
}

Json ToJson(const CuratedAdversary& c, bool acknowledged) {
  Json responses = Json::array();
  for (const auto& r : c.responses) {
    responses.push_back(Json{{"system", r.system},
                             {"category", r.category},
                             {"text", acknowledged ? r.text : std::string(kRedactionMask)}});
  }
  if (acknowledged) {
    return Json{{"id", c.id}, {"text", c.text}, {"token", c.token}, {"token_offset", c.token_offset},
                {"responses", responses}};
  }
  std::string masked = c.text;
  masked.replace(c.token_offset, c.token.size(), kRedactionMask);
  return Json{{"id", c.id},
              {"text", masked},
              {"token", kRedactionMask},
              {"token_offset", c.token_offset},
              {"responses", responses},
              {"redacted", true}};
}

}  // namespace detoxforge::adversarial
