// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/conceptualizer/backend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "conke/error.hpp"
#include "conke/text.hpp"
#include "net/http.hpp"

namespace conke {

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read lexicon " + path.string());
  try {
    return nlohmann::json::parse(in).get<Lexicon>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed lexicon " + path.string() + ": " + e.what());
  }
}

Lexicon invert_lexicon(const Lexicon& lexicon) {
  std::map<std::string, std::set<std::string>> sets;
  for (const auto& [term, hypernyms] : lexicon)
    for (const auto& h : hypernyms) sets[h].insert(term);
  Lexicon out;
  for (auto& [h, terms] : sets) out[h].assign(terms.begin(), terms.end());
  return out;
}

LexiconBackend::LexiconBackend(Lexicon lexicon, std::optional<Lexicon> inverse,
                               std::size_t focus_from_end)
    : lexicon_(std::move(lexicon)), focus_from_end_(focus_from_end) {
  for (const auto& [term, hypernyms] : lexicon_)
    if (hypernyms.empty()) throw InputError("lexicon entry '" + term + "' has no hypernyms");
  inverse_ = inverse ? std::move(*inverse) : invert_lexicon(lexicon_);
  for (const auto& [concept_term, terms] : inverse_)
    if (terms.empty())
      throw InputError("inverse lexicon entry '" + concept_term + "' has no instances");
}

std::string LexiconBackend::focus_term(const std::string& head) const {
  const auto words = split_words(head);
  if (words.size() <= focus_from_end_) return {};
  return words[words.size() - 1 - focus_from_end_];
}

std::vector<std::string> LexiconBackend::substitute(const std::string& head,
                                                    const Lexicon& map) const {
  auto words = split_words(head);
  if (words.size() <= focus_from_end_) return {};
  const std::size_t pos = words.size() - 1 - focus_from_end_;
  auto it = map.find(words[pos]);
  if (it == map.end()) return {};
  const std::string original = words[pos];
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& replacement : it->second) {
    if (replacement == original) continue;
    words[pos] = replacement;
    std::string h = normalize_whitespace(join_words(words));
    if (seen.insert(h).second) out.push_back(std::move(h));
  }
  return out;
}

std::vector<std::string> LexiconBackend::abstract_heads(const std::string& head,
                                                        std::size_t k) const {
  auto out = substitute(head, lexicon_);
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<std::string> LexiconBackend::instance_heads(const std::string& concept_head,
                                                        std::size_t) const {
  return substitute(concept_head, inverse_);
}

NumberedList parse_numbered_list(std::string_view text) {
  NumberedList out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string trimmed = normalize_whitespace(line);
    if (trimmed.empty()) continue;
    std::size_t i = 0;
    while (i < trimmed.size() && std::isdigit(static_cast<unsigned char>(trimmed[i]))) ++i;
    if (i == 0 || i >= trimmed.size() || (trimmed[i] != '.' && trimmed[i] != ')')) {
      ++out.skipped;
      continue;
    }
    std::string item = normalize_whitespace(trimmed.substr(i + 1));
    if (item.empty()) {
      ++out.skipped;
      continue;
    }
    out.items.push_back(std::move(item));
  }
  return out;
}

std::string load_prompt(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read prompt template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

LlmBackend::LlmBackend(LlmBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) {
    if (const char* env = std::getenv("CONKE_LLM_URL")) config_.base_url = env;
  }
  if (config_.api_key.empty()) {
    if (const char* env = std::getenv("CONKE_API_KEY")) config_.api_key = env;
  }
  if (config_.base_url.empty())
    throw InputError("llm backend needs a base URL (or CONKE_LLM_URL)");
  net::Endpoint::parse(config_.base_url);
  if (config_.max_tokens <= 0) throw InputError("llm max_tokens must be > 0");
}

namespace {

std::string fill(std::string pattern, std::string_view key, const std::string& value) {
  for (std::size_t pos = pattern.find(key); pos != std::string::npos;
       pos = pattern.find(key, pos + value.size()))
    pattern.replace(pos, key.size(), value);
  return pattern;
}

}  // namespace

std::vector<std::string> LlmBackend::complete_list(const std::string& prompt,
                                                   std::size_t k) const {
  const net::Endpoint endpoint = net::Endpoint::parse(config_.base_url);
  net::RetryPolicy retry{config_.attempts, config_.initial_backoff, config_.timeout};
  net::Headers headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  const nlohmann::json body{{"prompt", prompt},
                            {"max_tokens", config_.max_tokens},
                            {"temperature", config_.temperature}};
  const std::string raw = net::post_json(endpoint, "/complete", body.dump(), retry, headers);
  std::string text;
  try {
    const nlohmann::json j = nlohmann::json::parse(raw);
    text = j.at("text").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("completion response has no \"text\" string", raw);
  }
  NumberedList list = parse_numbered_list(text);
  skipped_ += list.skipped;
  if (list.items.empty()) throw ProtocolError("completion holds no numbered list item", text);
  if (list.items.size() > k) list.items.resize(k);
  return list.items;
}

std::vector<std::string> LlmBackend::abstract_heads(const std::string& head, std::size_t k) const {
  std::string prompt = fill(config_.abstract_prompt, "{head}", normalize_whitespace(head));
  prompt = fill(prompt, "{k}", std::to_string(k));
  return complete_list(prompt, k);
}

std::vector<std::string> LlmBackend::instance_heads(const std::string& concept_head,
                                                    std::size_t k) const {
  std::string prompt = fill(config_.instantiate_prompt, "{concept}", normalize_whitespace(concept_head));
  prompt = fill(prompt, "{head}", normalize_whitespace(concept_head));
  prompt = fill(prompt, "{k}", std::to_string(k));
  return complete_list(prompt, k);
}

}  // namespace conke
