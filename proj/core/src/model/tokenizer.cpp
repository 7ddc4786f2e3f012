// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/model/tokenizer.hpp"

#include "conke/error.hpp"
#include "conke/text.hpp"

namespace conke {

Tokenizer::Tokenizer() { add(std::string(kEos)); }

Tokenizer::Tokenizer(const std::vector<std::string>& words) : Tokenizer() {
  for (const auto& w : words) add(w);
}

Tokenizer Tokenizer::from_texts(std::span<const std::string> texts,
                                std::span<const std::string> extra) {
  Tokenizer tok;
  for (const auto& text : texts)
    for (const auto& w : split_words(text)) tok.add(w);
  for (const auto& text : extra)
    for (const auto& w : split_words(text)) tok.add(w);
  return tok;
}

void Tokenizer::add(const std::string& word) {
  if (word.empty() || index_.count(word)) return;
  for (char c : word)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
      throw InputError("vocabulary word contains whitespace: '" + word + "'");
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
}

bool Tokenizer::contains(std::string_view word) const {
  return index_.count(std::string(word)) != 0;
}

std::optional<int> Tokenizer::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Tokenizer::unknown_words(std::string_view text) const {
  std::vector<std::string> unknown;
  for (auto& w : split_words(text))
    if (!contains(w)) unknown.push_back(std::move(w));
  return unknown;
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  std::vector<std::string> unknown;
  for (const auto& w : split_words(text)) {
    auto it = index_.find(w);
    if (it == index_.end()) {
      unknown.push_back(w);
    } else {
      ids.push_back(it->second);
    }
  }
  if (!unknown.empty()) {
    std::string msg = "untokenizable words:";
    for (const auto& w : unknown) msg += " '" + w + "'";
    throw InputError(msg);
  }
  return ids;
}

std::string Tokenizer::decode(std::span<const int> ids) const {
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= words_.size())
      throw InputError("token id out of range: " + std::to_string(id));
    words.push_back(words_[static_cast<std::size_t>(id)]);
  }
  return join_words(words);
}

}  // namespace conke
