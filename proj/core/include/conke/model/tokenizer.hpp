// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace conke {

// Word-level whitespace tokenizer over a closed vocabulary. Id 0 is always
// the end-of-sequence marker.
class Tokenizer {
 public:
  static constexpr std::string_view kEos = "<eos>";

  Tokenizer();
  // `words` may or may not contain kEos; it is moved to id 0 either way.
  // Duplicates are dropped, first occurrence wins.
  explicit Tokenizer(const std::vector<std::string>& words);

  // Vocabulary in first-seen order over `texts`, then `extra`.
  static Tokenizer from_texts(std::span<const std::string> texts,
                              std::span<const std::string> extra = {});

  int eos() const { return 0; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  bool contains(std::string_view word) const;
  std::optional<int> find(std::string_view word) const;

  // Throws InputError listing every out-of-vocabulary word.
  std::vector<int> encode(std::string_view text) const;
  // Throws InputError for ids outside the vocabulary.
  std::string decode(std::span<const int> ids) const;

  // Words of `text` that are not in the vocabulary, in order of appearance.
  std::vector<std::string> unknown_words(std::string_view text) const;

 private:
  void add(const std::string& word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace conke
