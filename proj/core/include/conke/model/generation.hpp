// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "conke/model/model.hpp"

namespace conke {

enum class DecodeMode { kGreedy, kSampled };

struct DecodeOptions {
  DecodeMode mode = DecodeMode::kGreedy;
  std::uint64_t seed = 0;  // sampled mode only
  double temperature = 1.0;

  static DecodeOptions greedy() { return {}; }
  static DecodeOptions sampled(std::uint64_t seed, double temperature = 1.0) {
    return {DecodeMode::kSampled, seed, temperature};
  }
};

// Continuation token ids (end-of-sequence excluded). Stops at
// end-of-sequence, after `max_new` tokens, or at max_seq_len.
std::vector<int> generate_tokens(const ModelView& model, std::span<const int> prompt,
                                 std::size_t max_new, const DecodeOptions& options = {});

// Throws InputError listing any prompt word outside the vocabulary.
std::string generate(const ModelView& model, std::string_view prompt, std::size_t max_new,
                     const DecodeOptions& options = {});

// Half-open token range [begin, end) inside a prompt.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const TokenSpan&) const = default;
};

// MLP key (the activation entering mlp_out) at the subject's final token.
// Throws InputError when the span is empty or runs past the prompt.
Vector key_at(const ModelView& model, std::string_view prompt, TokenSpan subject,
              std::size_t layer);

// Arithmetic mean of key_at over `prefix + " " + prompt` for each prefix.
// An empty prefix list means the bare prompt.
Vector mean_key(const ModelView& model, const std::vector<std::string>& prefixes,
                std::string_view prompt, TokenSpan subject, std::size_t layer);

// Probability of `continuation` (teacher forced) following `prompt`.
double continuation_probability(const ModelView& model, std::string_view prompt,
                                std::string_view continuation, bool include_eos = false);

}  // namespace conke
