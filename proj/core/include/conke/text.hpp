// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace conke {

// Collapses runs of whitespace to a single space and trims both ends.
// Case is preserved.
std::string normalize_whitespace(std::string_view text);

std::vector<std::string> split_words(std::string_view text);
std::string join_words(std::span<const std::string> words);

// 64-bit FNV-1a. Stable across platforms and processes.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

// Content id of a (head, relation, tail) triple: hex FNV-1a over the
// whitespace-normalized fields joined with '|'.
std::string content_id(std::string_view head, std::string_view relation,
                       std::string_view tail);

}  // namespace conke
