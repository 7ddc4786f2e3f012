// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace conke {

// term -> hypernyms, most specific first.
using Lexicon = std::map<std::string, std::vector<std::string>>;

// JSON map term -> [hypernyms]. Throws FormatError on anything else.
Lexicon load_lexicon(const std::filesystem::path& path);

// hypernym -> terms, terms in ascending order, each listed once.
Lexicon invert_lexicon(const Lexicon& lexicon);

// Source of concept-level heads and of instance heads for a concept.
// Implementations must be safe to call concurrently.
class ConceptBackend {
 public:
  virtual ~ConceptBackend() = default;
  virtual std::string_view kind() const = 0;

  // Up to k more general versions of `head`, best first.
  virtual std::vector<std::string> abstract_heads(const std::string& head,
                                                  std::size_t k) const = 0;
  // Candidate instances of `concept_head`, best first. May return more than
  // k; callers filter and truncate.
  virtual std::vector<std::string> instance_heads(const std::string& concept_head,
                                                  std::size_t k) const = 0;
};

// Swaps the head's focus term for its hypernyms, and a concept term for its
// hyponyms. The focus term is a single word counted from the end of the head
// (0 = last word).
class LexiconBackend final : public ConceptBackend {
 public:
  // Throws InputError on a term with no hypernyms. The inverse map is
  // derived from `lexicon` unless supplied.
  explicit LexiconBackend(Lexicon lexicon, std::optional<Lexicon> inverse = std::nullopt,
                          std::size_t focus_from_end = 0);

  std::string_view kind() const override { return "lexicon"; }
  std::vector<std::string> abstract_heads(const std::string& head, std::size_t k) const override;
  std::vector<std::string> instance_heads(const std::string& concept_head,
                                          std::size_t k) const override;

  const Lexicon& lexicon() const { return lexicon_; }
  const Lexicon& inverse() const { return inverse_; }
  // The word that abstraction replaces; empty for an empty head.
  std::string focus_term(const std::string& head) const;

 private:
  std::vector<std::string> substitute(const std::string& head, const Lexicon& map) const;

  Lexicon lexicon_;
  Lexicon inverse_;
  std::size_t focus_from_end_;
};

struct NumberedList {
  std::vector<std::string> items;
  std::size_t skipped = 0;  // non-empty lines that were not list items
};

// Parses "1. foo" / "2) bar" lines. Item text is whitespace-normalized;
// empty items count as skipped.
NumberedList parse_numbered_list(std::string_view text);

// Prompt templates use {head} (or {concept}) and {k}.
inline constexpr std::string_view kDefaultAbstractPrompt =
    "Abstract the event below into more general concepts. Replace the specific object or "
    "activity with a broader category and keep PersonX.\n"
    "Event: {head}\n"
    "Give {k} abstractions as a numbered list, one per line.\n";
inline constexpr std::string_view kDefaultInstantiatePrompt =
    "Give concrete, everyday instances of the abstract event below. Replace the general "
    "concept with a specific object or activity and keep PersonX.\n"
    "Event: {concept}\n"
    "Give {k} instances as a numbered list, one per line.\n";

struct LlmBackendConfig {
  // Fall back to CONKE_LLM_URL / CONKE_API_KEY when empty.
  std::string base_url;
  std::string api_key;
  std::string abstract_prompt{kDefaultAbstractPrompt};
  std::string instantiate_prompt{kDefaultInstantiatePrompt};
  int max_tokens = 256;
  double temperature = 0.0;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{60000};
};

// Reads a prompt template file; the whole file is the template.
std::string load_prompt(const std::filesystem::path& path);

// POST {base}/complete with {"prompt", "max_tokens", "temperature"},
// expecting {"text": ...} holding a numbered list.
class LlmBackend final : public ConceptBackend {
 public:
  explicit LlmBackend(LlmBackendConfig config);

  std::string_view kind() const override { return "llm-http"; }
  // Throw ProtocolError (raw text attached) when the completion holds no
  // list item, BackendError when the service cannot be reached.
  std::vector<std::string> abstract_heads(const std::string& head, std::size_t k) const override;
  std::vector<std::string> instance_heads(const std::string& concept_head,
                                          std::size_t k) const override;

  // Total malformed lines skipped so far.
  std::size_t skipped_lines() const { return skipped_.load(); }

 private:
  std::vector<std::string> complete_list(const std::string& prompt, std::size_t k) const;

  LlmBackendConfig config_;
  mutable std::atomic<std::size_t> skipped_{0};
};

}  // namespace conke
