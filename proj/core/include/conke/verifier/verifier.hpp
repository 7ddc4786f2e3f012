// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "conke/store/triple.hpp"

namespace conke {

// relation -> pattern with {head} and {tail} placeholders.
using StatementTemplates = std::map<std::string, std::string, std::less<>>;

// Patterns for the nine social relations.
const StatementTemplates& default_statement_templates();

// JSON map relation -> pattern, merged over the defaults.
StatementTemplates load_statement_templates(const std::filesystem::path& path);

// Substitutes head and tail into the relation's pattern. Throws InputError
// naming the relation when it has no pattern.
std::string render_statement(const Triple& triple, const StatementTemplates& templates);
std::string render_statement(std::string_view head, std::string_view relation,
                             std::string_view tail, const StatementTemplates& templates);

enum class Verdict { kPlausible, kImplausible };

inline constexpr double kDefaultThreshold = 0.5;

// Plausible iff score > threshold; a score equal to the threshold is
// implausible. Throws InputError unless 0 < threshold < 1.
Verdict classify(double score, double threshold = kDefaultThreshold);

// Throws ProtocolError unless 0 <= score <= 1. Scores are never clamped.
void check_score(double score);

// Plausibility scorer. Implementations must be safe to call concurrently.
class Verifier {
 public:
  virtual ~Verifier() = default;

  // One score per statement, in input order. Throws InputError on an empty
  // list and ProtocolError when the backend returns the wrong number of
  // scores or a value outside [0, 1].
  std::vector<double> score(const std::vector<std::string>& statements) const;

  virtual std::string_view kind() const = 0;

 private:
  virtual std::vector<double> do_score(const std::vector<std::string>& statements) const = 0;
};

struct MockVerifierConfig {
  enum class Fallback { kHash, kConstant };

  // Keys are whitespace-normalized before lookup.
  std::map<std::string, double> rules;
  Fallback fallback = Fallback::kHash;
  double constant = 0.5;
  // Mixed into the hash fallback.
  std::uint64_t seed = 0;
};

// Rule lookup, then the fallback. A pure function of the statement text.
class MockVerifier final : public Verifier {
 public:
  // Throws ProtocolError when a rule or the constant lies outside [0, 1].
  explicit MockVerifier(MockVerifierConfig config);

  // Accepts either a plain JSON map statement -> score, or an object
  // {"rules": {...}, "fallback": "hash" | <number>, "seed": <int>}.
  static MockVerifier from_file(const std::filesystem::path& path);

  std::string_view kind() const override { return "mock"; }
  const MockVerifierConfig& config() const { return config_; }

  // Deterministic value in [0, 1) from FNV-1a of the normalized statement.
  static double hash_score(std::string_view statement, std::uint64_t seed);

 private:
  std::vector<double> do_score(const std::vector<std::string>& statements) const override;

  MockVerifierConfig config_;
};

struct HttpVerifierConfig {
  // Falls back to CONKE_VERIFIER_URL when empty.
  std::string base_url;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{30000};
};

// POST {base}/score with {"statements": [...]}, expecting {"scores": [...]}
// of equal length. Batches run concurrently, bounded by max_in_flight.
class HttpVerifier final : public Verifier {
 public:
  // Throws InputError when no URL is configured or the URL is not http://.
  explicit HttpVerifier(HttpVerifierConfig config);

  std::string_view kind() const override { return "http"; }
  const std::string& base_url() const { return config_.base_url; }

 private:
  std::vector<double> do_score(const std::vector<std::string>& statements) const override;
  std::vector<double> score_batch(const std::vector<std::string>& batch) const;

  HttpVerifierConfig config_;
};

struct TriageResult {
  // Input order is kept within each side; every triple carries its score.
  std::vector<Triple> plausible;
  std::vector<Triple> implausible;
};

// Renders, scores and classifies. Throws InputError on duplicate ids or an
// unrenderable triple. An empty input returns an empty result without
// calling the verifier.
TriageResult triage(const Verifier& verifier, const std::vector<Triple>& triples,
                    const StatementTemplates& templates = default_statement_templates(),
                    double threshold = kDefaultThreshold);

}  // namespace conke
