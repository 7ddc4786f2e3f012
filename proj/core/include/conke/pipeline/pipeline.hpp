// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conke/conceptualizer/backend.hpp"
#include "conke/model/generation.hpp"
#include "conke/pipeline/config.hpp"
#include "conke/pipeline/editor.hpp"
#include "conke/store/store.hpp"
#include "conke/verifier/verifier.hpp"

namespace conke {

// A (head, relation) pair the model is asked to complete.
struct Slot {
  std::string head;
  std::string relation;

  auto operator<=>(const Slot&) const = default;
};

struct CandidateSet {
  // source kGenerated, one per successful slot, slot order.
  std::vector<Triple> triples;
  std::size_t attempted = 0;
  // Empty generations and prompts the tokenizer cannot encode.
  std::size_t parse_failures = 0;
};

// One generation per distinct slot. Sampled decoding seeds each slot from
// `options.seed` and the slot text, so results do not depend on order.
CandidateSet generate_candidates(const ModelView& model, const std::vector<Slot>& slots,
                                 std::string_view prompt_template = kDefaultPromptTemplate,
                                 std::size_t max_new = 4, const DecodeOptions& options = {},
                                 Split split = Split::kTrain);

// Every head crossed with every relation. Throws InputError on no heads.
CandidateSet generate_candidates(const ModelView& model, const std::vector<std::string>& heads,
                                 const std::vector<std::string>& relations,
                                 std::string_view prompt_template = kDefaultPromptTemplate,
                                 std::size_t max_new = 4, const DecodeOptions& options = {},
                                 Split split = Split::kTrain);

struct StageCounts {
  std::size_t candidates = 0;  // train slots attempted
  std::size_t parse_failures = 0;
  std::size_t plausible = 0;
  std::size_t implausible = 0;
  // Implausible candidates without a reference tail to correct toward.
  std::size_t uncorrectable = 0;
  std::size_t abstractions = 0;
  std::size_t instantiations = 0;
  std::size_t propagated = 0;
  std::size_t augmentation_duplicates = 0;
  // Requests dropped because they target a test slot.
  std::size_t held_out_skipped = 0;
  // Requests dropped because the model vocabulary cannot express them.
  std::size_t unencodable = 0;
  std::size_t requests = 0;
  std::size_t edit_records = 0;
  std::size_t probe_slots = 0;

  bool operator==(const StageCounts&) const = default;
};

struct RunReport {
  std::string edit_method;
  std::uint64_t seed = 0;
  bool conceptualization_enabled = true;
  double threshold = 0.5;
  // Plausible share of test-slot generations before and after editing.
  double pre_plausible_rate = 0.0;
  double post_plausible_rate = 0.0;
  double edit_success_rate = 0.0;
  // Test slots whose generation after editing equals the reference tail.
  double generalization_rate = 0.0;
  // Train slots judged plausible whose generation did not change.
  double locality_rate = 0.0;
  std::vector<double> drift_curve;
  StageCounts counts;

  bool operator==(const RunReport&) const = default;
};

void to_json(nlohmann::json& j, const StageCounts& c);
void from_json(const nlohmann::json& j, StageCounts& c);
void to_json(nlohmann::json& j, const RunReport& r);
void from_json(const nlohmann::json& j, RunReport& r);

// Plain-text table of rates and counts.
std::string format_report(const RunReport& report);

struct Backends {
  std::unique_ptr<Verifier> verifier;
  std::unique_ptr<ConceptBackend> concepts;  // null when unavailable
  StatementTemplates templates;
};

// Builds the configured backends. A lexicon backend without a lexicon file
// is left null, which disables conceptualization.
Backends make_backends(const PipelineConfig& config);

struct RunResult {
  RunReport report;
  std::unique_ptr<Editor> editor;  // holds the edited model and codebook
  std::vector<EditRequest> requests;
};

// generate -> triage -> (augment + propagate) -> edit -> re-generate on the
// test slots -> re-score. The store receives candidates, scores,
// conceptualizations and edit records. A failing stage throws StageError
// naming it; edit records applied before the failure are already stored
// and logged.
RunResult run(const PipelineConfig& config, KnowledgeStore& store, const ToyModel& model,
              const Backends& backends);
RunResult run(const PipelineConfig& config, KnowledgeStore& store, const ToyModel& model);

struct AblationReport {
  RunReport with_concepts;
  RunReport without_concepts;
  // with_concepts.post_plausible_rate - without_concepts.post_plausible_rate
  double post_rate_difference = 0.0;
};

void to_json(nlohmann::json& j, const AblationReport& r);
std::string format_ablation(const AblationReport& report);

// Two runs on copies of the store that differ only in
// conceptualization_enabled. The store itself is not modified.
AblationReport ablate(const PipelineConfig& config, const KnowledgeStore& store,
                      const ToyModel& model, const Backends& backends);

}  // namespace conke
