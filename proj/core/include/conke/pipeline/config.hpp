// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conke/editors/edit_record.hpp"
#include "conke/editors/edit_request.hpp"
#include "conke/model/model.hpp"

namespace conke {

struct VerifierSettings {
  std::string kind = "mock";  // mock | http
  std::string url;            // http; CONKE_VERIFIER_URL when empty
  std::filesystem::path rules;  // mock; hash fallback only when empty
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
};

struct ConceptSettings {
  std::string kind = "lexicon";  // lexicon | llm-http
  std::filesystem::path lexicon;
  std::size_t focus_from_end = 0;
  std::string url;  // llm-http; CONKE_LLM_URL when empty
  std::filesystem::path abstract_prompt;
  std::filesystem::path instantiate_prompt;
};

// Every knob of a pipeline run. As a file: one flat JSON object whose keys
// are listed in pipeline_config_keys().
struct PipelineConfig {
  EditMethod edit_method = EditMethod::kMemit;
  // Empty: the method's default layers.
  std::vector<std::size_t> layers;
  double covariance_weight = 100.0;
  double covariance_ridge = 1e-2;
  double grace_radius = 1.0;
  std::size_t value_steps = 100;
  double value_step_size = 0.1;
  // Requests per sequential edit batch; 0 puts every request in one batch.
  std::size_t batch_size = 0;

  VerifierSettings verifier;
  ConceptSettings concepts;
  std::filesystem::path statement_templates;

  double threshold = 0.5;
  std::size_t k_abs = 3;
  std::size_t k_inst = 5;
  std::uint64_t seed = 0;
  bool conceptualization_enabled = true;

  std::string prompt_template{kDefaultPromptTemplate};
  // Relations asked for every head; empty asks each head for the relations
  // its reference triples use.
  std::vector<std::string> relations;
  std::size_t max_new_tokens = 4;
  bool sampled_decoding = false;
  double temperature = 1.0;

  // Edit records are appended here as they are applied; empty disables.
  std::filesystem::path audit_log;

  // Throws InputError on an out-of-range field.
  void validate() const;
};

const std::vector<std::string>& pipeline_config_keys();

// Unknown keys and wrong value types are InputErrors. Relative paths are
// resolved against `base_dir`.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
nlohmann::json pipeline_config_to_json(const PipelineConfig& config);

PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void save_pipeline_config(const PipelineConfig& config, const std::filesystem::path& path);

}  // namespace conke
