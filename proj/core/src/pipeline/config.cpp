// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/pipeline/config.hpp"

#include <algorithm>
#include <fstream>

#include "conke/error.hpp"

namespace conke {

void PipelineConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("threshold must lie in (0, 1)");
  if (!(covariance_weight > 0.0)) throw InputError("covariance_weight must be > 0");
  if (!(covariance_ridge >= 0.0)) throw InputError("covariance_ridge must be >= 0");
  if (!(grace_radius > 0.0)) throw InputError("grace_radius must be > 0");
  if (value_steps == 0) throw InputError("value_steps must be >= 1");
  if (!(value_step_size > 0.0)) throw InputError("value_step_size must be > 0");
  if (max_new_tokens == 0) throw InputError("max_new_tokens must be >= 1");
  if (!(temperature > 0.0)) throw InputError("temperature must be > 0");
  if (verifier.kind != "mock" && verifier.kind != "http")
    throw InputError("verifier must be mock or http, got '" + verifier.kind + "'");
  if (concepts.kind != "lexicon" && concepts.kind != "llm-http")
    throw InputError("concept_backend must be lexicon or llm-http, got '" + concepts.kind + "'");
  if (prompt_template.find("{head}") == std::string::npos)
    throw InputError("prompt_template needs a {head} placeholder");
  if (!std::is_sorted(layers.begin(), layers.end()) ||
      std::adjacent_find(layers.begin(), layers.end()) != layers.end())
    throw InputError("layers must be strictly ascending");
}

const std::vector<std::string>& pipeline_config_keys() {
  static const std::vector<std::string> kKeys = {
      "edit_method",       "layers",          "covariance_weight", "covariance_ridge",
      "grace_radius",      "value_steps",     "value_step_size",   "batch_size",
      "verifier",          "verifier_url",    "verifier_rules",    "verifier_batch_size",
      "verifier_max_in_flight", "concept_backend", "lexicon",      "focus_from_end",
      "llm_url",           "abstract_prompt", "instantiate_prompt", "statement_templates",
      "threshold",         "k_abs",           "k_inst",            "seed",
      "conceptualization_enabled", "prompt_template", "relations", "max_new_tokens",
      "sampled_decoding",  "temperature",     "audit_log"};
  return kKeys;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace

PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InputError("pipeline config must be a JSON object");
  const auto& keys = pipeline_config_keys();
  for (const auto& [key, value] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw InputError("unknown config key '" + key + "'");

  PipelineConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    auto get_path = [&](const char* key, std::filesystem::path& field) {
      if (j.contains(key)) field = resolve(base_dir, j.at(key).get<std::string>());
    };
    if (j.contains("edit_method"))
      c.edit_method = parse_edit_method(j.at("edit_method").get<std::string>());
    get("layers", c.layers);
    get("covariance_weight", c.covariance_weight);
    get("covariance_ridge", c.covariance_ridge);
    get("grace_radius", c.grace_radius);
    get("value_steps", c.value_steps);
    get("value_step_size", c.value_step_size);
    get("batch_size", c.batch_size);
    get("verifier", c.verifier.kind);
    get("verifier_url", c.verifier.url);
    get_path("verifier_rules", c.verifier.rules);
    get("verifier_batch_size", c.verifier.batch_size);
    get("verifier_max_in_flight", c.verifier.max_in_flight);
    get("concept_backend", c.concepts.kind);
    get_path("lexicon", c.concepts.lexicon);
    get("focus_from_end", c.concepts.focus_from_end);
    get("llm_url", c.concepts.url);
    get_path("abstract_prompt", c.concepts.abstract_prompt);
    get_path("instantiate_prompt", c.concepts.instantiate_prompt);
    get_path("statement_templates", c.statement_templates);
    get("threshold", c.threshold);
    get("k_abs", c.k_abs);
    get("k_inst", c.k_inst);
    get("seed", c.seed);
    get("conceptualization_enabled", c.conceptualization_enabled);
    get("prompt_template", c.prompt_template);
    get("relations", c.relations);
    get("max_new_tokens", c.max_new_tokens);
    get("sampled_decoding", c.sampled_decoding);
    get("temperature", c.temperature);
    get_path("audit_log", c.audit_log);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json pipeline_config_to_json(const PipelineConfig& c) {
  return nlohmann::json{
      {"edit_method", to_string(c.edit_method)},
      {"layers", c.layers},
      {"covariance_weight", c.covariance_weight},
      {"covariance_ridge", c.covariance_ridge},
      {"grace_radius", c.grace_radius},
      {"value_steps", c.value_steps},
      {"value_step_size", c.value_step_size},
      {"batch_size", c.batch_size},
      {"verifier", c.verifier.kind},
      {"verifier_url", c.verifier.url},
      {"verifier_rules", c.verifier.rules.string()},
      {"verifier_batch_size", c.verifier.batch_size},
      {"verifier_max_in_flight", c.verifier.max_in_flight},
      {"concept_backend", c.concepts.kind},
      {"lexicon", c.concepts.lexicon.string()},
      {"focus_from_end", c.concepts.focus_from_end},
      {"llm_url", c.concepts.url},
      {"abstract_prompt", c.concepts.abstract_prompt.string()},
      {"instantiate_prompt", c.concepts.instantiate_prompt.string()},
      {"statement_templates", c.statement_templates.string()},
      {"threshold", c.threshold},
      {"k_abs", c.k_abs},
      {"k_inst", c.k_inst},
      {"seed", c.seed},
      {"conceptualization_enabled", c.conceptualization_enabled},
      {"prompt_template", c.prompt_template},
      {"relations", c.relations},
      {"max_new_tokens", c.max_new_tokens},
      {"sampled_decoding", c.sampled_decoding},
      {"temperature", c.temperature},
      {"audit_log", c.audit_log.string()}};
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j, path.parent_path());
}

void save_pipeline_config(const PipelineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write config " + path.string());
  out << pipeline_config_to_json(config).dump(2) << '\n';
  if (!out) throw IoError("failed writing config " + path.string());
}

}  // namespace conke
