// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "conke/model/model.hpp"

namespace conke {

inline constexpr std::string_view kModelFormatVersion = "conke-model-v1";

// {"format_version": "conke-model-v1", "config": {...}, "vocabulary": [...],
//  "weights": {name: {"rows": r, "cols": c, "data": [row-major]}}}
nlohmann::json model_to_json(const ToyModel& model);
// Throws FormatError on a version mismatch or malformed document.
ToyModel model_from_json(const nlohmann::json& j);

void save_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_model(const std::filesystem::path& path);

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);

}  // namespace conke
