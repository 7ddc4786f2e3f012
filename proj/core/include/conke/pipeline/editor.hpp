// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conke/editors/covariance.hpp"
#include "conke/editors/grace.hpp"
#include "conke/editors/memit.hpp"
#include "conke/editors/rome.hpp"

namespace conke {

struct EditorSettings {
  EditMethod method = EditMethod::kMemit;
  // Empty: default_edit_layer for rome and grace, default_memit_layers for
  // memit. rome and grace use the first entry.
  std::vector<std::size_t> layers;
  double covariance_ridge = 1e-2;
  double grace_radius = 1.0;
  MemitOptions memit;
  RomeOptions rome;
  GraceOptions grace;
};

// Owns a copy of the model and applies edit batches to it with one method.
// Covariances are estimated on the unedited model at the first batch.
class Editor {
 public:
  // `covariance_prompts` feed the key statistics (rome and memit only).
  Editor(const ToyModel& base, EditorSettings settings,
         std::vector<std::string> covariance_prompts);

  // rome and grace record one entry per request, memit one per batch.
  // Timestamps come from `clock`, which is advanced once per record. An
  // empty batch is a no-op.
  std::vector<EditRecord> apply(const std::vector<EditRequest>& batch, std::int64_t& clock);

  // The edited model, routed through the codebook for grace. Valid while
  // the editor lives and is not moved.
  ModelView view() const;
  const ToyModel& model() const { return model_; }
  const Codebook& codebook() const { return codebook_; }
  const std::vector<std::size_t>& layers() const { return layers_; }
  EditMethod method() const { return settings_.method; }

 private:
  void ensure_covariances();

  ToyModel model_;
  EditorSettings settings_;
  std::vector<std::string> covariance_prompts_;
  std::vector<std::size_t> layers_;
  std::vector<KeyCovariance> covariances_;
  Codebook codebook_;
};

// Fraction of requests whose greedy continuation equals the target tail
// (whitespace-normalized). 1.0 for no requests.
double edit_success(const ModelView& model, const std::vector<EditRequest>& requests,
                    std::size_t max_new = 8);

// Fraction of prompts whose greedy continuation is the same under both
// models. 1.0 for no prompts.
double locality(const ModelView& before, const ModelView& after,
                const std::vector<std::string>& prompts, std::size_t max_new = 8);

// Applies the batches in order; entry i is edit_success over every request
// of batches 0..i after batch i.
std::vector<double> drift(Editor& editor, const std::vector<std::vector<EditRequest>>& batches,
                          std::size_t max_new = 8);

}  // namespace conke
