// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "conke/editors/covariance.hpp"
#include "conke/editors/edit_record.hpp"
#include "conke/editors/edit_request.hpp"
#include "conke/model/value_optimization.hpp"

namespace conke {

// Regularized batched least squares: Delta = R K^T (C + K K^T)^{-1}, with
// keys K (d_mlp x n), residuals R (d_model x n) and C (d_mlp x d_mlp).
// Throws SingularityError when C + K K^T cannot be factorized.
Matrix batched_update(const Matrix& keys, const Matrix& residuals, const Matrix& cov);

struct MemitOptions {
  ValueOptimizationOptions value;
  // Scales every layer covariance (a mean over keys) before the solve.
  // Smaller values push the single-request case toward the exact rank-one
  // solution; larger ones protect unrelated keys at the cost of installing
  // less of each residual. 100 suits a 200-fact toy model.
  double covariance_weight = 100.0;
  std::vector<std::string> key_prefixes;
};

// Default layer range: the middle layers 1 .. n_layers / 2 ({0} for a
// single-layer model).
std::vector<std::size_t> default_memit_layers(const ModelConfig& config);

// Edits mlp_out over `layers` (ascending) so each request's residual stream
// after the last layer moves by (v_i* - v_i), with v_i* optimized at the last
// layer. Layer l absorbs 1 / (remaining layers) of what is still missing.
// Throws InputError on empty/unsorted layers, a covariance-per-layer
// mismatch, or duplicate request ids; SingularityError from the solve.
// On error the model is left untouched.
EditRecord memit_edit(ToyModel& model, const std::vector<EditRequest>& requests,
                      const std::vector<std::size_t>& layers,
                      const std::vector<KeyCovariance>& covs, const MemitOptions& options = {});

// memit_edit with the target values (MLP output at layers.back() at each
// subject token) supplied by the caller.
EditRecord memit_apply(ToyModel& model, const std::vector<EditRequest>& requests,
                       const std::vector<Vector>& target_values,
                       const std::vector<std::size_t>& layers,
                       const std::vector<KeyCovariance>& covs, const MemitOptions& options = {});

}  // namespace conke
