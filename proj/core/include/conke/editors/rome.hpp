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

// |(C^{-1} k)^T k| must exceed this for a rank-one edit to be applied.
inline constexpr double kRankOneDenominatorGuard = 1e-8;

// Returns W + (v - W k) (C^{-1} k)^T / ((C^{-1} k)^T k), which maps k to v
// and leaves every k' with k'^T C^{-1} k = 0 unchanged.
// Throws SingularityError when the denominator is below the guard and
// NumericError when k or v is not finite.
Matrix rank_one_update(const Matrix& weights, const Vector& key, const Vector& value,
                       const KeyCovariance& cov);

struct RomeOptions {
  ValueOptimizationOptions value;
  // Contexts prepended when averaging the subject key; empty = bare prompt.
  std::vector<std::string> key_prefixes;
};

// Replaces mlp_out at `layer` so the subject key maps to the optimized value.
// On error the model is left untouched.
EditRecord rome_edit(ToyModel& model, const EditRequest& request, std::size_t layer,
                     const KeyCovariance& cov, const RomeOptions& options = {});

// Same update with an externally supplied (key, value) pair.
EditRecord rome_apply(ToyModel& model, std::size_t layer, const Vector& key, const Vector& value,
                      const KeyCovariance& cov);

}  // namespace conke
