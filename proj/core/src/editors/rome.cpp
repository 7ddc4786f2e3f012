// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/editors/rome.hpp"

#include <cmath>

#include "conke/error.hpp"

namespace conke {

Matrix rank_one_update(const Matrix& weights, const Vector& key, const Vector& value,
                       const KeyCovariance& cov) {
  if (key.size() != weights.cols() || value.size() != weights.rows())
    throw InputError("rank_one_update: dimension mismatch");
  if (cov.matrix.rows() != key.size() || cov.matrix.cols() != key.size())
    throw InputError("rank_one_update: covariance does not match key dimension");
  if (!key.allFinite()) throw NumericError("rank_one_update: key is not finite");
  if (!value.allFinite()) throw NumericError("rank_one_update: target value is not finite");
  const Vector u = cov.solve(key);
  const double denom = u.dot(key);
  if (!(std::abs(denom) > kRankOneDenominatorGuard))
    throw SingularityError("rank-one denominator (C^-1 k)^T k = " + std::to_string(denom) +
                           " is too close to zero; edit rejected");
  const Vector residual = value - weights * key;
  Matrix updated = weights;
  updated.noalias() += residual * (u / denom).transpose();
  return updated;
}

EditRecord rome_apply(ToyModel& model, std::size_t layer, const Vector& key, const Vector& value,
                      const KeyCovariance& cov) {
  if (cov.layer != layer)
    throw InputError("covariance was estimated at layer " + std::to_string(cov.layer) +
                     ", edit targets layer " + std::to_string(layer));
  Matrix& w = model.mutable_mlp_out(layer);
  Matrix updated = rank_one_update(w, key, value, cov);
  EditRecord record;
  record.method = EditMethod::kRome;
  record.layers = {layer};
  record.delta_frobenius_norms = {(updated - w).norm()};
  w = std::move(updated);
  return record;
}

EditRecord rome_edit(ToyModel& model, const EditRequest& request, std::size_t layer,
                     const KeyCovariance& cov, const RomeOptions& options) {
  request.validate();
  const Vector key = mean_key(model, options.key_prefixes, request.prompt, request.subject, layer);
  const ValueOptimizationResult opt = optimize_value(model, request, layer, options.value);
  if (!opt.value.allFinite()) throw NumericError("optimized value for '" + request.id + "' is not finite");
  const double pre = mean_target_probability(model, {request});
  EditRecord record = rome_apply(model, layer, key, opt.value, cov);
  record.pre_score = pre;
  record.post_score = mean_target_probability(model, {request});
  record.request_ids = {request.id};
  return record;
}

}  // namespace conke
