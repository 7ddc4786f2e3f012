// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/editors/memit.hpp"

#include <set>

#include "conke/error.hpp"

namespace conke {

Matrix batched_update(const Matrix& keys, const Matrix& residuals, const Matrix& cov) {
  if (keys.cols() != residuals.cols())
    throw InputError("batched_update: keys and residuals differ in count");
  if (cov.rows() != keys.rows() || cov.cols() != keys.rows())
    throw InputError("batched_update: covariance does not match key dimension");
  Matrix system = cov;
  system.noalias() += keys * keys.transpose();
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success)
    throw SingularityError("batched update: C + K K^T is not positive definite");
  // Delta^T = (C + K K^T)^{-1} K R^T, using symmetry of the system.
  Matrix delta_t = llt.solve(keys * residuals.transpose());
  if (!delta_t.allFinite()) throw SingularityError("batched update: solve produced non-finite values");
  return delta_t.transpose();
}

std::vector<std::size_t> default_memit_layers(const ModelConfig& config) {
  if (config.n_layers <= 1) return {0};
  std::vector<std::size_t> layers;
  for (std::size_t l = 1; l <= config.n_layers / 2; ++l) layers.push_back(l);
  return layers;
}

namespace {

void validate_layers(const ToyModel& model, const std::vector<std::size_t>& layers,
                     const std::vector<KeyCovariance>& covs) {
  if (layers.empty()) throw InputError("memit: empty layer list");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i] >= model.config().n_layers)
      throw InputError("memit: layer " + std::to_string(layers[i]) + " out of range");
    if (i > 0 && layers[i] <= layers[i - 1])
      throw InputError("memit: layers must be strictly ascending");
  }
  if (covs.size() != layers.size())
    throw InputError("memit: need exactly one covariance per layer");
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (covs[i].layer != layers[i])
      throw InputError("memit: covariance " + std::to_string(i) + " was estimated at layer " +
                       std::to_string(covs[i].layer) + ", not " + std::to_string(layers[i]));
}

void validate_requests(const std::vector<EditRequest>& requests) {
  std::set<std::string> ids;
  for (const auto& r : requests) {
    r.validate();
    if (!ids.insert(r.id).second) throw InputError("memit: duplicate request id '" + r.id + "'");
  }
}

}  // namespace

EditRecord memit_apply(ToyModel& model, const std::vector<EditRequest>& requests,
                       const std::vector<Vector>& target_values,
                       const std::vector<std::size_t>& layers,
                       const std::vector<KeyCovariance>& covs, const MemitOptions& options) {
  validate_layers(model, layers, covs);
  validate_requests(requests);
  if (target_values.size() != requests.size())
    throw InputError("memit: need one target value per request");
  if (!(options.covariance_weight > 0.0)) throw InputError("memit: covariance_weight must be > 0");

  EditRecord record;
  record.method = EditMethod::kMemit;
  record.layers = layers;
  for (const auto& r : requests) record.request_ids.push_back(r.id);
  if (requests.empty()) {
    record.delta_frobenius_norms.assign(layers.size(), 0.0);
    record.pre_score = record.post_score = 1.0;
    return record;
  }

  const std::size_t last = layers.back();
  const auto n = static_cast<Eigen::Index>(requests.size());
  const auto d_model = static_cast<Eigen::Index>(model.config().d_model);
  const auto d_mlp = static_cast<Eigen::Index>(model.config().d_mlp);

  std::vector<std::vector<int>> prompts;
  Matrix goal(d_model, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = requests[static_cast<std::size_t>(i)];
    const Vector& v = target_values[static_cast<std::size_t>(i)];
    if (v.size() != d_model) throw InputError("memit: target value has the wrong size");
    if (!v.allFinite()) throw NumericError("memit: target value for '" + r.id + "' is not finite");
    prompts.push_back(model.tokenizer().encode(r.prompt));
    const ForwardResult fr = model.forward(prompts.back());
    const LayerTap& tap = fr.tap(last, r.subject.end - 1);
    goal.col(i) = tap.residual + (v - tap.value_vector);
  }
  record.pre_score = mean_target_probability(model, requests);

  ToyModel working = model;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const std::size_t layer = layers[li];
    Matrix keys(d_mlp, n);
    Matrix residuals(d_model, n);
    const double share = 1.0 / static_cast<double>(layers.size() - li);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = requests[static_cast<std::size_t>(i)];
      const ForwardResult fr = working.forward(prompts[static_cast<std::size_t>(i)]);
      keys.col(i) = options.key_prefixes.empty()
                        ? fr.tap(layer, r.subject.end - 1).key_vector
                        : mean_key(working, options.key_prefixes, r.prompt, r.subject, layer);
      residuals.col(i) = (goal.col(i) - fr.tap(last, r.subject.end - 1).residual) * share;
    }
    const Matrix delta =
        batched_update(keys, residuals, options.covariance_weight * covs[li].matrix);
    working.mutable_mlp_out(layer) += delta;
    record.delta_frobenius_norms.push_back(delta.norm());
  }
  if (!working.all_finite()) throw NumericError("memit: edit produced non-finite weights");
  model = std::move(working);
  record.post_score = mean_target_probability(model, requests);
  return record;
}

EditRecord memit_edit(ToyModel& model, const std::vector<EditRequest>& requests,
                      const std::vector<std::size_t>& layers,
                      const std::vector<KeyCovariance>& covs, const MemitOptions& options) {
  validate_layers(model, layers, covs);
  validate_requests(requests);
  std::vector<Vector> targets;
  targets.reserve(requests.size());
  for (const auto& r : requests)
    targets.push_back(optimize_value(model, r, layers.back(), options.value).value);
  return memit_apply(model, requests, targets, layers, covs, options);
}

}  // namespace conke
