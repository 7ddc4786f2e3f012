// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/editors/covariance.hpp"

#include "conke/error.hpp"

namespace conke {

Vector KeyCovariance::solve(const Vector& x) const {
  Eigen::LLT<Matrix> llt(matrix);
  if (llt.info() != Eigen::Success)
    throw SingularityError("key covariance at layer " + std::to_string(layer) +
                           " is not positive definite");
  return llt.solve(x);
}

bool KeyCovariance::is_symmetric(double tol) const {
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff() <= tol;
}

KeyCovariance covariance_from_keys(const Matrix& keys, std::size_t layer, double ridge) {
  if (keys.cols() == 0) throw InputError("covariance needs at least one key");
  if (!(ridge >= 0.0)) throw InputError("ridge must be >= 0");
  KeyCovariance cov;
  cov.layer = layer;
  cov.sample_count = static_cast<std::size_t>(keys.cols());
  cov.ridge = ridge;
  cov.matrix = keys * keys.transpose() / static_cast<double>(keys.cols());
  // Average with the transpose so the result is symmetric to the last bit.
  cov.matrix = 0.5 * (cov.matrix + cov.matrix.transpose()).eval();
  cov.matrix.diagonal().array() += ridge;
  return cov;
}

KeyCovariance estimate_covariance(const ModelView& model, const std::vector<std::string>& prompts,
                                  std::size_t layer, double ridge) {
  if (prompts.empty()) throw InputError("estimate_covariance: empty prompt list");
  if (!(ridge >= 0.0)) throw InputError("estimate_covariance: ridge must be >= 0");
  if (layer >= model.config().n_layers)
    throw InputError("estimate_covariance: layer out of range");
  std::vector<Vector> keys;
  for (const auto& prompt : prompts) {
    std::vector<int> ids = model.tokenizer().encode(prompt);
    if (ids.empty()) continue;
    ForwardResult fr = model.forward(ids);
    for (std::size_t p = 0; p < ids.size(); ++p) keys.push_back(fr.tap(layer, p).key_vector);
  }
  if (keys.empty()) throw InputError("estimate_covariance: prompts contain no tokens");
  Matrix k(static_cast<Eigen::Index>(model.config().d_mlp), static_cast<Eigen::Index>(keys.size()));
  for (std::size_t i = 0; i < keys.size(); ++i) k.col(static_cast<Eigen::Index>(i)) = keys[i];
  return covariance_from_keys(k, layer, ridge);
}

}  // namespace conke
