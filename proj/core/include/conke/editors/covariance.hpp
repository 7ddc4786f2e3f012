// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "conke/model/model.hpp"

namespace conke {

// Second moment of MLP keys at one layer, ridge already added:
// matrix = (1/N) sum k k^T + ridge * I.
struct KeyCovariance {
  std::size_t layer = 0;
  Matrix matrix;
  std::size_t sample_count = 0;
  double ridge = 0.0;

  // C^{-1} x via Cholesky. Throws SingularityError when C is not positive
  // definite.
  Vector solve(const Vector& x) const;
  bool is_symmetric(double tol = 1e-9) const;
};

// Keys are the columns of `keys` (d_mlp x N).
KeyCovariance covariance_from_keys(const Matrix& keys, std::size_t layer, double ridge);

// Keys of every token of every prompt at `layer`.
// Throws InputError on an empty prompt list or a negative ridge.
KeyCovariance estimate_covariance(const ModelView& model, const std::vector<std::string>& prompts,
                                  std::size_t layer, double ridge = 1e-2);

}  // namespace conke
