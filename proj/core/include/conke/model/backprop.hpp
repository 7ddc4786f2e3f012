// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "conke/model/model.hpp"

namespace conke {

struct LayerCache {
  Matrix x_in;                // residual entering the layer
  Matrix a;                   // rms(x_in)
  Vector a_scale;
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, seq x seq
  Matrix attn_heads;          // concatenated head outputs
  Matrix h;                   // x_in + attention
  Matrix b;                   // rms(h)
  Vector b_scale;
  Matrix pre;                 // mlp_in pre-activation
  Matrix key;                 // gelu(pre)
  Matrix value;               // mlp output, after hook
  std::vector<bool> replaced;
};

struct ForwardCache {
  std::vector<int> tokens;
  std::vector<LayerCache> layers;
  Matrix x_final;
  Matrix f;  // rms(x_final)
  Vector f_scale;
  Matrix logits;
};

struct BackwardResult {
  Weights grads;
  // d loss / d (mlp value rows) per layer; equals the gradient on the
  // residual stream leaving that layer.
  std::vector<Matrix> d_value;
};

ForwardCache forward_cached(const ToyModel& model, std::span<const int> tokens,
                            const MlpHook* hook = nullptr);

// `want_weight_grads = false` skips the weight gradients and only fills
// d_value, which is all value optimization needs.
BackwardResult backward(const ToyModel& model, const ForwardCache& cache,
                        const Matrix& d_logits, bool want_weight_grads = true);

// Mean token cross-entropy over `positions` (each predicts tokens[p + 1]
// from logits row p, or `targets[i]` when given). Writes d loss / d logits.
double cross_entropy(const Matrix& logits, std::span<const std::size_t> positions,
                     std::span<const int> targets, Matrix* d_logits);

}  // namespace conke
