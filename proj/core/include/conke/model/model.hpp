// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "conke/model/tokenizer.hpp"

namespace conke {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ModelConfig {
  std::size_t n_layers = 2;
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t d_mlp = 256;
  // 0 means "take it from the tokenizer".
  std::size_t vocab_size = 0;
  std::size_t max_seq_len = 32;
  std::uint64_t seed = 0;

  // Throws InputError when an invariant does not hold.
  void validate() const;
  std::size_t head_dim() const { return d_model / n_heads; }

  bool operator==(const ModelConfig&) const = default;
};

// Default layer for single-layer editors: the middle layer, n_layers / 2.
std::size_t default_edit_layer(const ModelConfig& config);

struct LayerWeights {
  Matrix wq, wk, wv, wo;  // d_model x d_model
  Matrix mlp_in;          // d_mlp x d_model
  Matrix mlp_out;         // d_model x d_mlp, the edited associative memory
};

// Every trainable matrix. Also used as the gradient container.
struct Weights {
  Matrix token_embeddings;     // vocab x d_model
  Matrix position_embeddings;  // max_seq_len x d_model
  std::vector<LayerWeights> layers;
  Matrix unembedding;          // vocab x d_model

  // Visits matrices in a fixed order (embeddings, per-layer, unembedding).
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn("token_embeddings", token_embeddings);
    fn("position_embeddings", position_embeddings);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& L = layers[l];
      const std::string p = "layers." + std::to_string(l) + ".";
      fn(p + "wq", L.wq);
      fn(p + "wk", L.wk);
      fn(p + "wv", L.wv);
      fn(p + "wo", L.wo);
      fn(p + "mlp_in", L.mlp_in);
      fn(p + "mlp_out", L.mlp_out);
    }
    fn("unembedding", unembedding);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<Weights*>(this)->for_each(
        [&](const std::string& name, Matrix& m) { fn(name, static_cast<const Matrix&>(m)); });
  }

  Weights zeros_like() const;
};

struct LayerTap {
  std::size_t layer_index = 0;
  std::size_t position = 0;
  Vector key_vector;    // d_mlp, input to mlp_out
  Vector value_vector;  // d_model, mlp_out output (after any hook)
  Vector residual;      // d_model, residual stream leaving the layer
};

// Called for every (layer, position) after the MLP key is computed. May
// overwrite `value`; returns true when it did. A replaced value is treated
// as a constant by backprop.
using MlpHook = std::function<bool(std::size_t layer, std::size_t position,
                                   const Vector& key, Vector& value)>;

struct ForwardResult {
  Matrix logits;  // seq_len x vocab
  std::size_t seq_len = 0;
  std::size_t n_layers = 0;
  std::vector<LayerTap> taps;  // layer-major

  const LayerTap& tap(std::size_t layer, std::size_t position) const {
    return taps[layer * seq_len + position];
  }
  // Row-wise softmax of the logits.
  Matrix probabilities() const;
};

struct ForwardCache;

// Decoder-only transformer: learned token and position embeddings,
// parameter-free RMS norms, causal multi-head attention and a GELU MLP per
// layer, untied unembedding.
class ToyModel {
 public:
  // Randomly initialized from config.seed.
  ToyModel(ModelConfig config, Tokenizer tokenizer);
  ToyModel(ModelConfig config, Tokenizer tokenizer, Weights weights);

  const ModelConfig& config() const { return config_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  const Weights& weights() const { return weights_; }
  Weights& mutable_weights() { return weights_; }

  const Matrix& mlp_out(std::size_t layer) const;
  Matrix& mutable_mlp_out(std::size_t layer);

  // Pure. Throws InputError on empty input, over-long input, or ids outside
  // the vocabulary.
  ForwardResult forward(std::span<const int> tokens,
                        const MlpHook* hook = nullptr) const;

  // FNV-1a over the raw bytes of every weight matrix, in visiting order.
  std::uint64_t weights_hash() const;

  bool all_finite() const;

 private:
  ModelConfig config_;
  Tokenizer tokenizer_;
  Weights weights_;
};

// A model plus an optional hook that every forward pass goes through.
// Non-owning; the model must outlive the view.
class ModelView {
 public:
  ModelView(const ToyModel& model) : model_(&model) {}  // NOLINT(google-explicit-constructor)
  ModelView(const ToyModel& model, MlpHook hook)
      : model_(&model), hook_(std::move(hook)) {}

  const ToyModel& model() const { return *model_; }
  const Tokenizer& tokenizer() const { return model_->tokenizer(); }
  const ModelConfig& config() const { return model_->config(); }
  bool has_hook() const { return static_cast<bool>(hook_); }

  // `extra` is consulted before the view's own hook.
  ForwardResult forward(std::span<const int> tokens,
                        const MlpHook* extra = nullptr) const;
  MlpHook combined_hook(const MlpHook* extra) const;

 private:
  const ToyModel* model_;
  MlpHook hook_;
};

}  // namespace conke
