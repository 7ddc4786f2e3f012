// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/model/model.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "conke/error.hpp"
#include "conke/model/backprop.hpp"
#include "conke/text.hpp"

namespace conke {

namespace {

constexpr double kRmsEps = 1e-6;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
}

double gelu_grad(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  return 0.5 * (1.0 + t) +
         0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
}

// Row-wise RMS normalization; returns the per-row scale 1/rms.
Matrix rms_rows(const Matrix& x, Vector& scale) {
  const double d = static_cast<double>(x.cols());
  scale.resize(x.rows());
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    scale(i) = 1.0 / std::sqrt(x.row(i).squaredNorm() / d + kRmsEps);
    y.row(i) = x.row(i) * scale(i);
  }
  return y;
}

Matrix rms_rows_backward(const Matrix& y, const Vector& scale, const Matrix& dy) {
  const double d = static_cast<double>(y.cols());
  Matrix dx(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double proj = dy.row(i).dot(y.row(i)) / d;
    dx.row(i) = scale(i) * (dy.row(i) - y.row(i) * proj);
  }
  return dx;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                     double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  // Fill in row-major order so the draw sequence does not depend on storage.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

Weights init_weights(const ModelConfig& c) {
  std::mt19937_64 rng(c.seed);
  const auto d = static_cast<Eigen::Index>(c.d_model);
  const auto dm = static_cast<Eigen::Index>(c.d_mlp);
  const auto v = static_cast<Eigen::Index>(c.vocab_size);
  const double s_d = 1.0 / std::sqrt(static_cast<double>(c.d_model));
  const double s_dm = 1.0 / std::sqrt(static_cast<double>(c.d_mlp));

  Weights w;
  w.token_embeddings = random_matrix(rng, v, d, 1.0);
  w.position_embeddings =
      random_matrix(rng, static_cast<Eigen::Index>(c.max_seq_len), d, 0.5);
  w.layers.resize(c.n_layers);
  for (auto& L : w.layers) {
    L.wq = random_matrix(rng, d, d, s_d);
    L.wk = random_matrix(rng, d, d, s_d);
    L.wv = random_matrix(rng, d, d, s_d);
    L.wo = random_matrix(rng, d, d, 0.5 * s_d);
    L.mlp_in = random_matrix(rng, dm, d, s_d);
    L.mlp_out = random_matrix(rng, d, dm, 0.5 * s_dm);
  }
  w.unembedding = random_matrix(rng, v, d, s_d);
  return w;
}

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                 const std::string& name) {
  if (m.rows() != rows || m.cols() != cols)
    throw InputError("weight '" + name + "' has shape " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     ", expected " + std::to_string(rows) + "x" +
                     std::to_string(cols));
}

}  // namespace

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InputError(std::string("invalid model config: ") + what);
  };
  require(n_layers >= 1, "n_layers must be >= 1");
  require(d_model >= 1, "d_model must be >= 1");
  require(n_heads >= 1, "n_heads must be >= 1");
  require(d_mlp >= 1, "d_mlp must be >= 1");
  require(vocab_size >= 1, "vocab_size must be >= 1");
  require(max_seq_len >= 1, "max_seq_len must be >= 1");
  require(d_model % n_heads == 0, "d_model must be divisible by n_heads");
  require(d_mlp >= d_model, "d_mlp must be >= d_model");
}

std::size_t default_edit_layer(const ModelConfig& config) {
  return config.n_layers / 2;
}

Weights Weights::zeros_like() const {
  Weights z;
  z.token_embeddings = Matrix::Zero(token_embeddings.rows(), token_embeddings.cols());
  z.position_embeddings =
      Matrix::Zero(position_embeddings.rows(), position_embeddings.cols());
  z.layers.resize(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    auto& Z = z.layers[l];
    Z.wq = Matrix::Zero(L.wq.rows(), L.wq.cols());
    Z.wk = Matrix::Zero(L.wk.rows(), L.wk.cols());
    Z.wv = Matrix::Zero(L.wv.rows(), L.wv.cols());
    Z.wo = Matrix::Zero(L.wo.rows(), L.wo.cols());
    Z.mlp_in = Matrix::Zero(L.mlp_in.rows(), L.mlp_in.cols());
    Z.mlp_out = Matrix::Zero(L.mlp_out.rows(), L.mlp_out.cols());
  }
  z.unembedding = Matrix::Zero(unembedding.rows(), unembedding.cols());
  return z;
}

Matrix ForwardResult::probabilities() const {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

ToyModel::ToyModel(ModelConfig config, Tokenizer tokenizer)
    : config_(config), tokenizer_(std::move(tokenizer)) {
  if (config_.vocab_size == 0) config_.vocab_size = tokenizer_.size();
  config_.validate();
  if (config_.vocab_size != tokenizer_.size())
    throw InputError("vocab_size " + std::to_string(config_.vocab_size) +
                     " does not match tokenizer size " +
                     std::to_string(tokenizer_.size()));
  weights_ = init_weights(config_);
}

ToyModel::ToyModel(ModelConfig config, Tokenizer tokenizer, Weights weights)
    : config_(config), tokenizer_(std::move(tokenizer)), weights_(std::move(weights)) {
  if (config_.vocab_size == 0) config_.vocab_size = tokenizer_.size();
  config_.validate();
  if (config_.vocab_size != tokenizer_.size())
    throw InputError("vocab_size does not match tokenizer size");
  const auto d = static_cast<Eigen::Index>(config_.d_model);
  const auto dm = static_cast<Eigen::Index>(config_.d_mlp);
  const auto v = static_cast<Eigen::Index>(config_.vocab_size);
  if (weights_.layers.size() != config_.n_layers)
    throw InputError("weights have " + std::to_string(weights_.layers.size()) +
                     " layers, config says " + std::to_string(config_.n_layers));
  check_shape(weights_.token_embeddings, v, d, "token_embeddings");
  check_shape(weights_.position_embeddings,
              static_cast<Eigen::Index>(config_.max_seq_len), d, "position_embeddings");
  check_shape(weights_.unembedding, v, d, "unembedding");
  for (std::size_t l = 0; l < weights_.layers.size(); ++l) {
    const auto& L = weights_.layers[l];
    const std::string p = "layers." + std::to_string(l) + ".";
    check_shape(L.wq, d, d, p + "wq");
    check_shape(L.wk, d, d, p + "wk");
    check_shape(L.wv, d, d, p + "wv");
    check_shape(L.wo, d, d, p + "wo");
    check_shape(L.mlp_in, dm, d, p + "mlp_in");
    check_shape(L.mlp_out, d, dm, p + "mlp_out");
  }
  if (!all_finite()) throw NumericError("model weights contain non-finite values");
}

const Matrix& ToyModel::mlp_out(std::size_t layer) const {
  if (layer >= config_.n_layers)
    throw InputError("layer " + std::to_string(layer) + " out of range");
  return weights_.layers[layer].mlp_out;
}

Matrix& ToyModel::mutable_mlp_out(std::size_t layer) {
  if (layer >= config_.n_layers)
    throw InputError("layer " + std::to_string(layer) + " out of range");
  return weights_.layers[layer].mlp_out;
}

std::uint64_t ToyModel::weights_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  weights_.for_each([&](const std::string&, const Matrix& m) {
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(m.data()),
                                 static_cast<std::size_t>(m.size()) * sizeof(double)),
                h);
  });
  return h;
}

bool ToyModel::all_finite() const {
  bool ok = true;
  weights_.for_each([&](const std::string&, const Matrix& m) {
    ok = ok && m.allFinite();
  });
  return ok;
}

ForwardResult ToyModel::forward(std::span<const int> tokens, const MlpHook* hook) const {
  ForwardCache cache = forward_cached(*this, tokens, hook);
  ForwardResult out;
  out.seq_len = tokens.size();
  out.n_layers = config_.n_layers;
  out.taps.reserve(config_.n_layers * tokens.size());
  for (std::size_t l = 0; l < cache.layers.size(); ++l) {
    const auto& lc = cache.layers[l];
    const Matrix& resid_out =
        (l + 1 < cache.layers.size()) ? cache.layers[l + 1].x_in : cache.x_final;
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      const auto i = static_cast<Eigen::Index>(p);
      out.taps.push_back(LayerTap{l, p, lc.key.row(i).transpose(),
                                  lc.value.row(i).transpose(),
                                  resid_out.row(i).transpose()});
    }
  }
  out.logits = std::move(cache.logits);
  return out;
}

ForwardCache forward_cached(const ToyModel& model, std::span<const int> tokens,
                            const MlpHook* hook) {
  const ModelConfig& c = model.config();
  const Weights& w = model.weights();
  if (tokens.empty()) throw InputError("forward: empty token sequence");
  if (tokens.size() > c.max_seq_len)
    throw InputError("forward: sequence length " + std::to_string(tokens.size()) +
                     " exceeds max_seq_len " + std::to_string(c.max_seq_len));
  for (int t : tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= c.vocab_size)
      throw InputError("forward: token id out of range: " + std::to_string(t));

  const auto n = static_cast<Eigen::Index>(tokens.size());
  const auto dh = static_cast<Eigen::Index>(c.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  ForwardCache cache;
  cache.tokens.assign(tokens.begin(), tokens.end());
  Matrix x(n, static_cast<Eigen::Index>(c.d_model));
  for (Eigen::Index i = 0; i < n; ++i)
    x.row(i) = w.token_embeddings.row(tokens[static_cast<std::size_t>(i)]) +
               w.position_embeddings.row(i);

  cache.layers.resize(c.n_layers);
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    const LayerWeights& L = w.layers[l];
    LayerCache& lc = cache.layers[l];
    lc.x_in = x;
    lc.a = rms_rows(x, lc.a_scale);
    lc.q.noalias() = lc.a * L.wq.transpose();
    lc.k.noalias() = lc.a * L.wk.transpose();
    lc.v.noalias() = lc.a * L.wv.transpose();
    lc.attn_heads.resize(n, static_cast<Eigen::Index>(c.d_model));
    lc.probs.resize(c.n_heads);
    for (std::size_t hd = 0; hd < c.n_heads; ++hd) {
      const auto off = static_cast<Eigen::Index>(hd) * dh;
      Matrix s = lc.q.middleCols(off, dh) * lc.k.middleCols(off, dh).transpose() * scale;
      Matrix& pr = lc.probs[hd];
      pr = Matrix::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mx = s.row(i).head(i + 1).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index j = 0; j <= i; ++j) {
          pr(i, j) = std::exp(s(i, j) - mx);
          sum += pr(i, j);
        }
        pr.row(i).head(i + 1) /= sum;
      }
      lc.attn_heads.middleCols(off, dh).noalias() = pr * lc.v.middleCols(off, dh);
    }
    lc.h = x;
    lc.h.noalias() += lc.attn_heads * L.wo.transpose();
    lc.b = rms_rows(lc.h, lc.b_scale);
    lc.pre.noalias() = lc.b * L.mlp_in.transpose();
    lc.key = lc.pre.unaryExpr([](double v) { return gelu(v); });
    lc.value.noalias() = lc.key * L.mlp_out.transpose();
    lc.replaced.assign(tokens.size(), false);
    if (hook && *hook) {
      Vector key_row, value_row;
      for (Eigen::Index i = 0; i < n; ++i) {
        key_row = lc.key.row(i).transpose();
        value_row = lc.value.row(i).transpose();
        if ((*hook)(l, static_cast<std::size_t>(i), key_row, value_row)) {
          if (value_row.size() != static_cast<Eigen::Index>(c.d_model))
            throw InputError("mlp hook produced a value of the wrong size");
          lc.value.row(i) = value_row.transpose();
          lc.replaced[static_cast<std::size_t>(i)] = true;
        }
      }
    }
    x = lc.h + lc.value;
  }
  cache.x_final = x;
  cache.f = rms_rows(x, cache.f_scale);
  cache.logits.noalias() = cache.f * w.unembedding.transpose();
  return cache;
}

BackwardResult backward(const ToyModel& model, const ForwardCache& cache,
                        const Matrix& d_logits, bool want_weight_grads) {
  const ModelConfig& c = model.config();
  const Weights& w = model.weights();
  const auto n = static_cast<Eigen::Index>(cache.tokens.size());
  const auto dh = static_cast<Eigen::Index>(c.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  BackwardResult out;
  if (want_weight_grads) out.grads = w.zeros_like();
  out.d_value.resize(c.n_layers);

  if (want_weight_grads) out.grads.unembedding.noalias() = d_logits.transpose() * cache.f;
  Matrix df = d_logits * w.unembedding;
  Matrix dx = rms_rows_backward(cache.f, cache.f_scale, df);

  for (std::size_t li = c.n_layers; li-- > 0;) {
    const LayerWeights& L = w.layers[li];
    const LayerCache& lc = cache.layers[li];
    out.d_value[li] = dx;

    // MLP. Replaced rows do not depend on the layer's weights or inputs.
    Matrix dval = dx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (lc.replaced[static_cast<std::size_t>(i)]) dval.row(i).setZero();
    Matrix dkey = dval * L.mlp_out;
    Matrix dpre = dkey.cwiseProduct(lc.pre.unaryExpr([](double v) { return gelu_grad(v); }));
    Matrix dh_total = dx;
    dh_total += rms_rows_backward(lc.b, lc.b_scale, dpre * L.mlp_in);
    if (want_weight_grads) {
      auto& G = out.grads.layers[li];
      G.mlp_out.noalias() = dval.transpose() * lc.key;
      G.mlp_in.noalias() = dpre.transpose() * lc.b;
    }

    // Attention.
    Matrix dheads = dh_total * L.wo;
    Matrix dq = Matrix::Zero(n, static_cast<Eigen::Index>(c.d_model));
    Matrix dk = Matrix::Zero(n, static_cast<Eigen::Index>(c.d_model));
    Matrix dv = Matrix::Zero(n, static_cast<Eigen::Index>(c.d_model));
    for (std::size_t hd = 0; hd < c.n_heads; ++hd) {
      const auto off = static_cast<Eigen::Index>(hd) * dh;
      const Matrix& pr = lc.probs[hd];
      Matrix dO = dheads.middleCols(off, dh);
      Matrix dP = dO * lc.v.middleCols(off, dh).transpose();
      dv.middleCols(off, dh).noalias() = pr.transpose() * dO;
      Matrix dS(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double dot = dP.row(i).dot(pr.row(i));
        dS.row(i) = pr.row(i).array() * (dP.row(i).array() - dot);
      }
      dS *= scale;
      dq.middleCols(off, dh).noalias() = dS * lc.k.middleCols(off, dh);
      dk.middleCols(off, dh).noalias() = dS.transpose() * lc.q.middleCols(off, dh);
    }
    Matrix da = dq * L.wq;
    da.noalias() += dk * L.wk;
    da.noalias() += dv * L.wv;
    if (want_weight_grads) {
      auto& G = out.grads.layers[li];
      G.wo.noalias() = dh_total.transpose() * lc.attn_heads;
      G.wq.noalias() = dq.transpose() * lc.a;
      G.wk.noalias() = dk.transpose() * lc.a;
      G.wv.noalias() = dv.transpose() * lc.a;
    }
    dx = dh_total + rms_rows_backward(lc.a, lc.a_scale, da);
  }

  if (want_weight_grads) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out.grads.token_embeddings.row(cache.tokens[static_cast<std::size_t>(i)]) += dx.row(i);
      out.grads.position_embeddings.row(i) += dx.row(i);
    }
  }
  return out;
}

double cross_entropy(const Matrix& logits, std::span<const std::size_t> positions,
                     std::span<const int> targets, Matrix* d_logits) {
  if (positions.size() != targets.size())
    throw InputError("cross_entropy: positions and targets differ in length");
  if (d_logits) *d_logits = Matrix::Zero(logits.rows(), logits.cols());
  if (positions.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(positions.size());
  double loss = 0.0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(positions[k]);
    const double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    const double z = e.sum();
    loss -= (logits(i, targets[k]) - mx - std::log(z)) * inv;
    if (d_logits) {
      d_logits->row(i) += e / z * inv;
      (*d_logits)(i, targets[k]) -= inv;
    }
  }
  return loss;
}

MlpHook ModelView::combined_hook(const MlpHook* extra) const {
  const bool has_extra = extra && *extra;
  if (!has_extra) return hook_;
  if (!hook_) return *extra;
  MlpHook first = *extra;
  MlpHook second = hook_;
  return [first, second](std::size_t l, std::size_t p, const Vector& k, Vector& v) {
    if (first(l, p, k, v)) return true;
    return second(l, p, k, v);
  };
}

ForwardResult ModelView::forward(std::span<const int> tokens, const MlpHook* extra) const {
  MlpHook h = combined_hook(extra);
  return model_->forward(tokens, h ? &h : nullptr);
}

}  // namespace conke
