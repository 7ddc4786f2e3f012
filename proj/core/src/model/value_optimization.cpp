// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#include "conke/model/value_optimization.hpp"

#include <cmath>

#include "conke/error.hpp"
#include "conke/model/backprop.hpp"

namespace conke {

ValueObjective::ValueObjective(const ModelView& model, const EditRequest& request,
                               std::size_t layer, bool append_eos)
    : model_(model), layer_(layer) {
  request.validate();
  if (layer >= model.config().n_layers)
    throw InputError("layer " + std::to_string(layer) + " out of range");
  const Tokenizer& tok = model.tokenizer();
  std::vector<int> prompt = tok.encode(request.prompt);
  std::vector<int> target = tok.encode(request.target.continuation());
  if (target.empty()) throw InputError("edit target is empty");
  if (request.subject.end > prompt.size() || request.subject.begin >= request.subject.end)
    throw InputError("subject span outside prompt");
  if (append_eos) target.push_back(tok.eos());
  position_ = request.subject.end - 1;

  tokens_ = prompt;
  tokens_.insert(tokens_.end(), target.begin(), target.end());
  tokens_.pop_back();
  if (tokens_.size() > model.config().max_seq_len)
    throw InputError("prompt plus target exceed max_seq_len");
  for (std::size_t i = 0; i < target.size(); ++i) {
    loss_positions_.push_back(prompt.size() - 1 + i);
    targets_.push_back(target[i]);
  }
  initial_value_ = model_.forward(prompt).tap(layer_, position_).value_vector;
}

MlpHook ValueObjective::substitution(const Vector& value) const {
  const std::size_t layer = layer_, pos = position_;
  return [layer, pos, value](std::size_t l, std::size_t p, const Vector&, Vector& out) {
    if (l != layer || p != pos) return false;
    out = value;
    return true;
  };
}

double ValueObjective::loss(const Vector& value) const {
  MlpHook sub = substitution(value);
  ForwardResult fr = model_.forward(tokens_, &sub);
  return cross_entropy(fr.logits, loss_positions_, targets_, nullptr);
}

double ValueObjective::target_probability(const Vector& value) const {
  return std::exp(-loss(value) * static_cast<double>(targets_.size()));
}

Vector ValueObjective::gradient(const Vector& value) const {
  MlpHook sub = substitution(value);
  MlpHook hook = model_.combined_hook(&sub);
  ForwardCache cache = forward_cached(model_.model(), tokens_, &hook);
  Matrix d_logits;
  cross_entropy(cache.logits, loss_positions_, targets_, &d_logits);
  BackwardResult br = backward(model_.model(), cache, d_logits, /*want_weight_grads=*/false);
  return br.d_value[layer_].row(static_cast<Eigen::Index>(position_)).transpose();
}

Vector ValueObjective::finite_difference_gradient(const Vector& value, double step) const {
  Vector g(value.size());
  Vector probe = value;
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    probe(i) = value(i) + step;
    const double up = loss(probe);
    probe(i) = value(i) - step;
    const double down = loss(probe);
    probe(i) = value(i);
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

Vector ValueObjective::gradient(const Vector& value, GradientMethod method,
                                double fd_step) const {
  return method == GradientMethod::kBackprop ? gradient(value)
                                             : finite_difference_gradient(value, fd_step);
}

ValueOptimizationResult optimize_value(const ModelView& model, const EditRequest& request,
                                       std::size_t layer,
                                       const ValueOptimizationOptions& options) {
  if (options.steps < 1) throw InputError("optimize_value: steps must be >= 1");
  if (!(options.step_size > 0.0)) throw InputError("optimize_value: step_size must be > 0");
  ValueObjective objective(model, request, layer, options.append_eos);

  ValueOptimizationResult r;
  r.initial_value = objective.initial_value();
  r.value = r.initial_value;
  r.initial_loss = objective.loss(r.value);
  double current = r.initial_loss;
  const double target_nll =
      -std::log(options.stop_probability) / static_cast<double>(objective.target_length());
  const double max_delta = options.max_delta_ratio * r.initial_value.norm();

  // Adam on the free vector; the best iterate seen is returned, so the loss
  // never ends above its starting value.
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Vector m1 = Vector::Zero(r.value.size());
  Vector m2 = Vector::Zero(r.value.size());
  Vector x = r.value;
  for (std::size_t s = 0; s < options.steps; ++s) {
    if (current <= target_nll) break;
    const Vector g = objective.gradient(x, options.gradient, options.fd_step);
    if (!g.allFinite()) break;
    ++r.steps_taken;
    m1 = kBeta1 * m1 + (1.0 - kBeta1) * g;
    m2 = kBeta2 * m2 + (1.0 - kBeta2) * g.cwiseAbs2();
    const double t = static_cast<double>(s + 1);
    const Vector m1_hat = m1 / (1.0 - std::pow(kBeta1, t));
    const Vector m2_hat = m2 / (1.0 - std::pow(kBeta2, t));
    x -= (options.step_size * m1_hat.array() / (m2_hat.array().sqrt() + kEps)).matrix();
    if (max_delta > 0.0) {
      const Vector delta = x - r.initial_value;
      const double norm = delta.norm();
      if (norm > max_delta) x = r.initial_value + delta * (max_delta / norm);
    }
    const double l = objective.loss(x);
    if (std::isfinite(l) && l < current) {
      current = l;
      r.value = x;
    }
  }
  r.final_loss = current;
  r.final_probability = objective.target_probability(r.value);
  r.convergence_warning = !(r.final_loss < r.initial_loss) && r.final_loss > target_nll;
  return r;
}

}  // namespace conke
