// Copyright 2026 The ConKE Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "conke/editors/edit_request.hpp"
#include "conke/model/model.hpp"

namespace conke {

enum class GradientMethod { kBackprop, kFiniteDifference };

// Negative log-likelihood of a request's target continuation when the MLP
// output at (layer, subject's last token) is replaced by a free vector.
class ValueObjective {
 public:
  ValueObjective(const ModelView& model, const EditRequest& request, std::size_t layer,
                 bool append_eos = true);

  // Mean per-token NLL of the target.
  double loss(const Vector& value) const;
  // Probability of the whole target sequence.
  double target_probability(const Vector& value) const;

  Vector gradient(const Vector& value) const;
  // Central differences over every coordinate, 2 * d_model forward passes.
  Vector finite_difference_gradient(const Vector& value, double step = 1e-4) const;
  Vector gradient(const Vector& value, GradientMethod method, double fd_step = 1e-4) const;

  // The unmodified MLP output at the substitution point.
  const Vector& initial_value() const { return initial_value_; }
  std::size_t layer() const { return layer_; }
  std::size_t position() const { return position_; }
  std::size_t target_length() const { return targets_.size(); }

 private:
  MlpHook substitution(const Vector& value) const;

  ModelView model_;
  std::size_t layer_;
  std::size_t position_;
  std::vector<int> tokens_;
  std::vector<std::size_t> loss_positions_;
  std::vector<int> targets_;
  Vector initial_value_;
};

struct ValueOptimizationOptions {
  std::size_t steps = 100;
  // Adam learning rate. Small steps keep v close to the smallest change that
  // installs the target, which matters for locality.
  double step_size = 0.1;
  GradientMethod gradient = GradientMethod::kBackprop;
  double fd_step = 1e-4;
  // Stop once the whole target has at least this probability.
  double stop_probability = 0.99;
  // When > 0, ||v - v_init|| is kept below this multiple of ||v_init||.
  double max_delta_ratio = 0.0;
  bool append_eos = true;
};

struct ValueOptimizationResult {
  Vector initial_value;
  Vector value;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double final_probability = 0.0;
  std::size_t steps_taken = 0;
  // Set when the loss did not decrease at all. Not an error.
  bool convergence_warning = false;
};

// Adam on ValueObjective, returning the best iterate, so the final loss
// never exceeds the initial one.
ValueOptimizationResult optimize_value(const ModelView& model, const EditRequest& request,
                                       std::size_t layer,
                                       const ValueOptimizationOptions& options = {});

}  // namespace conke
