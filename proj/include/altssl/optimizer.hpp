#pragma once

#include <vector>

#include "altssl/tensor.hpp"

namespace altssl {

// Nesterov-momentum SGD state. One velocity buffer per parameter, shapes
// mirroring the parameters.
struct OptimizerState {
  double learning_rate = 0.1;
  double momentum = 0.9;
  std::vector<std::vector<double>> velocity;

  static OptimizerState create(double learning_rate, double momentum,
                               const std::vector<Tensor>& params);
};

// v <- mu*v - lr*g;  w <- w + mu*v - lr*g  (lookahead-free Nesterov form).
// With mu = 0 this is bit-identical to plain gradient descent.
void nesterov_step(std::vector<Tensor>& params,
                   const std::vector<std::vector<double>>& grads,
                   OptimizerState& state);

// Convenience: pulls the gradients recorded on the parameters themselves.
void nesterov_step(std::vector<Tensor>& params, OptimizerState& state);

// base_lr * factor^(number of milestones <= epoch). Milestones must be
// strictly increasing.
double step_decay_lr(int epoch, double base_lr, const std::vector<int>& milestones,
                     double factor);

}  // namespace altssl
