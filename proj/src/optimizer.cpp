#include "altssl/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace altssl {

OptimizerState OptimizerState::create(double learning_rate, double momentum,
                                      const std::vector<Tensor>& params) {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("optimizer: learning rate must be > 0, got " +
                                std::to_string(learning_rate));
  }
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("optimizer: momentum must be in [0,1), got " +
                                std::to_string(momentum));
  }
  OptimizerState st;
  st.learning_rate = learning_rate;
  st.momentum = momentum;
  st.velocity.reserve(params.size());
  for (const Tensor& p : params) {
    st.velocity.emplace_back(static_cast<size_t>(p.size()), 0.0);
  }
  return st;
}

void nesterov_step(std::vector<Tensor>& params,
                   const std::vector<std::vector<double>>& grads,
                   OptimizerState& state) {
  if (params.size() != grads.size() || params.size() != state.velocity.size()) {
    throw std::invalid_argument("nesterov_step: got " + std::to_string(params.size()) +
                                " params, " + std::to_string(grads.size()) + " grads, " +
                                std::to_string(state.velocity.size()) + " velocity buffers");
  }
  const double mu = state.momentum;
  const double lr = state.learning_rate;
  for (size_t i = 0; i < params.size(); ++i) {
    std::vector<double>& w = params[i].mutable_values();
    const std::vector<double>& g = grads[i];
    std::vector<double>& v = state.velocity[i];
    if (w.size() != g.size() || w.size() != v.size()) {
      throw std::invalid_argument(
          "nesterov_step: param " + std::to_string(i) + " has " + std::to_string(w.size()) +
          " values, grad " + std::to_string(g.size()) + ", velocity " + std::to_string(v.size()));
    }
    for (size_t j = 0; j < w.size(); ++j) {
      v[j] = mu * v[j] - lr * g[j];
      w[j] = w[j] + mu * v[j] - lr * g[j];
    }
  }
}

void nesterov_step(std::vector<Tensor>& params, OptimizerState& state) {
  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (const Tensor& p : params) grads.push_back(p.grad());
  nesterov_step(params, grads, state);
}

double step_decay_lr(int epoch, double base_lr, const std::vector<int>& milestones,
                     double factor) {
  for (size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] <= milestones[i - 1]) {
      throw std::invalid_argument("step_decay_lr: milestones must be strictly increasing");
    }
  }
  int passed = 0;
  for (int m : milestones) {
    if (m <= epoch) ++passed;
  }
  return base_lr * std::pow(factor, passed);
}

}  // namespace altssl
