#include "altssl/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "altssl/losses.hpp"
#include "altssl/optimizer.hpp"

namespace altssl {

double ramp_weight(int epoch, const RampSchedule& schedule) {
  if (epoch < 0) throw std::invalid_argument("ramp_weight: epoch must be >= 0");
  if (schedule.ramp_length <= 0) return schedule.max_weight;
  const double x = std::min(static_cast<double>(epoch) / schedule.ramp_length, 1.0);
  return schedule.max_weight * std::exp(-5.0 * (1.0 - x) * (1.0 - x));
}

void labeled_only_train(Model& model, const ModelState& theta0,
                        std::span<const Example> labeled, int epochs, double lr,
                        double momentum, int frozen_block_count) {
  if (labeled.empty()) throw std::invalid_argument("labeled_only_train: empty labeled set");
  model.restore(theta0);
  model.set_trainable(frozen_block_count);
  if (epochs == 0) return;

  Tensor batch = stack_features(labeled);
  std::vector<int> targets;
  targets.reserve(labeled.size());
  for (const Example& e : labeled) targets.push_back(e.label);

  std::vector<NamedParam> named = model.trainable_parameters();
  std::vector<Tensor> params;
  for (auto& np : named) params.push_back(np.tensor);
  OptimizerState opt = OptimizerState::create(lr, momentum, params);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    LossValue loss = cross_entropy(model.forward(batch), targets);
    backward(loss.value);
    nesterov_step(params, opt);
  }
}

PiModelResult pi_model_train(Model& model, std::span<const Example> labeled,
                             std::span<const Example> unlabeled, double noise_sigma,
                             const RampSchedule& ramp, int epochs, double lr,
                             double momentum, uint64_t seed, int batch_size) {
  if (labeled.empty()) throw std::invalid_argument("pi_model_train: empty labeled set");
  if (noise_sigma < 0.0) throw std::invalid_argument("pi_model_train: noise_sigma must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("pi_model_train: batch_size must be >= 1");

  Tensor labeled_batch = stack_features(labeled);
  std::vector<int> targets;
  targets.reserve(labeled.size());
  for (const Example& e : labeled) targets.push_back(e.label);

  std::vector<NamedParam> named = model.trainable_parameters();
  std::vector<Tensor> params;
  for (auto& np : named) params.push_back(np.tensor);
  OptimizerState opt = OptimizerState::create(lr, momentum, params);

  Rng noise_rng(derive_seed(seed, 0x70696e6f));
  Rng shuffle_rng(derive_seed(seed, 0x70697368));
  PiModelResult result;
  result.epoch_snapshots.reserve(static_cast<size_t>(epochs));

  auto perturbed = [&](const Tensor& base) {
    std::vector<double> v = base.values();
    if (noise_sigma > 0.0) {
      for (double& x : v) x += noise_rng.normal(0.0, noise_sigma);
    }
    return Tensor::from_values(base.shape(), std::move(v));
  };

  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double w = ramp_weight(epoch, ramp);
    double epoch_ce = 0.0, epoch_cons = 0.0;
    int steps = 0;
    if (unlabeled.empty() || w <= 0.0) {
      // Nothing to enforce consistency on: one plain supervised step.
      LossValue ce = cross_entropy(model.forward(labeled_batch), targets);
      epoch_ce = ce.scalar();
      steps = 1;
      backward(ce.value);
      nesterov_step(params, opt);
    } else {
      // Every step fits the (small) labeled set and smooths one unlabeled
      // minibatch under the ramped weight.
      std::vector<size_t> order(unlabeled.size());
      std::iota(order.begin(), order.end(), 0);
      shuffle_rng.shuffle(order);
      for (size_t start = 0; start < order.size(); start += static_cast<size_t>(batch_size)) {
        const size_t n = std::min(static_cast<size_t>(batch_size), order.size() - start);
        std::vector<Example> batch;
        batch.reserve(n);
        for (size_t j = 0; j < n; ++j) batch.push_back(unlabeled[order[start + j]]);
        Tensor unlabeled_batch = stack_features(batch);

        LossValue ce = cross_entropy(model.forward(labeled_batch), targets);
        Tensor p1 = softmax(model.forward(perturbed(unlabeled_batch)));
        Tensor p2 = softmax(model.forward(perturbed(unlabeled_batch)));
        Tensor diff = sub(p1, p2);
        Tensor consistency = mean(mul(diff, diff));
        epoch_ce += ce.scalar();
        epoch_cons += w * consistency.item();
        ++steps;
        backward(add(ce.value, scale(consistency, w)));
        nesterov_step(params, opt);
      }
    }
    result.epoch_loss_labeled.push_back(epoch_ce / steps);
    result.epoch_loss_consistency.push_back(epoch_cons / steps);
    result.epoch_snapshots.push_back(model.snapshot());
  }
  return result;
}

}  // namespace altssl
