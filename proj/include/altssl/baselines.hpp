#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "altssl/dataset.hpp"
#include "altssl/model.hpp"

namespace altssl {

// Consistency-weight ramp: max_weight * exp(-5 (1 - min(t/len, 1))^2);
// max_weight everywhere when ramp_length is 0.
struct RampSchedule {
  int ramp_length = 80;
  double max_weight = 1.0;
};

double ramp_weight(int epoch, const RampSchedule& schedule);

// Supervised training on the labeled set only, from theta0, under the same
// freezing policy as the SSL runs.
void labeled_only_train(Model& model, const ModelState& theta0,
                        std::span<const Example> labeled, int epochs, double lr,
                        double momentum, int frozen_block_count);

struct PiModelResult {
  // State after every epoch; snapshots let a caller render the boundary at
  // any point of the ramp.
  std::vector<ModelState> epoch_snapshots;
  std::vector<double> epoch_loss_labeled;
  std::vector<double> epoch_loss_consistency;  // weighted term, 0 before the ramp bites
};

// Consistency baseline: cross-entropy on the labeled set plus a ramped mean
// squared difference between the softmax outputs of two independently
// noise-perturbed copies of each unlabeled input (isotropic Gaussian input
// noise; the two-moons setting).
PiModelResult pi_model_train(Model& model, std::span<const Example> labeled,
                             std::span<const Example> unlabeled, double noise_sigma,
                             const RampSchedule& ramp, int epochs, double lr,
                             double momentum, uint64_t seed, int batch_size = 100);

}  // namespace altssl
