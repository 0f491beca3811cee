#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "altssl/dataset.hpp"
#include "altssl/model.hpp"

namespace altssl {

enum class PseudoMode { kHard, kSoft };

// Model-assigned labels for the unlabeled set, keyed by example id.
struct PseudoLabels {
  PseudoMode mode = PseudoMode::kHard;
  std::map<int, int> hard;                   // id -> class (kHard)
  std::map<int, std::vector<double>> soft;   // id -> distribution (kSoft)
  int cycle = 0;

  bool contains(int id) const;
  // Class index; argmax of the distribution in soft mode.
  int hard_label(int id) const;
  size_t count() const { return mode == PseudoMode::kHard ? hard.size() : soft.size(); }
};

// Per-example probability vectors from the previous epoch of phase two.
struct PredictionMemory {
  std::map<int, std::vector<double>> entries;
  int epoch = -1;
};

struct CycleConfig {
  int num_cycles = 10;
  int final_full_cycles = 3;
  int phase1_epochs = 50;
  int phase2_epochs = 20;
  double lambda_temp = 0.0;
  PseudoMode pseudo_mode = PseudoMode::kHard;
  double subset_fraction = 2.0 / 3.0;
  bool reinitialize = true;
  int frozen_block_count = 0;
  double phase1_lr = 0.5;
  double phase1_momentum = 0.9;
  double phase2_lr = 0.1;
  double phase2_momentum = 0.9;
  int phase2_batch_size = 32;
  uint64_t seed = 0;

  // Throws listing every violation at once.
  void validate() const;
};

struct CycleReport {
  int cycle = 0;
  double test_accuracy = 0.0;
  double labeled_train_accuracy = 0.0;
  std::optional<int> switch_count;  // vs previous cycle; absent for cycle 0
  double mean_loss_pseudo = 0.0;
  double mean_loss_temp = 0.0;      // raw KL term, 0 when disabled
  int active_size = 0;
};

// Phase one: head-only fit of the labeled set. Backbone parameters are
// excluded from updates entirely (their features are computed once and
// treated as constants).
void phase_one(Model& model, std::span<const Example> labeled, int epochs, double lr,
               double momentum = 0.9);

// Phase one's output for phase two: hard argmax labels (ties to the lowest
// class index) or full softmax rows. No gradients are recorded.
PseudoLabels assign_pseudo_labels(const Model& model, std::span<const Example> unlabeled,
                                  PseudoMode mode);

struct PhaseTwoStats {
  double mean_loss_pseudo = 0.0;
  double mean_loss_temp = 0.0;
};

// Phase two: optionally reset to theta0 with a fresh per-cycle head, then fit
// the pseudo-labels on the active unlabeled subset. The loss is
// L_pseudo + lambda_temp * L_temp where L_temp is the KL divergence from the
// previous epoch's predictions (skipped on the first epoch, when no memory
// exists yet).
PhaseTwoStats phase_two(Model& model, const ModelState& theta0,
                        std::span<const Example> active, const PseudoLabels& pseudo,
                        const CycleConfig& config, int cycle);

// Number of ids whose (argmax) label differs between two assignments with
// identical id coverage.
int label_switch_count(const PseudoLabels& prev, const PseudoLabels& curr);

// The full alternating loop: per cycle, phase one -> pseudo-labels on the
// full unlabeled set -> subset sampling (full set for the last
// final_full_cycles cycles) -> phase two, with one report per cycle.
// Information flows only as pseudo-labels (one -> two) and weights
// (two -> one).
std::vector<CycleReport> run_cycles(Model& model, const SemiSplit& split,
                                    std::span<const Example> test_set,
                                    const ModelState& theta0, const CycleConfig& config);

}  // namespace altssl
