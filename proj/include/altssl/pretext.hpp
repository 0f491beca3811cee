#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "altssl/dataset.hpp"
#include "altssl/model.hpp"

namespace altssl {

// 4B rotated images ordered (image0 x 4 rotations, image1 x 4, ...); entry
// 4i+k is rotate90(image_i, k) and its label is k.
struct RotationBatch {
  Tensor images;                    // [4B, C, H, W]
  std::vector<int> rotation_labels; // length 4B
};

RotationBatch make_rotation_batch(const Tensor& images);

struct PretextSchedule {
  int epochs = 30;
  double base_lr = 0.1;
  double momentum = 0.9;
  std::vector<int> milestones;  // defaults to 30%/60%/80% of epochs when empty
  double decay_factor = 0.1;
  int batch_size = 16;          // images per step; x4 rotated examples
  double holdout_fraction = 0.1;
  uint64_t seed = 0;
};

// The self-supervised checkpoint: backbone + 4-way rotation head, plus the
// rotation accuracy on a held-out split.
struct PretextCheckpoint {
  ModelState state;
  double pretext_accuracy = 0.0;
  int epochs_trained = 0;
  uint64_t seed = 0;
};

// Rotation pretraining. Labels of the incoming examples are never read; the
// rotation targets are self-generated.
PretextCheckpoint train_pretext(Model& model, std::span<const Example> images,
                                const PretextSchedule& schedule);

// Rotation accuracy of the current model over all four rotations of the
// given images.
double rotation_accuracy(const Model& model, std::span<const Example> images,
                         int batch_size = 64);

// Checkpoint persistence: ModelState binary next to a small structured-text
// sidecar (accuracy, epochs, seed).
void save_pretext_checkpoint(const PretextCheckpoint& ckpt, const std::string& state_path,
                             const std::string& meta_path);
PretextCheckpoint load_pretext_checkpoint(const std::string& state_path,
                                          const std::string& meta_path);

}  // namespace altssl
