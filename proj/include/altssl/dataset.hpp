#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "altssl/rng.hpp"
#include "altssl/tensor.hpp"

namespace altssl {

constexpr int kNoLabel = -1;

// One data point. `id` is stable across shuffles and subset sampling;
// pseudo-labels and prediction memory key on it.
struct Example {
  Tensor features;  // 2-D point for two-moons, [C,H,W] image otherwise
  int label = kNoLabel;
  int id = 0;
};

struct Dataset {
  std::vector<Example> examples;
  int num_classes = 0;
  Shape feature_shape;
};

struct TwoMoonsConfig {
  int n_per_class = 500;
  double noise_sigma = 0.1;
  uint64_t seed = 0;
};

// Class 0: (cos t, sin t), t uniform in [0, pi]; class 1: (1 - cos t,
// 0.5 - sin t); isotropic Gaussian noise of std noise_sigma on top.
Dataset make_two_moons(const TwoMoonsConfig& config);

// IDX (MNIST-style) container, big-endian. Pixels are scaled to [0,1];
// features come out as [1,H,W].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Inverse of load_idx for byte images; used for fixtures and synthetic sets.
void write_idx(const std::vector<std::vector<uint8_t>>& images, int rows, int cols,
               const std::vector<uint8_t>& labels, const std::string& images_path,
               const std::string& labels_path);

// Labeled/unlabeled partition. Unlabeled examples carry label = kNoLabel;
// their ground truth is kept aside and is for evaluation only -- no training
// operation receives it.
class SemiSplit {
 public:
  SemiSplit() = default;
  SemiSplit(std::vector<Example> labeled, std::vector<Example> unlabeled,
            std::unordered_map<int, int> hidden_truth, int labels_per_class,
            uint64_t seed);

  const std::vector<Example>& labeled() const { return labeled_; }
  const std::vector<Example>& unlabeled() const { return unlabeled_; }
  int labels_per_class() const { return labels_per_class_; }
  uint64_t seed() const { return seed_; }

  // Evaluation-only access to the hidden ground truth of an unlabeled id.
  int eval_only_hidden_label(int id) const;

 private:
  std::vector<Example> labeled_;
  std::vector<Example> unlabeled_;
  std::unordered_map<int, int> hidden_truth_;
  int labels_per_class_ = 0;
  uint64_t seed_ = 0;
};

// Stratified-uniform sampling without replacement: exactly labels_per_class
// examples of every class go into the labeled set, the rest become unlabeled.
SemiSplit semi_split(const Dataset& dataset, int labels_per_class, uint64_t seed);

// Counterclockwise rotation by k*90 degrees, pure index permutation.
// Square images required for odd k.
Tensor rotate90(const Tensor& image, int k);

struct SubsetSplit {
  std::vector<Example> active;
  std::vector<Example> held_out;
};

// |active| = floor(fraction * N), sampled uniformly without replacement.
SubsetSplit sample_subset(std::span<const Example> unlabeled, double fraction, Rng& rng);

// Per-channel mean/std over a set of image examples.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};
ChannelStats compute_channel_stats(std::span<const Example> examples);
void apply_normalization(Dataset& dataset, const ChannelStats& stats);

// Stacks features of a batch of examples into one [B, ...] tensor.
Tensor stack_features(std::span<const Example> batch);

// Synthetic ten-class digit set: seven-segment glyphs on 28x28 with jitter
// and noise. A desk-scale MNIST stand-in that needs no downloads.
Dataset make_digits(int count, double pixel_noise, uint64_t seed);
// Byte-image form of the same generator, for writing IDX fixtures.
void make_digit_bytes(int count, double pixel_noise, uint64_t seed,
                      std::vector<std::vector<uint8_t>>& images,
                      std::vector<uint8_t>& labels);

}  // namespace altssl
