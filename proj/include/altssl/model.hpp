#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "altssl/dataset.hpp"
#include "altssl/tensor.hpp"

namespace altssl {

struct Linear {
  Tensor w;  // [in, out]
  Tensor b;  // [out]
};

struct Conv2d {
  Tensor w;  // [F, C, kh, kw]
  Tensor b;  // [F]
  int stride = 1;
};

struct Relu {};

struct MaxPool2d {
  int window = 2;
  int stride = 2;
};

using Layer = std::variant<Linear, Conv2d, Relu, MaxPool2d>;

// An ordered group of layers; the unit of parameter freezing.
struct Block {
  std::vector<Layer> layers;
};

struct NamedParam {
  std::string name;
  Tensor tensor;
};

// Full named-parameter snapshot. Restoring one reproduces forward outputs
// bit-identically.
struct ModelState {
  std::vector<std::pair<std::string, Tensor>> entries;  // detached copies

  const Tensor* find(const std::string& name) const;
};

// A block-structured classifier: backbone blocks followed by a linear head.
// Supports freezing the first k blocks, full snapshot/restore, and head
// swapping -- the state mechanics the alternating training loop needs.
class Model {
 public:
  Model() = default;
  Model(std::vector<Block> blocks, Linear head, Shape input_shape, int feature_dim);

  // Backbone output [B, feature_dim] (flattened when convolutional).
  Tensor features(const Tensor& batch) const;
  // Class logits [B, K].
  Tensor forward(const Tensor& batch) const;

  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  int num_classes() const { return head_.b.shape()[0]; }
  int feature_dim() const { return feature_dim_; }
  const Shape& input_shape() const { return input_shape_; }

  // Excludes blocks [0, k) from gradient updates; head stays trainable.
  void set_trainable(int frozen_block_count);
  int frozen_block_count() const { return frozen_blocks_; }

  std::vector<NamedParam> parameters() const;
  std::vector<NamedParam> trainable_parameters() const;

  ModelState snapshot() const;
  // Strict restore: names and shapes must match exactly.
  void restore(const ModelState& state);
  // Restores only block.* entries; the head is left alone. Used to transfer
  // a pretext backbone into a model with a different head width.
  void restore_backbone(const ModelState& state);
  // Replaces the head with a fresh seeded one of width new_K.
  void swap_head(int new_K, uint64_t seed);

 private:
  std::vector<Block> blocks_;
  Linear head_;
  Shape input_shape_;
  int feature_dim_ = 0;
  int frozen_blocks_ = 0;
};

// He-style fan-in uniform init, deterministic per seed.
Linear make_linear(int in_dim, int out_dim, Rng& rng);
Conv2d make_conv(int in_channels, int out_channels, int kernel, int stride, Rng& rng);

// One block per hidden layer (linear + relu).
Model build_mlp(int input_dim, const std::vector<int>& hidden_dims, int num_classes,
                uint64_t seed);
// One block per conv stage (3x3 conv + relu + 2x2 max-pool).
Model build_small_cnn(int in_channels, int image_h, int image_w,
                      const std::vector<int>& channels, int num_classes, uint64_t seed);

// ModelState binary file: u32 LE parameter count, then per parameter
// u32 name length, name bytes, u32 rank, u32 dims, f64 LE values.
void save_model_state(const ModelState& state, const std::string& path);
ModelState load_model_state(const std::string& path);

// Argmax class predictions, batched, no gradient recording.
std::vector<int> predict_classes(const Model& model, std::span<const Example> examples,
                                 int batch_size = 256);
// Fraction of examples whose prediction matches Example.label. Evaluation
// only; callers must not feed it firewalled unlabeled data during training.
double eval_accuracy(const Model& model, std::span<const Example> examples,
                     int batch_size = 256);

}  // namespace altssl
