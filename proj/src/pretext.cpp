#include "altssl/pretext.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "altssl/losses.hpp"
#include "altssl/optimizer.hpp"

namespace altssl {

RotationBatch make_rotation_batch(const Tensor& images) {
  if (images.rank() != 4) {
    throw std::invalid_argument("make_rotation_batch: expected [B,C,H,W], got " +
                                shape_str(images.shape()));
  }
  const int B = images.shape()[0], C = images.shape()[1];
  const int H = images.shape()[2], W = images.shape()[3];
  if (H != W) {
    throw std::invalid_argument("make_rotation_batch: images must be square, got " +
                                shape_str(images.shape()));
  }
  const size_t img_size = static_cast<size_t>(C) * H * W;
  std::vector<double> out;
  out.reserve(4 * B * img_size);
  std::vector<int> labels;
  labels.reserve(4 * static_cast<size_t>(B));
  for (int i = 0; i < B; ++i) {
    Tensor original = Tensor::from_values(
        {C, H, W},
        std::vector<double>(images.values().begin() + static_cast<long>(i * img_size),
                            images.values().begin() + static_cast<long>((i + 1) * img_size)));
    for (int k = 0; k < 4; ++k) {
      Tensor rotated = rotate90(original, k);
      out.insert(out.end(), rotated.values().begin(), rotated.values().end());
      labels.push_back(k);
    }
  }
  return {Tensor::from_values({4 * B, C, H, W}, std::move(out)), std::move(labels)};
}

double rotation_accuracy(const Model& model, std::span<const Example> images,
                         int batch_size) {
  NoGradGuard ng;
  int correct = 0, total = 0;
  for (size_t start = 0; start < images.size(); start += static_cast<size_t>(batch_size)) {
    const size_t n = std::min(static_cast<size_t>(batch_size), images.size() - start);
    RotationBatch rb = make_rotation_batch(stack_features(images.subspan(start, n)));
    Tensor logits = model.forward(rb.images);
    const int k = logits.shape()[1];
    for (size_t r = 0; r < rb.rotation_labels.size(); ++r) {
      const double* row = &logits.values()[r * static_cast<size_t>(k)];
      int best = 0;
      for (int c = 1; c < k; ++c)
        if (row[c] > row[best]) best = c;
      if (best == rb.rotation_labels[r]) ++correct;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / total;
}

PretextCheckpoint train_pretext(Model& model, std::span<const Example> images,
                                const PretextSchedule& schedule) {
  if (model.num_classes() != 4) {
    throw std::invalid_argument("train_pretext: model head must be 4-way, got " +
                                std::to_string(model.num_classes()));
  }
  if (images.empty()) throw std::invalid_argument("train_pretext: no images");
  if (schedule.epochs < 0 || schedule.batch_size < 1) {
    throw std::invalid_argument("train_pretext: invalid schedule");
  }

  std::vector<int> milestones = schedule.milestones;
  if (milestones.empty()) {
    // 30% / 60% / 80% of the run, scaled from the 200-epoch 60/120/160 recipe
    for (double f : {0.3, 0.6, 0.8}) {
      const int m = static_cast<int>(std::floor(f * schedule.epochs));
      if (m > 0 && (milestones.empty() || m > milestones.back())) milestones.push_back(m);
    }
  }

  // Held-out rotation split for the checkpoint accuracy.
  Rng split_rng(derive_seed(schedule.seed, 0x686f6c64));
  std::vector<size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  split_rng.shuffle(order);
  size_t holdout_n = static_cast<size_t>(
      std::floor(schedule.holdout_fraction * static_cast<double>(images.size())));
  holdout_n = std::min(holdout_n, images.size() - 1);
  std::vector<Example> holdout, train;
  for (size_t i = 0; i < order.size(); ++i) {
    // Only features and ids travel into training; labels stay behind.
    const Example& src = images[order[i]];
    Example clean{src.features, kNoLabel, src.id};
    (i < holdout_n ? holdout : train).push_back(std::move(clean));
  }

  std::vector<NamedParam> named = model.trainable_parameters();
  std::vector<Tensor> params;
  for (auto& np : named) params.push_back(np.tensor);
  OptimizerState opt = OptimizerState::create(schedule.base_lr, schedule.momentum, params);

  Rng shuffle_rng(derive_seed(schedule.seed, 0x73687566));
  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    opt.learning_rate =
        step_decay_lr(epoch, schedule.base_lr, milestones, schedule.decay_factor);
    std::vector<size_t> idx(train.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle_rng.shuffle(idx);
    for (size_t start = 0; start < idx.size(); start += static_cast<size_t>(schedule.batch_size)) {
      const size_t n = std::min(static_cast<size_t>(schedule.batch_size), idx.size() - start);
      std::vector<Example> batch;
      batch.reserve(n);
      for (size_t j = 0; j < n; ++j) batch.push_back(train[idx[start + j]]);
      RotationBatch rb = make_rotation_batch(stack_features(batch));
      LossValue loss = cross_entropy(model.forward(rb.images), rb.rotation_labels);
      backward(loss.value);
      nesterov_step(params, opt);
    }
  }

  PretextCheckpoint ckpt;
  ckpt.state = model.snapshot();
  ckpt.pretext_accuracy = rotation_accuracy(model, holdout.empty() ? train : holdout);
  ckpt.epochs_trained = schedule.epochs;
  ckpt.seed = schedule.seed;
  return ckpt;
}

void save_pretext_checkpoint(const PretextCheckpoint& ckpt, const std::string& state_path,
                             const std::string& meta_path) {
  save_model_state(ckpt.state, state_path);
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot write pretext sidecar: " + meta_path);
  meta.precision(17);
  meta << "pretext_accuracy = " << ckpt.pretext_accuracy << "\n";
  meta << "epochs_trained = " << ckpt.epochs_trained << "\n";
  meta << "seed = " << ckpt.seed << "\n";
}

PretextCheckpoint load_pretext_checkpoint(const std::string& state_path,
                                          const std::string& meta_path) {
  PretextCheckpoint ckpt;
  ckpt.state = load_model_state(state_path);
  std::ifstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open pretext sidecar: " + meta_path);
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    trim(key);
    trim(value);
    if (key == "pretext_accuracy") ckpt.pretext_accuracy = std::stod(value);
    if (key == "epochs_trained") ckpt.epochs_trained = std::stoi(value);
    if (key == "seed") ckpt.seed = std::stoull(value);
  }
  return ckpt;
}

}  // namespace altssl
