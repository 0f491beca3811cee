#include "altssl/ssl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "altssl/losses.hpp"
#include "altssl/optimizer.hpp"

namespace altssl {

namespace {

// Row-wise softmax on raw values, no graph involvement. Same max-shifted
// log-sum-exp route as the softmax op, so results are bit-identical to it.
std::vector<double> softmax_row(const double* logits, int k) {
  double mx = logits[0];
  for (int c = 1; c < k; ++c) mx = std::max(mx, logits[c]);
  double lse = 0.0;
  for (int c = 0; c < k; ++c) lse += std::exp(logits[c] - mx);
  lse = std::log(lse) + mx;
  std::vector<double> out(static_cast<size_t>(k));
  for (int c = 0; c < k; ++c) out[static_cast<size_t>(c)] = std::exp(logits[c] - lse);
  return out;
}

int argmax_row(const double* row, int k) {
  int best = 0;
  for (int c = 1; c < k; ++c) {
    if (row[c] > row[best]) best = c;  // ties keep the lowest index
  }
  return best;
}

std::vector<Tensor> head_params(Model& model) {
  std::vector<Tensor> out;
  for (auto& np : model.parameters()) {
    if (np.name.rfind("head.", 0) == 0) out.push_back(np.tensor);
  }
  return out;
}

}  // namespace

bool PseudoLabels::contains(int id) const {
  return mode == PseudoMode::kHard ? hard.count(id) > 0 : soft.count(id) > 0;
}

int PseudoLabels::hard_label(int id) const {
  if (mode == PseudoMode::kHard) {
    auto it = hard.find(id);
    if (it == hard.end()) {
      throw std::invalid_argument("no pseudo-label for id " + std::to_string(id));
    }
    return it->second;
  }
  auto it = soft.find(id);
  if (it == soft.end()) {
    throw std::invalid_argument("no pseudo-label for id " + std::to_string(id));
  }
  return argmax_row(it->second.data(), static_cast<int>(it->second.size()));
}

void CycleConfig::validate() const {
  std::vector<std::string> problems;
  if (num_cycles < 1) problems.push_back("num_cycles must be >= 1");
  if (final_full_cycles < 1) problems.push_back("final_full_cycles must be >= 1");
  if (final_full_cycles > num_cycles) {
    problems.push_back("final_full_cycles must be <= num_cycles");
  }
  if (phase1_epochs < 1) problems.push_back("phase1_epochs must be >= 1");
  if (phase2_epochs < 0) problems.push_back("phase2_epochs must be >= 0");
  if (lambda_temp < 0.0) problems.push_back("lambda_temp must be >= 0");
  if (!(subset_fraction > 0.0) || subset_fraction > 1.0) {
    problems.push_back("subset_fraction must be in (0,1]");
  }
  if (frozen_block_count < 0) problems.push_back("frozen_block_count must be >= 0");
  if (!(phase1_lr > 0.0)) problems.push_back("phase1_lr must be > 0");
  if (!(phase2_lr > 0.0)) problems.push_back("phase2_lr must be > 0");
  if (phase1_momentum < 0.0 || phase1_momentum >= 1.0) {
    problems.push_back("phase1_momentum must be in [0,1)");
  }
  if (phase2_momentum < 0.0 || phase2_momentum >= 1.0) {
    problems.push_back("phase2_momentum must be in [0,1)");
  }
  if (phase2_batch_size < 1) problems.push_back("phase2_batch_size must be >= 1");
  if (!problems.empty()) {
    std::string msg = "invalid cycle config:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
}

void phase_one(Model& model, std::span<const Example> labeled, int epochs, double lr,
               double momentum) {
  if (labeled.empty()) throw std::invalid_argument("phase_one: empty labeled set");
  if (epochs == 0) return;

  // The backbone is excluded from updates, so its features are constants for
  // the whole phase; compute them once.
  Tensor features;
  {
    NoGradGuard ng;
    features = model.features(stack_features(labeled));
  }
  features = features.detach_copy();
  std::vector<int> targets;
  targets.reserve(labeled.size());
  for (const Example& e : labeled) targets.push_back(e.label);

  std::vector<Tensor> params = head_params(model);
  Tensor w = params[0], b = params[1];
  OptimizerState opt = OptimizerState::create(lr, momentum, params);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    LossValue loss = cross_entropy(add(matmul(features, w), b), targets);
    backward(loss.value);
    nesterov_step(params, opt);
  }
}

PseudoLabels assign_pseudo_labels(const Model& model, std::span<const Example> unlabeled,
                                  PseudoMode mode) {
  NoGradGuard ng;
  PseudoLabels out;
  out.mode = mode;
  const int k = model.num_classes();
  constexpr size_t kBatch = 256;
  for (size_t start = 0; start < unlabeled.size(); start += kBatch) {
    const size_t n = std::min(kBatch, unlabeled.size() - start);
    Tensor logits = model.forward(stack_features(unlabeled.subspan(start, n)));
    for (size_t r = 0; r < n; ++r) {
      const double* row = &logits.values()[r * static_cast<size_t>(k)];
      const int id = unlabeled[start + r].id;
      if (mode == PseudoMode::kHard) {
        out.hard[id] = argmax_row(row, k);
      } else {
        out.soft[id] = softmax_row(row, k);
      }
    }
  }
  return out;
}

PhaseTwoStats phase_two(Model& model, const ModelState& theta0,
                        std::span<const Example> active, const PseudoLabels& pseudo,
                        const CycleConfig& config, int cycle) {
  for (const Example& e : active) {
    if (!pseudo.contains(e.id)) {
      throw std::invalid_argument("phase_two: no pseudo-label for active example id " +
                                  std::to_string(e.id));
    }
  }
  if (config.reinitialize) {
    model.restore(theta0);
    model.swap_head(model.num_classes(),
                    derive_seed(config.seed, 0x72657365 + static_cast<uint64_t>(cycle)));
  }
  model.set_trainable(config.frozen_block_count);

  std::vector<NamedParam> named = model.trainable_parameters();
  std::vector<Tensor> params;
  for (auto& np : named) params.push_back(np.tensor);
  OptimizerState opt = OptimizerState::create(config.phase2_lr, config.phase2_momentum, params);

  const int k = model.num_classes();
  Rng shuffle_rng(derive_seed(config.seed, 0x70327368 + static_cast<uint64_t>(cycle)));

  PredictionMemory memory;
  PhaseTwoStats stats;
  int pseudo_batches = 0, temp_batches = 0;

  for (int epoch = 0; epoch < config.phase2_epochs; ++epoch) {
    std::vector<size_t> order(active.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    std::map<int, std::vector<double>> fresh_memory;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.phase2_batch_size)) {
      const size_t n =
          std::min(static_cast<size_t>(config.phase2_batch_size), order.size() - start);
      std::vector<Example> batch;
      batch.reserve(n);
      for (size_t j = 0; j < n; ++j) batch.push_back(active[order[start + j]]);

      Tensor logits = model.forward(stack_features(batch));

      LossValue ce;
      if (pseudo.mode == PseudoMode::kHard) {
        std::vector<int> targets;
        targets.reserve(n);
        for (const Example& e : batch) targets.push_back(pseudo.hard.at(e.id));
        ce = cross_entropy(logits, targets);
      } else {
        std::vector<double> rows;
        rows.reserve(n * static_cast<size_t>(k));
        for (const Example& e : batch) {
          const auto& p = pseudo.soft.at(e.id);
          rows.insert(rows.end(), p.begin(), p.end());
        }
        ce = cross_entropy(logits, Tensor::from_values({static_cast<int>(n), k}, rows));
      }
      stats.mean_loss_pseudo += ce.scalar();
      ++pseudo_batches;

      Tensor total = ce.value;
      if (config.lambda_temp > 0.0 && memory.epoch >= 0) {
        std::vector<double> ref_rows;
        ref_rows.reserve(n * static_cast<size_t>(k));
        for (const Example& e : batch) {
          const auto& p = memory.entries.at(e.id);
          ref_rows.insert(ref_rows.end(), p.begin(), p.end());
        }
        LossValue kl = kl_divergence(
            Tensor::from_values({static_cast<int>(n), k}, std::move(ref_rows)), logits);
        stats.mean_loss_temp += kl.scalar();
        ++temp_batches;
        total = add(ce.value, scale(kl.value, config.lambda_temp));
      }
      backward(total);
      nesterov_step(params, opt);

      // Detached predictions assigned within this epoch become p^{t-1} for
      // the next one.
      for (size_t r = 0; r < n; ++r) {
        fresh_memory[batch[r].id] =
            softmax_row(&logits.values()[r * static_cast<size_t>(k)], k);
      }
    }
    memory.entries = std::move(fresh_memory);
    memory.epoch = epoch;
  }

  if (pseudo_batches > 0) stats.mean_loss_pseudo /= pseudo_batches;
  if (temp_batches > 0) stats.mean_loss_temp /= temp_batches;
  return stats;
}

int label_switch_count(const PseudoLabels& prev, const PseudoLabels& curr) {
  if (prev.count() != curr.count()) {
    throw std::invalid_argument("label_switch_count: id coverage differs (" +
                                std::to_string(prev.count()) + " vs " +
                                std::to_string(curr.count()) + ")");
  }
  auto ids_of = [](const PseudoLabels& p) {
    std::vector<int> ids;
    if (p.mode == PseudoMode::kHard) {
      for (const auto& [id, _] : p.hard) ids.push_back(id);
    } else {
      for (const auto& [id, _] : p.soft) ids.push_back(id);
    }
    return ids;
  };
  int switches = 0;
  for (int id : ids_of(prev)) {
    if (!curr.contains(id)) {
      throw std::invalid_argument("label_switch_count: id " + std::to_string(id) +
                                  " missing from the newer assignment");
    }
    if (prev.hard_label(id) != curr.hard_label(id)) ++switches;
  }
  return switches;
}

std::vector<CycleReport> run_cycles(Model& model, const SemiSplit& split,
                                    std::span<const Example> test_set,
                                    const ModelState& theta0, const CycleConfig& config) {
  config.validate();
  if (split.labeled().empty()) throw std::invalid_argument("run_cycles: empty labeled set");
  if (split.unlabeled().empty()) {
    throw std::invalid_argument("run_cycles: empty unlabeled set");
  }

  model.restore(theta0);
  Rng subset_rng(derive_seed(config.seed, 0x73756273));
  std::vector<CycleReport> reports;
  std::optional<PseudoLabels> previous;

  for (int cycle = 0; cycle < config.num_cycles; ++cycle) {
    phase_one(model, split.labeled(), config.phase1_epochs, config.phase1_lr,
              config.phase1_momentum);
    const double labeled_acc = eval_accuracy(model, split.labeled());

    PseudoLabels pseudo =
        assign_pseudo_labels(model, split.unlabeled(), config.pseudo_mode);
    pseudo.cycle = cycle;

    CycleReport report;
    report.cycle = cycle;
    report.labeled_train_accuracy = labeled_acc;
    if (previous.has_value()) {
      report.switch_count = label_switch_count(*previous, pseudo);
    }

    const bool full_data = cycle >= config.num_cycles - config.final_full_cycles;
    std::vector<Example> active_storage;
    std::span<const Example> active;
    if (full_data || split.unlabeled().size() < 2) {
      active = split.unlabeled();
    } else {
      active_storage =
          sample_subset(split.unlabeled(), config.subset_fraction, subset_rng).active;
      if (active_storage.empty()) {
        throw std::invalid_argument("run_cycles: subset_fraction yields an empty active set");
      }
      active = active_storage;
    }
    report.active_size = static_cast<int>(active.size());

    PhaseTwoStats stats = phase_two(model, theta0, active, pseudo, config, cycle);
    report.mean_loss_pseudo = stats.mean_loss_pseudo;
    report.mean_loss_temp = stats.mean_loss_temp;
    report.test_accuracy = eval_accuracy(model, test_set);

    reports.push_back(report);
    previous = std::move(pseudo);
  }
  return reports;
}

}  // namespace altssl
