#include "altssl/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace altssl {

namespace {

void check_logits(const Tensor& logits, const char* op) {
  if (logits.rank() != 2 || logits.shape()[0] < 1) {
    throw std::invalid_argument(std::string(op) + ": expected logits [B,K] with B >= 1, got " +
                                shape_str(logits.shape()));
  }
}

// Rows must be probability distributions: nonnegative, summing to 1 +- 1e-6.
void check_distribution_rows(const Tensor& rows, const char* op) {
  const int B = rows.shape()[0], K = rows.shape()[1];
  for (int r = 0; r < B; ++r) {
    double s = 0.0;
    for (int c = 0; c < K; ++c) {
      const double v = rows.values()[static_cast<size_t>(r) * K + c];
      if (v < 0.0) {
        throw std::invalid_argument(std::string(op) + ": negative probability " +
                                    std::to_string(v) + " in row " + std::to_string(r));
      }
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-6) {
      throw std::invalid_argument(std::string(op) + ": row " + std::to_string(r) +
                                  " sums to " + std::to_string(s) + ", expected 1");
    }
  }
}

}  // namespace

LossValue cross_entropy(const Tensor& logits, const std::vector<int>& hard_targets) {
  check_logits(logits, "cross_entropy");
  const int B = logits.shape()[0], K = logits.shape()[1];
  if (static_cast<int>(hard_targets.size()) != B) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(hard_targets.size()) +
                                " targets for batch of " + std::to_string(B));
  }
  std::vector<double> one_hot(static_cast<size_t>(B) * K, 0.0);
  for (int r = 0; r < B; ++r) {
    const int t = hard_targets[r];
    if (t < 0 || t >= K) {
      throw std::invalid_argument("cross_entropy: target " + std::to_string(t) +
                                  " out of range [0," + std::to_string(K) + ")");
    }
    one_hot[static_cast<size_t>(r) * K + t] = 1.0;
  }
  return cross_entropy(logits, Tensor::from_values({B, K}, std::move(one_hot)));
}

LossValue cross_entropy(const Tensor& logits, const Tensor& soft_targets) {
  check_logits(logits, "cross_entropy");
  if (soft_targets.shape() != logits.shape()) {
    throw std::invalid_argument("cross_entropy: target shape " +
                                shape_str(soft_targets.shape()) + " does not match logits " +
                                shape_str(logits.shape()));
  }
  check_distribution_rows(soft_targets, "cross_entropy");
  const int B = logits.shape()[0];
  const Tensor targets = soft_targets.requires_grad() ? soft_targets.detach_copy()
                                                      : soft_targets;
  Tensor value = scale(sum(mul(log_softmax(logits), targets)), -1.0 / B);
  LossValue loss;
  loss.components["cross_entropy"] = value.item();
  loss.value = std::move(value);
  return loss;
}

LossValue kl_divergence(const Tensor& p_ref, const Tensor& logits_q) {
  check_logits(logits_q, "kl_divergence");
  if (p_ref.shape() != logits_q.shape()) {
    throw std::invalid_argument("kl_divergence: reference shape " + shape_str(p_ref.shape()) +
                                " does not match logits " + shape_str(logits_q.shape()));
  }
  check_distribution_rows(p_ref, "kl_divergence");
  const int B = logits_q.shape()[0];
  const Tensor reference = p_ref.requires_grad() ? p_ref.detach_copy() : p_ref;

  // sum_k p log p, the constant entropy part; 0 log 0 terms contribute zero.
  double entropy_part = 0.0;
  for (double p : reference.values()) {
    if (p > 0.0) entropy_part += p * std::log(p);
  }
  Tensor cross_part = scale(sum(mul(log_softmax(logits_q), reference)), -1.0 / B);
  Tensor value = add(cross_part, Tensor::scalar(entropy_part / B));
  LossValue loss;
  loss.components["kl"] = value.item();
  loss.value = std::move(value);
  return loss;
}

}  // namespace altssl
