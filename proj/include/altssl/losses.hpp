#pragma once

#include <map>
#include <string>
#include <vector>

#include "altssl/tensor.hpp"

namespace altssl {

// A scalar loss still attached to the graph, plus the named terms it was
// assembled from. scalar() always equals the documented combination of the
// components.
struct LossValue {
  Tensor value;
  std::map<std::string, double> components;

  double scalar() const { return value.item(); }
};

// Mean over the batch of -log softmax(logits)[target]. Targets out of [0, K)
// are rejected.
LossValue cross_entropy(const Tensor& logits, const std::vector<int>& hard_targets);

// Soft-target form; each target row must sum to 1 within 1e-6. Targets are
// constants (no gradient).
LossValue cross_entropy(const Tensor& logits, const Tensor& soft_targets);

// Mean over the batch of sum_k p_ref_k (log p_ref_k - log_softmax(q)_k).
// p_ref rows are constant reference distributions; entries with p_ref_k = 0
// contribute zero.
LossValue kl_divergence(const Tensor& p_ref, const Tensor& logits_q);

}  // namespace altssl
