#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace altssl {

using Shape = std::vector<int>;

int64_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until backward touches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  // Propagates this node's grad into its parents' grads. Empty for leaves.
  std::function<void(TensorNode&)> backward_fn;
};

}  // namespace detail

// A dense row-major tensor of 64-bit reals with reverse-mode autograd.
// Copies are shallow (shared storage); the recorded graph hangs off the
// output of each op and is freed when the last handle to it drops.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  int64_t size() const;
  const std::vector<double>& values() const;
  // Leaf mutation for optimizers and parameter restore.
  std::vector<double>& mutable_values();
  bool requires_grad() const;
  void set_requires_grad(bool flag);
  // Gradient of the last backward pass; zeros if this tensor was never on a
  // path to the loss.
  std::vector<double> grad() const;
  // Value of a single-element tensor.
  double item() const;

  // Deep copy with no graph history.
  Tensor detach_copy() const;

  detail::TensorNode* node() const { return node_.get(); }
  std::shared_ptr<detail::TensorNode> share_node() const { return node_; }

 private:
  friend Tensor make_op_output(Shape, std::vector<double>,
                               std::vector<Tensor>,
                               std::function<void(detail::TensorNode&)>);
  std::shared_ptr<detail::TensorNode> node_;
};

// While alive, ops do not record graph history and outputs never require
// grad. Used for evaluation and pseudo-label assignment.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Reverse-mode sweep from a scalar loss. Gradients of every tensor reachable
// from the loss are recomputed from scratch (no accumulation across calls).
void backward(const Tensor& loss);

// ---- ops ----

Tensor matmul(const Tensor& a, const Tensor& b);
// Same-shape elementwise add, or row broadcast [B,N] + [N].
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& x);
// x [B,C,H,W], w [F,C,kh,kw], bias [F]; no padding.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride);
Tensor max_pool2d(const Tensor& x, int window, int stride);
Tensor avg_pool2d(const Tensor& x, int window, int stride);
// [B, ...] -> [B, prod(rest)]
Tensor flatten(const Tensor& x);
// Row-wise over the last dimension of a 2-D tensor, max-shifted.
Tensor log_softmax(const Tensor& x);
Tensor softmax(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Name-dispatched op gateway. int_args carries the shape parameters of the
// structural ops (conv2d: {stride}; pools: {window, stride}).
Tensor forward_op(const std::string& op_name, const std::vector<Tensor>& inputs,
                  const std::vector<int>& int_args = {});

}  // namespace altssl
