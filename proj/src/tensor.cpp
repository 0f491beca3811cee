#include "altssl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace altssl {

namespace {

thread_local bool g_grad_enabled = true;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void check(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

}  // namespace

int64_t shape_size(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

// ---- Tensor ----

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return from_values(std::move(shape), {}, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::vector<double> v(static_cast<size_t>(shape_size(shape)), value);
  return from_values(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({}, {value}, requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
  const auto n = static_cast<size_t>(shape_size(shape));
  if (values.empty()) values.assign(n, 0.0);
  check(values.size() == n, "tensor " + shape_str(shape) + " needs " +
                                std::to_string(n) + " values, got " +
                                std::to_string(values.size()));
  Tensor t;
  t.node_ = std::make_shared<detail::TensorNode>();
  t.node_->shape = std::move(shape);
  t.node_->values = std::move(values);
  t.node_->requires_grad = requires_grad;
  return t;
}

const Shape& Tensor::shape() const { return node_->shape; }
int Tensor::rank() const { return static_cast<int>(node_->shape.size()); }
int64_t Tensor::size() const { return static_cast<int64_t>(node_->values.size()); }
const std::vector<double>& Tensor::values() const { return node_->values; }
std::vector<double>& Tensor::mutable_values() { return node_->values; }
bool Tensor::requires_grad() const { return node_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { node_->requires_grad = flag; }

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(node_->values.size(), 0.0);
  return node_->grad;
}

double Tensor::item() const {
  check(size() == 1, "item() needs a single-element tensor, got " + shape_str(shape()));
  return node_->values[0];
}

Tensor Tensor::detach_copy() const {
  return Tensor::from_values(node_->shape, node_->values, false);
}

// Builds the output node of an op, recording graph edges only when autograd
// is enabled and some input needs gradients.
Tensor make_op_output(Shape shape, std::vector<double> values,
                      std::vector<Tensor> inputs,
                      std::function<void(detail::TensorNode&)> backward_fn) {
  bool needs_grad = false;
  if (g_grad_enabled) {
    for (const Tensor& in : inputs) needs_grad = needs_grad || in.requires_grad();
  }
  Tensor out = Tensor::from_values(std::move(shape), std::move(values), needs_grad);
  if (needs_grad) {
    auto* node = out.node();
    node->parents.reserve(inputs.size());
    for (const Tensor& in : inputs) node->parents.push_back(in.share_node());
    node->backward_fn = std::move(backward_fn);
  }
  return out;
}

namespace {

std::vector<double>& grad_buffer(detail::TensorNode& n) {
  if (n.grad.size() != n.values.size()) n.grad.assign(n.values.size(), 0.0);
  return n.grad;
}

}  // namespace

void backward(const Tensor& loss) {
  check(loss.defined() && loss.size() == 1,
        "backward needs a scalar loss, got " +
            (loss.defined() ? shape_str(loss.shape()) : std::string("<empty>")));
  using Node = detail::TensorNode;

  // Iterative post-order over the recorded graph.
  std::vector<Node*> topo;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      topo.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : topo) n->grad.assign(n->values.size(), 0.0);
  loss.node()->grad[0] = 1.0;
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

// ---- ops ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  check(a.rank() == 2 && b.rank() == 2 && a.shape()[1] == b.shape()[0],
        "matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
            shape_str(b.shape()));
  const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = &bv[static_cast<size_t>(p) * n];
      double* orow = &out[static_cast<size_t>(i) * n];
      for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  auto an = a.share_node();
  auto bn = b.share_node();
  return make_op_output({m, n}, std::move(out), {a, b},
                        [an, bn, m, k, n](detail::TensorNode& self) {
                          const auto& g = self.grad;
                          if (an->requires_grad) {
                            auto& ga = grad_buffer(*an);
                            for (int i = 0; i < m; ++i)
                              for (int j = 0; j < n; ++j) {
                                const double gij = g[i * n + j];
                                if (gij == 0.0) continue;
                                for (int p = 0; p < k; ++p)
                                  ga[i * k + p] += gij * bn->values[p * n + j];
                              }
                          }
                          if (bn->requires_grad) {
                            auto& gb = grad_buffer(*bn);
                            for (int i = 0; i < m; ++i)
                              for (int p = 0; p < k; ++p) {
                                const double aip = an->values[i * k + p];
                                if (aip == 0.0) continue;
                                for (int j = 0; j < n; ++j)
                                  gb[p * n + j] += aip * g[i * n + j];
                              }
                          }
                        });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool row_bcast = !same && a.rank() == 2 && b.rank() == 1 &&
                         a.shape()[1] == b.shape()[0];
  check(same || row_bcast, "add: incompatible shapes " + shape_str(a.shape()) +
                               " and " + shape_str(b.shape()));
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  if (same) {
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  } else {
    const size_t n = bv.size();
    for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i % n];
  }
  auto an = a.share_node();
  auto bn = b.share_node();
  return make_op_output(a.shape(), std::move(out), {a, b},
                        [an, bn, same](detail::TensorNode& self) {
                          if (an->requires_grad) {
                            auto& ga = grad_buffer(*an);
                            for (size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
                          }
                          if (bn->requires_grad) {
                            auto& gb = grad_buffer(*bn);
                            if (same) {
                              for (size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i];
                            } else {
                              const size_t n = gb.size();
                              for (size_t i = 0; i < self.grad.size(); ++i)
                                gb[i % n] += self.grad[i];
                            }
                          }
                        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "sub: incompatible shapes " + shape_str(a.shape()) +
                                    " and " + shape_str(b.shape()));
  std::vector<double> out(a.values());
  for (size_t i = 0; i < out.size(); ++i) out[i] -= b.values()[i];
  auto an = a.share_node();
  auto bn = b.share_node();
  return make_op_output(a.shape(), std::move(out), {a, b},
                        [an, bn](detail::TensorNode& self) {
                          if (an->requires_grad) {
                            auto& ga = grad_buffer(*an);
                            for (size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
                          }
                          if (bn->requires_grad) {
                            auto& gb = grad_buffer(*bn);
                            for (size_t i = 0; i < gb.size(); ++i) gb[i] -= self.grad[i];
                          }
                        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(), "mul: incompatible shapes " + shape_str(a.shape()) +
                                    " and " + shape_str(b.shape()));
  std::vector<double> out(a.values());
  for (size_t i = 0; i < out.size(); ++i) out[i] *= b.values()[i];
  auto an = a.share_node();
  auto bn = b.share_node();
  return make_op_output(a.shape(), std::move(out), {a, b},
                        [an, bn](detail::TensorNode& self) {
                          if (an->requires_grad) {
                            auto& ga = grad_buffer(*an);
                            for (size_t i = 0; i < ga.size(); ++i)
                              ga[i] += self.grad[i] * bn->values[i];
                          }
                          if (bn->requires_grad) {
                            auto& gb = grad_buffer(*bn);
                            for (size_t i = 0; i < gb.size(); ++i)
                              gb[i] += self.grad[i] * an->values[i];
                          }
                        });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values());
  for (double& v : out) v *= factor;
  auto an = a.share_node();
  return make_op_output(a.shape(), std::move(out), {a},
                        [an, factor](detail::TensorNode& self) {
                          if (!an->requires_grad) return;
                          auto& ga = grad_buffer(*an);
                          for (size_t i = 0; i < ga.size(); ++i)
                            ga[i] += factor * self.grad[i];
                        });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  auto xn = x.share_node();
  return make_op_output(x.shape(), std::move(out), {x},
                        [xn](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          for (size_t i = 0; i < gx.size(); ++i)
                            if (xn->values[i] > 0.0) gx[i] += self.grad[i];
                        });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride) {
  check(x.rank() == 4 && w.rank() == 4 && bias.rank() == 1,
        "conv2d: expected x[B,C,H,W], w[F,C,kh,kw], bias[F], got " +
            shape_str(x.shape()) + ", " + shape_str(w.shape()) + ", " +
            shape_str(bias.shape()));
  const int B = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const int F = w.shape()[0], kh = w.shape()[2], kw = w.shape()[3];
  check(w.shape()[1] == C, "conv2d: channel mismatch " + shape_str(x.shape()) +
                               " vs " + shape_str(w.shape()));
  check(bias.shape()[0] == F, "conv2d: bias width mismatch " + shape_str(bias.shape()) +
                                  " vs " + shape_str(w.shape()));
  check(stride >= 1 && H >= kh && W >= kw,
        "conv2d: kernel " + shape_str(w.shape()) + " does not fit input " +
            shape_str(x.shape()));
  const int OH = (H - kh) / stride + 1;
  const int OW = (W - kw) / stride + 1;

  const auto& xv = x.values();
  const auto& wv = w.values();
  const auto& bv = bias.values();
  std::vector<double> out(static_cast<size_t>(B) * F * OH * OW);
  for (int b = 0; b < B; ++b)
    for (int f = 0; f < F; ++f)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          double acc = bv[f];
          for (int c = 0; c < C; ++c) {
            const double* xin = &xv[((static_cast<size_t>(b) * C + c) * H +
                                     oh * stride) * W + ow * stride];
            const double* ker = &wv[(static_cast<size_t>(f) * C + c) * kh * kw];
            for (int i = 0; i < kh; ++i)
              for (int j = 0; j < kw; ++j) acc += xin[i * W + j] * ker[i * kw + j];
          }
          out[((static_cast<size_t>(b) * F + f) * OH + oh) * OW + ow] = acc;
        }

  auto xn = x.share_node();
  auto wn = w.share_node();
  auto bn = bias.share_node();
  auto bwd = [xn, wn, bn, B, C, H, W, F, kh, kw, OH, OW, stride](detail::TensorNode& self) {
    const auto& g = self.grad;
    std::vector<double>* gx = xn->requires_grad ? &grad_buffer(*xn) : nullptr;
    std::vector<double>* gw = wn->requires_grad ? &grad_buffer(*wn) : nullptr;
    std::vector<double>* gb = bn->requires_grad ? &grad_buffer(*bn) : nullptr;
    for (int b = 0; b < B; ++b)
      for (int f = 0; f < F; ++f)
        for (int oh = 0; oh < OH; ++oh)
          for (int ow = 0; ow < OW; ++ow) {
            const double go = g[((static_cast<size_t>(b) * F + f) * OH + oh) * OW + ow];
            if (go == 0.0) continue;
            if (gb) (*gb)[f] += go;
            for (int c = 0; c < C; ++c) {
              const size_t xbase = ((static_cast<size_t>(b) * C + c) * H +
                                    oh * stride) * W + ow * stride;
              const size_t wbase = (static_cast<size_t>(f) * C + c) * kh * kw;
              for (int i = 0; i < kh; ++i)
                for (int j = 0; j < kw; ++j) {
                  if (gw) (*gw)[wbase + i * kw + j] += go * xn->values[xbase + i * W + j];
                  if (gx) (*gx)[xbase + i * W + j] += go * wn->values[wbase + i * kw + j];
                }
            }
          }
  };
  return make_op_output({B, F, OH, OW}, std::move(out), {x, w, bias}, std::move(bwd));
}

namespace {

void check_pool_args(const Tensor& x, int window, int stride) {
  check(x.rank() == 4, "pool: expected [B,C,H,W], got " + shape_str(x.shape()));
  check(window >= 1 && stride >= 1 && x.shape()[2] >= window && x.shape()[3] >= window,
        "pool: window " + std::to_string(window) + " does not fit input " +
            shape_str(x.shape()));
}

}  // namespace

Tensor max_pool2d(const Tensor& x, int window, int stride) {
  check_pool_args(x, window, stride);
  const int B = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const int OH = (H - window) / stride + 1;
  const int OW = (W - window) / stride + 1;
  const auto& xv = x.values();
  std::vector<double> out(static_cast<size_t>(B) * C * OH * OW);
  auto argmax = std::make_shared<std::vector<size_t>>(out.size());
  size_t o = 0;
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow, ++o) {
          const size_t base = ((static_cast<size_t>(b) * C + c) * H + oh * stride) * W +
                              ow * stride;
          double best = xv[base];
          size_t best_idx = base;
          for (int i = 0; i < window; ++i)
            for (int j = 0; j < window; ++j) {
              const size_t idx = base + static_cast<size_t>(i) * W + j;
              if (xv[idx] > best) {
                best = xv[idx];
                best_idx = idx;
              }
            }
          out[o] = best;
          (*argmax)[o] = best_idx;
        }
  auto xn = x.share_node();
  return make_op_output({B, C, OH, OW}, std::move(out), {x},
                        [xn, argmax](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          for (size_t i = 0; i < self.grad.size(); ++i)
                            gx[(*argmax)[i]] += self.grad[i];
                        });
}

Tensor avg_pool2d(const Tensor& x, int window, int stride) {
  check_pool_args(x, window, stride);
  const int B = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
  const int OH = (H - window) / stride + 1;
  const int OW = (W - window) / stride + 1;
  const double inv = 1.0 / (window * window);
  const auto& xv = x.values();
  std::vector<double> out(static_cast<size_t>(B) * C * OH * OW);
  size_t o = 0;
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow, ++o) {
          const size_t base = ((static_cast<size_t>(b) * C + c) * H + oh * stride) * W +
                              ow * stride;
          double acc = 0.0;
          for (int i = 0; i < window; ++i)
            for (int j = 0; j < window; ++j) acc += xv[base + static_cast<size_t>(i) * W + j];
          out[o] = acc * inv;
        }
  auto xn = x.share_node();
  return make_op_output({B, C, OH, OW}, std::move(out), {x},
                        [xn, B, C, H, W, OH, OW, window, stride, inv](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          size_t o = 0;
                          for (int b = 0; b < B; ++b)
                            for (int c = 0; c < C; ++c)
                              for (int oh = 0; oh < OH; ++oh)
                                for (int ow = 0; ow < OW; ++ow, ++o) {
                                  const double go = self.grad[o] * inv;
                                  const size_t base =
                                      ((static_cast<size_t>(b) * C + c) * H + oh * stride) * W +
                                      ow * stride;
                                  for (int i = 0; i < window; ++i)
                                    for (int j = 0; j < window; ++j)
                                      gx[base + static_cast<size_t>(i) * W + j] += go;
                                }
                        });
}

Tensor flatten(const Tensor& x) {
  check(x.rank() >= 1, "flatten: expected rank >= 1, got " + shape_str(x.shape()));
  const int B = x.shape()[0];
  const int rest = static_cast<int>(x.size() / std::max(B, 1));
  auto xn = x.share_node();
  return make_op_output({B, rest}, x.values(), {x},
                        [xn](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          for (size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
                        });
}

namespace {

// Returns row-wise log softmax values for a [B,K] tensor.
std::vector<double> log_softmax_values(const Tensor& x) {
  const int B = x.shape()[0], K = x.shape()[1];
  const auto& xv = x.values();
  std::vector<double> out(xv.size());
  for (int r = 0; r < B; ++r) {
    const double* row = &xv[static_cast<size_t>(r) * K];
    double mx = row[0];
    for (int c = 1; c < K; ++c) mx = std::max(mx, row[c]);
    double lse = 0.0;
    for (int c = 0; c < K; ++c) lse += std::exp(row[c] - mx);
    lse = std::log(lse) + mx;
    for (int c = 0; c < K; ++c) out[static_cast<size_t>(r) * K + c] = row[c] - lse;
  }
  return out;
}

void check_rows(const Tensor& x, const char* op) {
  check(x.rank() == 2, std::string(op) + ": expected [B,K], got " + shape_str(x.shape()));
}

}  // namespace

Tensor log_softmax(const Tensor& x) {
  check_rows(x, "log_softmax");
  const int B = x.shape()[0], K = x.shape()[1];
  std::vector<double> out = log_softmax_values(x);
  auto xn = x.share_node();
  auto out_copy = std::make_shared<std::vector<double>>(out);
  return make_op_output(x.shape(), std::move(out), {x},
                        [xn, out_copy, B, K](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          for (int r = 0; r < B; ++r) {
                            double gsum = 0.0;
                            for (int c = 0; c < K; ++c)
                              gsum += self.grad[static_cast<size_t>(r) * K + c];
                            for (int c = 0; c < K; ++c) {
                              const size_t i = static_cast<size_t>(r) * K + c;
                              gx[i] += self.grad[i] - std::exp((*out_copy)[i]) * gsum;
                            }
                          }
                        });
}

Tensor softmax(const Tensor& x) {
  check_rows(x, "softmax");
  const int B = x.shape()[0], K = x.shape()[1];
  std::vector<double> out = log_softmax_values(x);
  for (double& v : out) v = std::exp(v);
  auto xn = x.share_node();
  auto y = std::make_shared<std::vector<double>>(out);
  return make_op_output(x.shape(), std::move(out), {x},
                        [xn, y, B, K](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          for (int r = 0; r < B; ++r) {
                            double dot = 0.0;
                            for (int c = 0; c < K; ++c) {
                              const size_t i = static_cast<size_t>(r) * K + c;
                              dot += self.grad[i] * (*y)[i];
                            }
                            for (int c = 0; c < K; ++c) {
                              const size_t i = static_cast<size_t>(r) * K + c;
                              gx[i] += (*y)[i] * (self.grad[i] - dot);
                            }
                          }
                        });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  auto xn = x.share_node();
  return make_op_output({}, {acc}, {x},
                        [xn](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          for (double& g : gx) g += self.grad[0];
                        });
}

Tensor mean(const Tensor& x) {
  check(x.size() > 0, "mean of empty tensor");
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  const double inv = 1.0 / static_cast<double>(x.size());
  auto xn = x.share_node();
  return make_op_output({}, {acc * inv}, {x},
                        [xn, inv](detail::TensorNode& self) {
                          if (!xn->requires_grad) return;
                          auto& gx = grad_buffer(*xn);
                          for (double& g : gx) g += self.grad[0] * inv;
                        });
}

Tensor forward_op(const std::string& op_name, const std::vector<Tensor>& inputs,
                  const std::vector<int>& int_args) {
  auto arity = [&](size_t n) {
    check(inputs.size() == n, op_name + ": expected " + std::to_string(n) +
                                  " inputs, got " + std::to_string(inputs.size()));
  };
  auto args = [&](size_t n) {
    check(int_args.size() == n, op_name + ": expected " + std::to_string(n) +
                                    " int args, got " + std::to_string(int_args.size()));
  };
  if (op_name == "matmul") { arity(2); return matmul(inputs[0], inputs[1]); }
  if (op_name == "add") { arity(2); return add(inputs[0], inputs[1]); }
  if (op_name == "sub") { arity(2); return sub(inputs[0], inputs[1]); }
  if (op_name == "mul") { arity(2); return mul(inputs[0], inputs[1]); }
  if (op_name == "relu") { arity(1); return relu(inputs[0]); }
  if (op_name == "conv2d") { arity(3); args(1); return conv2d(inputs[0], inputs[1], inputs[2], int_args[0]); }
  if (op_name == "max_pool2d") { arity(1); args(2); return max_pool2d(inputs[0], int_args[0], int_args[1]); }
  if (op_name == "avg_pool2d") { arity(1); args(2); return avg_pool2d(inputs[0], int_args[0], int_args[1]); }
  if (op_name == "flatten") { arity(1); return flatten(inputs[0]); }
  if (op_name == "log_softmax") { arity(1); return log_softmax(inputs[0]); }
  if (op_name == "softmax") { arity(1); return softmax(inputs[0]); }
  if (op_name == "sum") { arity(1); return sum(inputs[0]); }
  if (op_name == "mean") { arity(1); return mean(inputs[0]); }
  fail("unknown op '" + op_name + "'");
}

}  // namespace altssl
