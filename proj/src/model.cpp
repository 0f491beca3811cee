#include "altssl/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace altssl {

namespace {

Tensor he_uniform(Shape shape, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  std::vector<double> v(static_cast<size_t>(shape_size(shape)));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from_values(std::move(shape), std::move(v), true);
}

Tensor apply_layer(const Layer& layer, const Tensor& x) {
  return std::visit(
      [&x](const auto& l) -> Tensor {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Linear>) {
          return add(matmul(x, l.w), l.b);
        } else if constexpr (std::is_same_v<T, Conv2d>) {
          return conv2d(x, l.w, l.b, l.stride);
        } else if constexpr (std::is_same_v<T, Relu>) {
          return relu(x);
        } else {
          return max_pool2d(x, l.window, l.stride);
        }
      },
      layer);
}

void collect_params(const Block& block, const std::string& prefix,
                    std::vector<NamedParam>& out) {
  for (size_t i = 0; i < block.layers.size(); ++i) {
    const std::string base = prefix + "." + std::to_string(i);
    if (const auto* lin = std::get_if<Linear>(&block.layers[i])) {
      out.push_back({base + ".w", lin->w});
      out.push_back({base + ".b", lin->b});
    } else if (const auto* conv = std::get_if<Conv2d>(&block.layers[i])) {
      out.push_back({base + ".w", conv->w});
      out.push_back({base + ".b", conv->b});
    }
  }
}

}  // namespace

const Tensor* ModelState::find(const std::string& name) const {
  for (const auto& [n, t] : entries) {
    if (n == name) return &t;
  }
  return nullptr;
}

Model::Model(std::vector<Block> blocks, Linear head, Shape input_shape, int feature_dim)
    : blocks_(std::move(blocks)),
      head_(std::move(head)),
      input_shape_(std::move(input_shape)),
      feature_dim_(feature_dim) {}

Tensor Model::features(const Tensor& batch) const {
  Shape expected = input_shape_;
  expected.insert(expected.begin(), batch.shape().empty() ? 0 : batch.shape()[0]);
  if (batch.shape() != expected) {
    throw std::invalid_argument("forward: batch shape " + shape_str(batch.shape()) +
                                " does not match model input " + shape_str(expected));
  }
  Tensor x = batch;
  for (const Block& b : blocks_) {
    for (const Layer& l : b.layers) x = apply_layer(l, x);
  }
  if (x.rank() > 2) x = flatten(x);
  return x;
}

Tensor Model::forward(const Tensor& batch) const {
  return add(matmul(features(batch), head_.w), head_.b);
}

void Model::set_trainable(int frozen_block_count) {
  if (frozen_block_count < 0 || frozen_block_count > num_blocks()) {
    throw std::invalid_argument("set_trainable: frozen block count " +
                                std::to_string(frozen_block_count) + " out of range [0," +
                                std::to_string(num_blocks()) + "]");
  }
  frozen_blocks_ = frozen_block_count;
  // requires_grad mirrors trainability so backward skips frozen subgraphs
  std::vector<NamedParam> all = parameters();
  for (auto& np : all) {
    bool trainable = true;
    if (np.name.rfind("block", 0) == 0) {
      const int idx = std::stoi(np.name.substr(5, np.name.find('.') - 5));
      trainable = idx >= frozen_blocks_;
    }
    np.tensor.set_requires_grad(trainable);
  }
}

std::vector<NamedParam> Model::parameters() const {
  std::vector<NamedParam> out;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    collect_params(blocks_[i], "block" + std::to_string(i), out);
  }
  out.push_back({"head.w", head_.w});
  out.push_back({"head.b", head_.b});
  return out;
}

std::vector<NamedParam> Model::trainable_parameters() const {
  std::vector<NamedParam> out;
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (static_cast<int>(i) < frozen_blocks_) continue;
    collect_params(blocks_[i], "block" + std::to_string(i), out);
  }
  out.push_back({"head.w", head_.w});
  out.push_back({"head.b", head_.b});
  return out;
}

ModelState Model::snapshot() const {
  ModelState state;
  for (const auto& np : parameters()) {
    state.entries.emplace_back(np.name, np.tensor.detach_copy());
  }
  return state;
}

void Model::restore(const ModelState& state) {
  std::vector<NamedParam> params = parameters();
  std::vector<std::string> problems;
  for (const auto& np : params) {
    const Tensor* saved = state.find(np.name);
    if (saved == nullptr) {
      problems.push_back(np.name + " (missing from state)");
    } else if (saved->shape() != np.tensor.shape()) {
      problems.push_back(np.name + " (model " + shape_str(np.tensor.shape()) + ", state " +
                         shape_str(saved->shape()) + ")");
    }
  }
  if (state.entries.size() != params.size()) {
    problems.push_back("state has " + std::to_string(state.entries.size()) +
                       " entries, model has " + std::to_string(params.size()));
  }
  if (!problems.empty()) {
    std::string msg = "restore: mismatched parameters:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
  for (auto& np : params) {
    np.tensor.mutable_values() = state.find(np.name)->values();
  }
}

void Model::restore_backbone(const ModelState& state) {
  std::vector<std::string> problems;
  for (auto& np : parameters()) {
    if (np.name.rfind("block", 0) != 0) continue;
    const Tensor* saved = state.find(np.name);
    if (saved == nullptr) {
      problems.push_back(np.name + " (missing from state)");
    } else if (saved->shape() != np.tensor.shape()) {
      problems.push_back(np.name + " (model " + shape_str(np.tensor.shape()) + ", state " +
                         shape_str(saved->shape()) + ")");
    } else {
      np.tensor.mutable_values() = saved->values();
    }
  }
  if (!problems.empty()) {
    std::string msg = "restore_backbone: mismatched parameters:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
}

void Model::swap_head(int new_K, uint64_t seed) {
  if (new_K < 2) {
    throw std::invalid_argument("swap_head: need at least 2 classes, got " +
                                std::to_string(new_K));
  }
  Rng rng(derive_seed(seed, 0x68656164));
  head_ = make_linear(feature_dim_, new_K, rng);
}

Linear make_linear(int in_dim, int out_dim, Rng& rng) {
  Linear l;
  l.w = he_uniform({in_dim, out_dim}, in_dim, rng);
  l.b = Tensor::zeros({out_dim}, true);
  return l;
}

Conv2d make_conv(int in_channels, int out_channels, int kernel, int stride, Rng& rng) {
  Conv2d c;
  c.w = he_uniform({out_channels, in_channels, kernel, kernel},
                   in_channels * kernel * kernel, rng);
  c.b = Tensor::zeros({out_channels}, true);
  c.stride = stride;
  return c;
}

Model build_mlp(int input_dim, const std::vector<int>& hidden_dims, int num_classes,
                uint64_t seed) {
  if (input_dim < 1 || num_classes < 2) {
    throw std::invalid_argument("build_mlp: need input_dim >= 1 and num_classes >= 2");
  }
  if (hidden_dims.empty()) {
    throw std::invalid_argument("build_mlp: hidden_dims must not be empty");
  }
  Rng rng(derive_seed(seed, 0x6d6c70));
  std::vector<Block> blocks;
  int dim = input_dim;
  for (int h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("build_mlp: hidden dim must be >= 1");
    Block b;
    b.layers.push_back(make_linear(dim, h, rng));
    b.layers.push_back(Relu{});
    blocks.push_back(std::move(b));
    dim = h;
  }
  Linear head = make_linear(dim, num_classes, rng);
  return Model(std::move(blocks), std::move(head), {input_dim}, dim);
}

Model build_small_cnn(int in_channels, int image_h, int image_w,
                      const std::vector<int>& channels, int num_classes, uint64_t seed) {
  if (in_channels < 1 || image_h < 1 || image_w < 1 || num_classes < 2) {
    throw std::invalid_argument("build_small_cnn: invalid dimensions");
  }
  if (channels.empty()) {
    throw std::invalid_argument("build_small_cnn: channels must not be empty");
  }
  Rng rng(derive_seed(seed, 0x636e6e));
  std::vector<Block> blocks;
  int c = in_channels, h = image_h, w = image_w;
  for (int out_c : channels) {
    if (out_c < 1) throw std::invalid_argument("build_small_cnn: channel count must be >= 1");
    Block b;
    b.layers.push_back(make_conv(c, out_c, 3, 1, rng));
    b.layers.push_back(Relu{});
    b.layers.push_back(MaxPool2d{2, 2});
    blocks.push_back(std::move(b));
    c = out_c;
    h = (h - 3 + 1) / 2;  // conv3 then pool2
    w = (w - 3 + 1) / 2;
    if (h < 1 || w < 1) {
      throw std::invalid_argument("build_small_cnn: image too small for the block stack");
    }
  }
  const int feature_dim = c * h * w;
  Linear head = make_linear(feature_dim, num_classes, rng);
  return Model(std::move(blocks), std::move(head), {in_channels, image_h, image_w},
               feature_dim);
}

// ---- serialization ----

namespace {

void write_le_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_le_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error("truncated model state file: " + path);
  }
  return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

void write_le_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_le_f64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) {
    throw std::runtime_error("truncated model state file: " + path);
  }
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_model_state(const ModelState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model state: " + path);
  write_le_u32(out, static_cast<uint32_t>(state.entries.size()));
  for (const auto& [name, tensor] : state.entries) {
    write_le_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_le_u32(out, static_cast<uint32_t>(tensor.shape().size()));
    for (int d : tensor.shape()) write_le_u32(out, static_cast<uint32_t>(d));
    for (double v : tensor.values()) write_le_f64(out, v);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelState load_model_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model state: " + path);
  const uint32_t count = read_le_u32(in, path);
  ModelState state;
  state.entries.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    const uint32_t name_len = read_le_u32(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw std::runtime_error("truncated model state file: " + path);
    }
    const uint32_t rank = read_le_u32(in, path);
    Shape shape(rank);
    for (uint32_t d = 0; d < rank; ++d) shape[d] = static_cast<int>(read_le_u32(in, path));
    std::vector<double> values(static_cast<size_t>(shape_size(shape)));
    for (double& v : values) v = read_le_f64(in, path);
    state.entries.emplace_back(std::move(name),
                               Tensor::from_values(std::move(shape), std::move(values)));
  }
  return state;
}

std::vector<int> predict_classes(const Model& model, std::span<const Example> examples,
                                 int batch_size) {
  NoGradGuard ng;
  std::vector<int> out;
  out.reserve(examples.size());
  for (size_t start = 0; start < examples.size(); start += static_cast<size_t>(batch_size)) {
    const size_t n = std::min(static_cast<size_t>(batch_size), examples.size() - start);
    Tensor logits = model.forward(stack_features(examples.subspan(start, n)));
    const int k = logits.shape()[1];
    for (size_t r = 0; r < n; ++r) {
      const double* row = &logits.values()[r * static_cast<size_t>(k)];
      int best = 0;
      for (int c = 1; c < k; ++c) {
        if (row[c] > row[best]) best = c;  // ties keep the lowest index
      }
      out.push_back(best);
    }
  }
  return out;
}

double eval_accuracy(const Model& model, std::span<const Example> examples, int batch_size) {
  if (examples.empty()) throw std::invalid_argument("eval_accuracy: empty set");
  const std::vector<int> preds = predict_classes(model, examples, batch_size);
  int correct = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    if (preds[i] == examples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace altssl
