#include "altssl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

namespace altssl {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void io_fail(const std::string& msg) { throw std::runtime_error(msg); }

uint32_t read_be_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) io_fail("truncated IDX file: " + path);
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

void write_be_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset make_two_moons(const TwoMoonsConfig& config) {
  if (config.n_per_class < 1) {
    throw std::invalid_argument("two moons: n_per_class must be >= 1");
  }
  if (config.noise_sigma < 0.0) {
    throw std::invalid_argument("two moons: noise_sigma must be >= 0");
  }
  Rng angle_rng(derive_seed(config.seed, 0x6d6f6f6e));
  Rng noise_rng(derive_seed(config.seed, 0x6e6f6973));
  Dataset d;
  d.num_classes = 2;
  d.feature_shape = {2};
  d.examples.reserve(static_cast<size_t>(config.n_per_class) * 2);
  int id = 0;
  for (int cls = 0; cls < 2; ++cls) {
    for (int i = 0; i < config.n_per_class; ++i) {
      const double t = angle_rng.uniform(0.0, kPi);
      double x, y;
      if (cls == 0) {
        x = std::cos(t);
        y = std::sin(t);
      } else {
        x = 1.0 - std::cos(t);
        y = 0.5 - std::sin(t);
      }
      if (config.noise_sigma > 0.0) {
        x += noise_rng.normal(0.0, config.noise_sigma);
        y += noise_rng.normal(0.0, config.noise_sigma);
      }
      d.examples.push_back({Tensor::from_values({2}, {x, y}), cls, id++});
    }
  }
  return d;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) io_fail("cannot open IDX image file: " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) io_fail("cannot open IDX label file: " + labels_path);

  const uint32_t img_magic = read_be_u32(img, images_path);
  if (img_magic != 0x00000803u) {
    io_fail("bad IDX image magic " + std::to_string(img_magic) + " in " + images_path +
            " (expected " + std::to_string(0x00000803u) + ")");
  }
  const uint32_t n_images = read_be_u32(img, images_path);
  const uint32_t rows = read_be_u32(img, images_path);
  const uint32_t cols = read_be_u32(img, images_path);

  const uint32_t lab_magic = read_be_u32(lab, labels_path);
  if (lab_magic != 0x00000801u) {
    io_fail("bad IDX label magic " + std::to_string(lab_magic) + " in " + labels_path +
            " (expected " + std::to_string(0x00000801u) + ")");
  }
  const uint32_t n_labels = read_be_u32(lab, labels_path);
  if (n_images != n_labels) {
    io_fail("IDX count mismatch: " + std::to_string(n_images) + " images vs " +
            std::to_string(n_labels) + " labels");
  }

  Dataset d;
  d.feature_shape = {1, static_cast<int>(rows), static_cast<int>(cols)};
  d.num_classes = 10;
  d.examples.reserve(n_images);
  const size_t pixels = static_cast<size_t>(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  for (uint32_t i = 0; i < n_images; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
      io_fail("truncated IDX image data in " + images_path);
    }
    char label_byte;
    if (!lab.read(&label_byte, 1)) io_fail("truncated IDX label data in " + labels_path);
    std::vector<double> values(pixels);
    for (size_t p = 0; p < pixels; ++p) values[p] = buf[p] / 255.0;
    d.examples.push_back(
        {Tensor::from_values(d.feature_shape, std::move(values)),
         static_cast<int>(static_cast<unsigned char>(label_byte)), static_cast<int>(i)});
  }
  return d;
}

void write_idx(const std::vector<std::vector<uint8_t>>& images, int rows, int cols,
               const std::vector<uint8_t>& labels, const std::string& images_path,
               const std::string& labels_path) {
  if (images.size() != labels.size()) {
    throw std::invalid_argument("write_idx: " + std::to_string(images.size()) + " images vs " +
                                std::to_string(labels.size()) + " labels");
  }
  std::ofstream img(images_path, std::ios::binary);
  if (!img) io_fail("cannot write IDX image file: " + images_path);
  write_be_u32(img, 0x00000803u);
  write_be_u32(img, static_cast<uint32_t>(images.size()));
  write_be_u32(img, static_cast<uint32_t>(rows));
  write_be_u32(img, static_cast<uint32_t>(cols));
  const size_t pixels = static_cast<size_t>(rows) * cols;
  for (const auto& im : images) {
    if (im.size() != pixels) io_fail("write_idx: image byte count does not match rows*cols");
    img.write(reinterpret_cast<const char*>(im.data()), static_cast<std::streamsize>(pixels));
  }
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) io_fail("cannot write IDX label file: " + labels_path);
  write_be_u32(lab, 0x00000801u);
  write_be_u32(lab, static_cast<uint32_t>(labels.size()));
  lab.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

SemiSplit::SemiSplit(std::vector<Example> labeled, std::vector<Example> unlabeled,
                     std::unordered_map<int, int> hidden_truth, int labels_per_class,
                     uint64_t seed)
    : labeled_(std::move(labeled)),
      unlabeled_(std::move(unlabeled)),
      hidden_truth_(std::move(hidden_truth)),
      labels_per_class_(labels_per_class),
      seed_(seed) {}

int SemiSplit::eval_only_hidden_label(int id) const {
  auto it = hidden_truth_.find(id);
  if (it == hidden_truth_.end()) {
    throw std::invalid_argument("no hidden label for id " + std::to_string(id));
  }
  return it->second;
}

SemiSplit semi_split(const Dataset& dataset, int labels_per_class, uint64_t seed) {
  if (labels_per_class < 1) {
    throw std::invalid_argument("semi_split: labels_per_class must be >= 1");
  }
  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    const Example& e = dataset.examples[i];
    if (e.label == kNoLabel) {
      throw std::invalid_argument("semi_split: source example " + std::to_string(e.id) +
                                  " has no label");
    }
    by_class[e.label].push_back(i);
  }
  std::vector<bool> selected(dataset.examples.size(), false);
  for (auto& [cls, indices] : by_class) {
    if (static_cast<int>(indices.size()) < labels_per_class) {
      throw std::invalid_argument("semi_split: class " + std::to_string(cls) + " has only " +
                                  std::to_string(indices.size()) + " examples, need " +
                                  std::to_string(labels_per_class));
    }
    Rng rng(derive_seed(seed, 0x73706c69 + static_cast<uint64_t>(cls)));
    rng.shuffle(indices);
    for (int i = 0; i < labels_per_class; ++i) selected[indices[static_cast<size_t>(i)]] = true;
  }
  std::vector<Example> labeled;
  std::vector<Example> unlabeled;
  std::unordered_map<int, int> hidden;
  for (size_t i = 0; i < dataset.examples.size(); ++i) {
    const Example& e = dataset.examples[i];
    if (selected[i]) {
      labeled.push_back(e);
    } else {
      hidden[e.id] = e.label;
      unlabeled.push_back({e.features, kNoLabel, e.id});
    }
  }
  return SemiSplit(std::move(labeled), std::move(unlabeled), std::move(hidden),
                   labels_per_class, seed);
}

namespace {

// One counterclockwise quarter turn: out(i, j) = in(j, W-1-i).
Tensor rotate_once(const Tensor& image) {
  const Shape& s = image.shape();
  const int C = s[0], H = s[1], W = s[2];
  std::vector<double> out(image.values().size());
  for (int c = 0; c < C; ++c) {
    const size_t in_base = static_cast<size_t>(c) * H * W;
    const size_t out_base = static_cast<size_t>(c) * W * H;
    for (int i = 0; i < W; ++i)
      for (int j = 0; j < H; ++j)
        out[out_base + static_cast<size_t>(i) * H + j] =
            image.values()[in_base + static_cast<size_t>(j) * W + (W - 1 - i)];
  }
  return Tensor::from_values({C, W, H}, std::move(out));
}

}  // namespace

Tensor rotate90(const Tensor& image, int k) {
  if (k < 0 || k > 3) {
    throw std::invalid_argument("rotate90: k must be in 0..3, got " + std::to_string(k));
  }
  if (image.rank() != 3) {
    throw std::invalid_argument("rotate90: expected [C,H,W], got " + shape_str(image.shape()));
  }
  if ((k % 2 == 1) && image.shape()[1] != image.shape()[2]) {
    throw std::invalid_argument("rotate90: odd turns need square images, got " +
                                shape_str(image.shape()));
  }
  Tensor out = image;
  for (int i = 0; i < k; ++i) out = rotate_once(out);
  return out;
}

SubsetSplit sample_subset(std::span<const Example> unlabeled, double fraction, Rng& rng) {
  if (unlabeled.empty()) {
    throw std::invalid_argument("sample_subset: empty unlabeled set");
  }
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("sample_subset: fraction must be in (0,1], got " +
                                std::to_string(fraction));
  }
  const size_t n = unlabeled.size();
  const size_t m = static_cast<size_t>(std::floor(fraction * static_cast<double>(n)));
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<size_t> active_idx(order.begin(), order.begin() + static_cast<long>(m));
  std::vector<size_t> held_idx(order.begin() + static_cast<long>(m), order.end());
  std::sort(active_idx.begin(), active_idx.end());
  std::sort(held_idx.begin(), held_idx.end());
  SubsetSplit out;
  out.active.reserve(m);
  out.held_out.reserve(n - m);
  for (size_t i : active_idx) out.active.push_back(unlabeled[i]);
  for (size_t i : held_idx) out.held_out.push_back(unlabeled[i]);
  return out;
}

ChannelStats compute_channel_stats(std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("channel stats of empty set");
  if (examples.front().features.rank() != 3) {
    throw std::invalid_argument("channel stats need [C,H,W] features, got " +
                                shape_str(examples.front().features.shape()));
  }
  const int C = examples.front().features.shape()[0];
  const size_t per_channel = examples.front().features.values().size() / static_cast<size_t>(C);
  ChannelStats stats;
  stats.mean.assign(C, 0.0);
  stats.stddev.assign(C, 0.0);
  const double count = static_cast<double>(per_channel * examples.size());
  for (const Example& e : examples) {
    for (int c = 0; c < C; ++c) {
      const double* v = &e.features.values()[static_cast<size_t>(c) * per_channel];
      for (size_t p = 0; p < per_channel; ++p) stats.mean[c] += v[p];
    }
  }
  for (int c = 0; c < C; ++c) stats.mean[c] /= count;
  for (const Example& e : examples) {
    for (int c = 0; c < C; ++c) {
      const double* v = &e.features.values()[static_cast<size_t>(c) * per_channel];
      for (size_t p = 0; p < per_channel; ++p) {
        const double d = v[p] - stats.mean[c];
        stats.stddev[c] += d * d;
      }
    }
  }
  for (int c = 0; c < C; ++c) {
    stats.stddev[c] = std::sqrt(stats.stddev[c] / count);
    if (stats.stddev[c] == 0.0) stats.stddev[c] = 1.0;
  }
  return stats;
}

void apply_normalization(Dataset& dataset, const ChannelStats& stats) {
  for (Example& e : dataset.examples) {
    const int C = e.features.shape()[0];
    const size_t per_channel = e.features.values().size() / static_cast<size_t>(C);
    std::vector<double>& v = e.features.mutable_values();
    for (int c = 0; c < C; ++c)
      for (size_t p = 0; p < per_channel; ++p) {
        const size_t i = static_cast<size_t>(c) * per_channel + p;
        v[i] = (v[i] - stats.mean[c]) / stats.stddev[c];
      }
  }
}

Tensor stack_features(std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("stack_features: empty batch");
  const Shape& fs = batch.front().features.shape();
  Shape out_shape;
  out_shape.push_back(static_cast<int>(batch.size()));
  out_shape.insert(out_shape.end(), fs.begin(), fs.end());
  std::vector<double> values;
  values.reserve(static_cast<size_t>(shape_size(out_shape)));
  for (const Example& e : batch) {
    if (e.features.shape() != fs) {
      throw std::invalid_argument("stack_features: mixed feature shapes " + shape_str(fs) +
                                  " and " + shape_str(e.features.shape()));
    }
    values.insert(values.end(), e.features.values().begin(), e.features.values().end());
  }
  return Tensor::from_values(std::move(out_shape), std::move(values));
}

namespace {

// Seven-segment glyph masks. Segment order: A top, B top-right, C
// bottom-right, D bottom, E bottom-left, F top-left, G middle.
constexpr uint8_t kDigitSegments[10] = {
    0b0111111,  // 0: A B C D E F
    0b0000110,  // 1: B C
    0b1011011,  // 2: A B D E G
    0b1001111,  // 3: A B C D G
    0b1100110,  // 4: B C F G
    0b1101101,  // 5: A C D F G
    0b1111101,  // 6: A C D E F G
    0b0000111,  // 7: A B C
    0b1111111,  // 8: all
    0b1101111,  // 9: A B C D F G
};

void fill_rect(std::vector<double>& img, int x0, int y0, int x1, int y1, double value) {
  for (int y = std::max(0, y0); y <= std::min(27, y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(27, x1); ++x)
      img[static_cast<size_t>(y) * 28 + x] = value;
}

std::vector<double> render_digit(int digit, int dx, int dy, double intensity) {
  std::vector<double> img(28 * 28, 0.0);
  const int x0 = 9 + dx, x1 = 18 + dx;
  const int y0 = 5 + dy, y1 = 22 + dy;
  const int ym = (y0 + y1) / 2;
  const int t = 2;
  const uint8_t seg = kDigitSegments[digit];
  if (seg & 0b0000001) fill_rect(img, x0, y0, x1, y0 + t - 1, intensity);          // A
  if (seg & 0b0000010) fill_rect(img, x1 - t + 1, y0, x1, ym, intensity);          // B
  if (seg & 0b0000100) fill_rect(img, x1 - t + 1, ym, x1, y1, intensity);          // C
  if (seg & 0b0001000) fill_rect(img, x0, y1 - t + 1, x1, y1, intensity);          // D
  if (seg & 0b0010000) fill_rect(img, x0, ym, x0 + t - 1, y1, intensity);          // E
  if (seg & 0b0100000) fill_rect(img, x0, y0, x0 + t - 1, ym, intensity);          // F
  if (seg & 0b1000000) fill_rect(img, x0, ym - t / 2, x1, ym + t / 2, intensity);  // G
  return img;
}

}  // namespace

void make_digit_bytes(int count, double pixel_noise, uint64_t seed,
                      std::vector<std::vector<uint8_t>>& images,
                      std::vector<uint8_t>& labels) {
  images.clear();
  labels.clear();
  images.reserve(static_cast<size_t>(count));
  labels.reserve(static_cast<size_t>(count));
  Rng rng(derive_seed(seed, 0x64696769));
  for (int i = 0; i < count; ++i) {
    const int digit = i % 10;
    const int dx = rng.uniform_int(5) - 2;
    const int dy = rng.uniform_int(5) - 2;
    const double intensity = rng.uniform(0.7, 1.0);
    std::vector<double> img = render_digit(digit, dx, dy, intensity);
    if (pixel_noise > 0.0) {
      for (double& v : img) v = std::clamp(v + rng.normal(0.0, pixel_noise), 0.0, 1.0);
    }
    std::vector<uint8_t> bytes(img.size());
    for (size_t p = 0; p < img.size(); ++p) {
      bytes[p] = static_cast<uint8_t>(std::lround(img[p] * 255.0));
    }
    images.push_back(std::move(bytes));
    labels.push_back(static_cast<uint8_t>(digit));
  }
}

Dataset make_digits(int count, double pixel_noise, uint64_t seed) {
  std::vector<std::vector<uint8_t>> images;
  std::vector<uint8_t> labels;
  make_digit_bytes(count, pixel_noise, seed, images, labels);
  Dataset d;
  d.num_classes = 10;
  d.feature_shape = {1, 28, 28};
  d.examples.reserve(images.size());
  for (size_t i = 0; i < images.size(); ++i) {
    std::vector<double> values(images[i].size());
    for (size_t p = 0; p < values.size(); ++p) values[p] = images[i][p] / 255.0;
    d.examples.push_back({Tensor::from_values(d.feature_shape, std::move(values)),
                          static_cast<int>(labels[i]), static_cast<int>(i)});
  }
  return d;
}

}  // namespace altssl
