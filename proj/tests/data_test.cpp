#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "altssl/dataset.hpp"

using namespace altssl;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("two moons: noiseless class 0 lies on the upper unit circle") {
  Dataset d = make_two_moons({.n_per_class = 200, .noise_sigma = 0.0, .seed = 3});
  REQUIRE(d.examples.size() == 400);
  int class0 = 0;
  for (const Example& e : d.examples) {
    if (e.label != 0) continue;
    ++class0;
    const double x = e.features.values()[0];
    const double y = e.features.values()[1];
    CHECK(std::fabs(x * x + y * y - 1.0) < 1e-9);
    CHECK(y >= -1e-12);
  }
  CHECK(class0 == 200);
}

TEST_CASE("two moons: counts, determinism, unique stable ids") {
  Dataset a = make_two_moons({.n_per_class = 500, .noise_sigma = 0.1, .seed = 11});
  Dataset b = make_two_moons({.n_per_class = 500, .noise_sigma = 0.1, .seed = 11});
  REQUIRE(a.examples.size() == 1000);
  std::set<int> ids;
  for (size_t i = 0; i < a.examples.size(); ++i) {
    CHECK(a.examples[i].features.values() == b.examples[i].features.values());
    CHECK(a.examples[i].label == b.examples[i].label);
    ids.insert(a.examples[i].id);
  }
  CHECK(ids.size() == 1000);
  Dataset c = make_two_moons({.n_per_class = 500, .noise_sigma = 0.1, .seed = 12});
  CHECK(c.examples[0].features.values() != a.examples[0].features.values());
}

TEST_CASE("IDX loader: hand-written fixtures") {
  // 2 images of 3x3: magic 0x00000803, counts big-endian.
  std::vector<uint8_t> img = {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 3};
  for (int i = 0; i < 9; ++i) img.push_back(static_cast<uint8_t>(i * 10));
  for (int i = 0; i < 9; ++i) img.push_back(255);
  std::vector<uint8_t> lab = {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 5, 0};
  const std::string img_path = temp_path("altssl_idx_img");
  const std::string lab_path = temp_path("altssl_idx_lab");
  write_bytes(img_path, img);
  write_bytes(lab_path, lab);

  Dataset d = load_idx(img_path, lab_path);
  REQUIRE(d.examples.size() == 2);
  CHECK(d.feature_shape == Shape{1, 3, 3});
  CHECK(d.examples[0].label == 5);
  CHECK(d.examples[1].label == 0);
  CHECK(d.examples[0].features.values()[1] == doctest::Approx(10.0 / 255.0).epsilon(1e-12));
  CHECK(d.examples[1].features.values()[0] == 1.0);  // byte 255 -> 1.0
  CHECK(d.num_classes == 10);

  std::remove(img_path.c_str());
  std::remove(lab_path.c_str());
}

TEST_CASE("IDX loader: wrong magic and count mismatch are reported") {
  std::vector<uint8_t> img = {0x00, 0x00, 0x08, 0x04, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 7};
  std::vector<uint8_t> lab = {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 1, 3};
  const std::string img_path = temp_path("altssl_idx_img2");
  const std::string lab_path = temp_path("altssl_idx_lab2");
  write_bytes(img_path, img);
  write_bytes(lab_path, lab);
  try {
    load_idx(img_path, lab_path);
    FAIL("bad magic accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("2052") != std::string::npos);  // 0x00000804
  }

  img[3] = 0x03;
  write_bytes(img_path, img);
  std::vector<uint8_t> lab2 = {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 3, 4};
  write_bytes(lab_path, lab2);
  try {
    load_idx(img_path, lab_path);
    FAIL("count mismatch accepted");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("1") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
  std::remove(img_path.c_str());
  std::remove(lab_path.c_str());
}

TEST_CASE("IDX round-trip is byte-exact") {
  Rng rng(41);
  std::vector<std::vector<uint8_t>> images;
  std::vector<uint8_t> labels;
  for (int i = 0; i < 5; ++i) {
    std::vector<uint8_t> im(16);
    for (auto& b : im) b = static_cast<uint8_t>(rng.uniform_int(256));
    images.push_back(im);
    labels.push_back(static_cast<uint8_t>(rng.uniform_int(10)));
  }
  const std::string img_path = temp_path("altssl_idx_rt_img");
  const std::string lab_path = temp_path("altssl_idx_rt_lab");
  write_idx(images, 4, 4, labels, img_path, lab_path);
  Dataset d = load_idx(img_path, lab_path);
  REQUIRE(d.examples.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(d.examples[i].label == labels[i]);
    for (int p = 0; p < 16; ++p) {
      const double v = d.examples[i].features.values()[p];
      CHECK(static_cast<uint8_t>(std::lround(v * 255.0)) == images[i][p]);
    }
  }
  std::remove(img_path.c_str());
  std::remove(lab_path.c_str());
}

TEST_CASE("semi_split: stratified partition, determinism, firewall") {
  Dataset d = make_digits(300, 0.05, 5);
  SemiSplit s = semi_split(d, 10, 21);
  CHECK(s.labeled().size() == 100);
  CHECK(s.unlabeled().size() == 200);

  std::set<int> labeled_ids, unlabeled_ids;
  std::vector<int> per_class(10, 0);
  for (const Example& e : s.labeled()) {
    labeled_ids.insert(e.id);
    per_class[e.label]++;
  }
  for (const Example& e : s.unlabeled()) {
    unlabeled_ids.insert(e.id);
    CHECK(e.label == kNoLabel);  // labels hidden from training
  }
  for (int c = 0; c < 10; ++c) CHECK(per_class[c] == 10);
  for (int id : labeled_ids) CHECK(unlabeled_ids.count(id) == 0);
  CHECK(labeled_ids.size() + unlabeled_ids.size() == d.examples.size());

  // hidden truth matches the source dataset
  for (const Example& e : d.examples) {
    if (unlabeled_ids.count(e.id)) CHECK(s.eval_only_hidden_label(e.id) == e.label);
  }

  SemiSplit s2 = semi_split(d, 10, 21);
  for (size_t i = 0; i < s.labeled().size(); ++i)
    CHECK(s.labeled()[i].id == s2.labeled()[i].id);
}

TEST_CASE("semi_split: insufficient class members rejected naming the class") {
  Dataset d = make_digits(30, 0.05, 6);  // ~3 per class
  try {
    semi_split(d, 25, 1);
    FAIL("accepted oversized labeled request");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("class") != std::string::npos);
  }
}

TEST_CASE("semi_split partition invariants hold over 100 seeds") {
  Dataset d = make_two_moons({.n_per_class = 30, .noise_sigma = 0.1, .seed = 9});
  for (uint64_t seed = 0; seed < 100; ++seed) {
    SemiSplit s = semi_split(d, 3, seed);
    std::set<int> seen;
    for (const Example& e : s.labeled()) seen.insert(e.id);
    for (const Example& e : s.unlabeled()) {
      CHECK(seen.count(e.id) == 0);
      seen.insert(e.id);
    }
    CHECK(seen.size() == 60);
  }
}

TEST_CASE("rotate90: identity, composition, full turn, value multiset") {
  Rng rng(13);
  std::vector<double> v(2 * 5 * 5);
  for (double& x : v) x = rng.uniform();
  Tensor img = Tensor::from_values({2, 5, 5}, v);

  CHECK(rotate90(img, 0).values() == img.values());
  CHECK(rotate90(rotate90(img, 1), 1).values() == rotate90(img, 2).values());
  Tensor four = rotate90(rotate90(rotate90(rotate90(img, 1), 1), 1), 1);
  CHECK(four.values() == img.values());

  std::multiset<double> before(img.values().begin(), img.values().end());
  Tensor r = rotate90(img, 3);
  std::multiset<double> after(r.values().begin(), r.values().end());
  CHECK(before == after);

  CHECK_THROWS_AS(rotate90(img, 4), std::invalid_argument);
  CHECK_THROWS_AS(rotate90(img, -1), std::invalid_argument);
  Tensor rect = Tensor::zeros({1, 2, 3});
  CHECK_THROWS_AS(rotate90(rect, 1), std::invalid_argument);
  CHECK(rotate90(rect, 2).shape() == Shape{1, 2, 3});
}

TEST_CASE("rotate90 known 2x2 pattern") {
  // [[1,2],[3,4]] rotated CCW -> [[2,4],[1,3]]
  Tensor img = Tensor::from_values({1, 2, 2}, {1, 2, 3, 4});
  CHECK(rotate90(img, 1).values() == std::vector<double>{2, 4, 1, 3});
}

TEST_CASE("sample_subset sizes and partition") {
  Dataset d = make_two_moons({.n_per_class = 5, .noise_sigma = 0.0, .seed = 2});
  Rng rng(7);
  {
    auto [active, held] = sample_subset({d.examples.data(), 9}, 2.0 / 3.0, rng);
    CHECK(active.size() == 6);
    CHECK(held.size() == 3);
  }
  {
    auto [active, held] = sample_subset(d.examples, 2.0 / 3.0, rng);  // N=10
    CHECK(active.size() == 6);
    CHECK(held.size() == 4);
    std::set<int> ids;
    for (const Example& e : active) ids.insert(e.id);
    for (const Example& e : held) CHECK(ids.insert(e.id).second);
    CHECK(ids.size() == 10);
  }
  {
    auto [active, held] = sample_subset(d.examples, 1.0, rng);
    CHECK(active.size() == 10);
    CHECK(held.empty());
  }
  std::vector<Example> empty;
  CHECK_THROWS_AS(sample_subset(empty, 0.5, rng), std::invalid_argument);
}

TEST_CASE("sample_subset partition invariant over 100 seeds") {
  Dataset d = make_two_moons({.n_per_class = 20, .noise_sigma = 0.0, .seed = 2});
  for (uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    auto [active, held] = sample_subset(d.examples, 0.37, rng);
    CHECK(active.size() == static_cast<size_t>(std::floor(0.37 * 40)));
    CHECK(active.size() + held.size() == 40);
  }
}

TEST_CASE("channel stats and normalization") {
  Dataset d = make_digits(100, 0.05, 8);
  ChannelStats stats = compute_channel_stats(d.examples);
  REQUIRE(stats.mean.size() == 1);
  apply_normalization(d, stats);
  ChannelStats after = compute_channel_stats(d.examples);
  CHECK(std::fabs(after.mean[0]) < 1e-9);
  CHECK(after.stddev[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("stack_features shapes") {
  Dataset d = make_two_moons({.n_per_class = 3, .noise_sigma = 0.0, .seed = 1});
  Tensor batch = stack_features(d.examples);
  CHECK(batch.shape() == Shape{6, 2});
  Dataset imgs = make_digits(4, 0.0, 1);
  CHECK(stack_features(imgs.examples).shape() == Shape{4, 1, 28, 28});
}

TEST_CASE("make_digits: balanced-ish labels, deterministic, in range") {
  Dataset a = make_digits(200, 0.05, 3);
  Dataset b = make_digits(200, 0.05, 3);
  REQUIRE(a.examples.size() == 200);
  CHECK(a.num_classes == 10);
  for (size_t i = 0; i < a.examples.size(); ++i) {
    CHECK(a.examples[i].features.values() == b.examples[i].features.values());
    CHECK(a.examples[i].label >= 0);
    CHECK(a.examples[i].label < 10);
    for (double v : a.examples[i].features.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  // round-robin classes: exactly 20 of each
  std::vector<int> counts(10, 0);
  for (const Example& e : a.examples) counts[e.label]++;
  for (int c : counts) CHECK(c == 20);
}
