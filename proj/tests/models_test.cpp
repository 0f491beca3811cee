#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "altssl/losses.hpp"
#include "altssl/model.hpp"
#include "altssl/optimizer.hpp"

using namespace altssl;

namespace {

Tensor random_batch(int n, int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(static_cast<size_t>(n) * dim);
  for (double& x : v) x = rng.uniform(-1, 1);
  return Tensor::from_values({n, dim}, std::move(v));
}

// A few optimizer steps on a synthetic target, exercising every trainable
// parameter.
void train_steps(Model& m, const Tensor& batch, int steps, double lr = 0.1) {
  for (int s = 0; s < steps; ++s) {
    LossValue loss = cross_entropy(m.forward(batch), std::vector<int>(batch.shape()[0], 1));
    backward(loss.value);
    auto named = m.trainable_parameters();
    std::vector<Tensor> params;
    for (auto& np : named) params.push_back(np.tensor);
    OptimizerState st = OptimizerState::create(lr, 0.0, params);
    nesterov_step(params, st);
  }
}

}  // namespace

TEST_CASE("build_mlp: shapes, parameter count, deterministic init") {
  Model m = build_mlp(2, {16, 16}, 2, 42);
  CHECK(m.num_blocks() == 2);
  CHECK(m.feature_dim() == 16);
  CHECK(m.num_classes() == 2);
  Tensor logits = m.forward(random_batch(5, 2, 7));
  CHECK(logits.shape() == Shape{5, 2});

  // head parameter count: 16*2 + 2 = 34
  int head_params = 0;
  for (const auto& np : m.parameters()) {
    if (np.name.rfind("head.", 0) == 0) head_params += static_cast<int>(np.tensor.size());
  }
  CHECK(head_params == 34);

  Model m2 = build_mlp(2, {16, 16}, 2, 42);
  for (size_t i = 0; i < m.parameters().size(); ++i) {
    CHECK(m.parameters()[i].tensor.values() == m2.parameters()[i].tensor.values());
  }
  Model m3 = build_mlp(2, {16, 16}, 2, 43);
  CHECK(m.parameters()[0].tensor.values() != m3.parameters()[0].tensor.values());

  CHECK_THROWS_AS(build_mlp(2, {}, 2, 1), std::invalid_argument);
}

TEST_CASE("build_small_cnn forward shape") {
  Model m = build_small_cnn(1, 28, 28, {8, 16}, 10, 3);
  CHECK(m.num_blocks() == 2);
  CHECK(m.feature_dim() == 16 * 5 * 5);
  Rng rng(5);
  std::vector<double> v(2 * 1 * 28 * 28);
  for (double& x : v) x = rng.uniform();
  Tensor logits = m.forward(Tensor::from_values({2, 1, 28, 28}, std::move(v)));
  CHECK(logits.shape() == Shape{2, 10});
}

TEST_CASE("forward: zero head gives zero logits; duplicated rows identical") {
  Model m = build_mlp(2, {8}, 3, 1);
  for (auto& np : m.parameters()) {
    if (np.name.rfind("head.", 0) == 0) {
      std::fill(np.tensor.mutable_values().begin(), np.tensor.mutable_values().end(), 0.0);
    }
  }
  Tensor batch = random_batch(4, 2, 9);
  Tensor logits = m.forward(batch);
  for (double v : logits.values()) CHECK(v == 0.0);

  Tensor dup = Tensor::from_values({2, 2}, {0.3, -0.4, 0.3, -0.4});
  Tensor out = build_mlp(2, {8}, 3, 2).forward(dup);
  for (int k = 0; k < 3; ++k) CHECK(out.values()[k] == out.values()[3 + k]);
}

TEST_CASE("forward rejects batch shape mismatch") {
  Model m = build_mlp(2, {8}, 2, 1);
  CHECK_THROWS_AS(m.forward(random_batch(3, 5, 1)), std::invalid_argument);
}

TEST_CASE("set_trainable: freeze contract under optimizer steps") {
  Model m = build_mlp(2, {8, 8}, 2, 10);
  CHECK_THROWS_AS(m.set_trainable(3), std::invalid_argument);
  CHECK_THROWS_AS(m.set_trainable(-1), std::invalid_argument);

  m.set_trainable(0);
  CHECK(m.trainable_parameters().size() == m.parameters().size());

  m.set_trainable(2);  // only head trainable
  CHECK(m.trainable_parameters().size() == 2);

  m.set_trainable(1);
  ModelState before = m.snapshot();
  train_steps(m, random_batch(6, 2, 3), 10);
  for (const auto& np : m.parameters()) {
    const Tensor* saved = before.find(np.name);
    REQUIRE(saved != nullptr);
    if (np.name.rfind("block0.", 0) == 0) {
      CHECK(np.tensor.values() == saved->values());  // bit-identical
    } else {
      CHECK(np.tensor.values() != saved->values());
    }
  }
}

TEST_CASE("snapshot/restore: bit-exact round trip, deep copy, mismatch rejected") {
  Model m = build_mlp(2, {8}, 2, 11);
  Tensor batch = random_batch(4, 2, 12);
  ModelState snap = m.snapshot();
  const std::vector<double> out_before = m.forward(batch).values();

  train_steps(m, batch, 5);
  CHECK(m.forward(batch).values() != out_before);
  // snapshot unaffected by the training above
  m.restore(snap);
  CHECK(m.forward(batch).values() == out_before);

  Model other = build_mlp(2, {9}, 2, 11);
  try {
    other.restore(snap);
    FAIL("restore accepted mismatched shapes");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("block0") != std::string::npos);
  }
}

TEST_CASE("swap_head: backbone untouched, width changes, seeded") {
  Model m = build_mlp(2, {8}, 4, 13);
  Tensor batch = random_batch(3, 2, 14);
  const std::vector<double> feat_before = m.features(batch).values();
  ModelState before = m.snapshot();

  m.swap_head(10, 99);
  CHECK(m.num_classes() == 10);
  CHECK(m.forward(batch).shape() == Shape{3, 10});
  CHECK(m.features(batch).values() == feat_before);
  for (const auto& np : m.parameters()) {
    if (np.name.rfind("block", 0) == 0) {
      CHECK(np.tensor.values() == before.find(np.name)->values());
    }
  }

  Model m2 = build_mlp(2, {8}, 4, 13);
  m2.swap_head(10, 99);
  for (size_t i = 0; i < m.parameters().size(); ++i)
    CHECK(m.parameters()[i].tensor.values() == m2.parameters()[i].tensor.values());

  CHECK_THROWS_AS(m.swap_head(1, 5), std::invalid_argument);
}

TEST_CASE("restore_backbone transfers across head widths") {
  Model pretext_model = build_mlp(2, {8}, 4, 17);
  Model task_model = build_mlp(2, {8}, 2, 18);
  Tensor batch = random_batch(3, 2, 19);
  task_model.restore_backbone(pretext_model.snapshot());
  CHECK(task_model.features(batch).values() == pretext_model.features(batch).values());
  CHECK(task_model.num_classes() == 2);
}

TEST_CASE("model state file round trip keeps forward outputs bit-identical") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "altssl_state.bin").string();
  Model m = build_small_cnn(1, 10, 10, {2, 3}, 4, 21);
  Rng rng(22);
  std::vector<double> v(2 * 1 * 10 * 10);
  for (double& x : v) x = rng.uniform();
  Tensor batch = Tensor::from_values({2, 1, 10, 10}, std::move(v));
  const std::vector<double> out = m.forward(batch).values();

  save_model_state(m.snapshot(), path);
  ModelState loaded = load_model_state(path);
  Model m2 = build_small_cnn(1, 10, 10, {2, 3}, 4, 99);
  m2.restore(loaded);
  CHECK(m2.forward(batch).values() == out);
  std::remove(path.c_str());
}

TEST_CASE("eval_accuracy and predict_classes") {
  Dataset d = make_two_moons({.n_per_class = 20, .noise_sigma = 0.05, .seed = 30});
  Model m = build_mlp(2, {8}, 2, 31);
  std::vector<int> preds = predict_classes(m, d.examples, 16);
  CHECK(preds.size() == 40);
  const double acc = eval_accuracy(m, d.examples, 16);
  int correct = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == d.examples[i].label) ++correct;
  CHECK(acc == doctest::Approx(correct / 40.0));
}
