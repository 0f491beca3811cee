#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "altssl/baselines.hpp"

using namespace altssl;

namespace {

constexpr double kExpMinus5 = 0.006737946999085467;  // exp(-5), frozen closed form

struct Moons {
  Dataset train;
  SemiSplit split;
  Model model;
  ModelState theta0;

  explicit Moons(uint64_t seed = 70) {
    train = make_two_moons({.n_per_class = 30, .noise_sigma = 0.1, .seed = seed});
    split = semi_split(train, 1, derive_seed(seed, 1));
    model = build_mlp(2, {16, 16}, 2, derive_seed(seed, 2));
    theta0 = model.snapshot();
  }
};

}  // namespace

TEST_CASE("ramp_weight: closed form at zero, saturation, degenerate length") {
  RampSchedule r{.ramp_length = 80, .max_weight = 2.0};
  CHECK(ramp_weight(0, r) == doctest::Approx(2.0 * kExpMinus5).epsilon(1e-12));
  CHECK(ramp_weight(80, r) == 2.0);
  CHECK(ramp_weight(200, r) == 2.0);
  RampSchedule flat{.ramp_length = 0, .max_weight = 3.0};
  CHECK(ramp_weight(0, flat) == 3.0);
  CHECK(ramp_weight(7, flat) == 3.0);
}

TEST_CASE("ramp_weight is monotone non-decreasing and bounded") {
  RampSchedule r{.ramp_length = 40, .max_weight = 1.5};
  double prev = -1.0;
  for (int e = 0; e <= 60; ++e) {
    const double w = ramp_weight(e, r);
    CHECK(w >= prev);
    CHECK(w <= 1.5);
    prev = w;
  }
}

TEST_CASE("labeled_only_train: separable points reach accuracy 1.0; epochs 0 no-op") {
  Moons m;
  labeled_only_train(m.model, m.theta0, m.split.labeled(), 100, 0.1, 0.9, 0);
  CHECK(eval_accuracy(m.model, m.split.labeled()) == 1.0);

  Moons fresh;
  ModelState before = fresh.model.snapshot();
  labeled_only_train(fresh.model, fresh.theta0, fresh.split.labeled(), 0, 0.1, 0.9, 0);
  for (const auto& np : fresh.model.parameters()) {
    CHECK(np.tensor.values() == before.find(np.name)->values());
  }

  std::vector<Example> empty;
  CHECK_THROWS_AS(labeled_only_train(m.model, m.theta0, empty, 5, 0.1, 0.9, 0),
                  std::invalid_argument);
}

TEST_CASE("labeled_only_train is deterministic and honors freezing") {
  Moons a(71), b(71);
  labeled_only_train(a.model, a.theta0, a.split.labeled(), 30, 0.1, 0.9, 1);
  labeled_only_train(b.model, b.theta0, b.split.labeled(), 30, 0.1, 0.9, 1);
  for (size_t i = 0; i < a.model.parameters().size(); ++i) {
    CHECK(a.model.parameters()[i].tensor.values() ==
          b.model.parameters()[i].tensor.values());
  }
  for (const auto& np : a.model.parameters()) {
    if (np.name.rfind("block0", 0) == 0) {
      CHECK(np.tensor.values() == a.theta0.find(np.name)->values());
    }
  }
}

TEST_CASE("pi_model: zero noise on a deterministic net gives a zero consistency term") {
  Moons m(72);
  RampSchedule ramp{.ramp_length = 0, .max_weight = 1.0};
  PiModelResult res = pi_model_train(m.model, m.split.labeled(), m.split.unlabeled(), 0.0,
                                     ramp, 3, 0.1, 0.9, 5);
  for (double v : res.epoch_loss_consistency) CHECK(v == 0.0);
}

TEST_CASE("pi_model with zero max weight matches labeled_only bit-exactly") {
  Moons a(73), b(73);
  RampSchedule zero{.ramp_length = 10, .max_weight = 0.0};
  pi_model_train(a.model, a.split.labeled(), a.split.unlabeled(), 0.05, zero, 20, 0.1, 0.9, 7);
  labeled_only_train(b.model, b.theta0, b.split.labeled(), 20, 0.1, 0.9, 0);
  for (size_t i = 0; i < a.model.parameters().size(); ++i) {
    CHECK(a.model.parameters()[i].tensor.values() ==
          b.model.parameters()[i].tensor.values());
  }
}

TEST_CASE("pi_model with an empty unlabeled set reduces to labeled_only bit-exactly") {
  Moons a(74), b(74);
  std::vector<Example> empty;
  RampSchedule ramp{.ramp_length = 10, .max_weight = 5.0};
  pi_model_train(a.model, a.split.labeled(), empty, 0.05, ramp, 15, 0.1, 0.9, 9);
  labeled_only_train(b.model, b.theta0, b.split.labeled(), 15, 0.1, 0.9, 0);
  for (size_t i = 0; i < a.model.parameters().size(); ++i) {
    CHECK(a.model.parameters()[i].tensor.values() ==
          b.model.parameters()[i].tensor.values());
  }
}

TEST_CASE("pi_model records one snapshot per epoch and a nonnegative consistency term") {
  Moons m(75);
  RampSchedule ramp{.ramp_length = 5, .max_weight = 2.0};
  PiModelResult res = pi_model_train(m.model, m.split.labeled(), m.split.unlabeled(), 0.1,
                                     ramp, 8, 0.1, 0.9, 11);
  CHECK(res.epoch_snapshots.size() == 8);
  CHECK(res.epoch_loss_labeled.size() == 8);
  for (double v : res.epoch_loss_consistency) CHECK(v >= 0.0);

  // snapshots restore: the last snapshot equals the final model
  Model probe = build_mlp(2, {16, 16}, 2, 1);
  probe.restore(res.epoch_snapshots.back());
  Tensor batch = stack_features(m.split.unlabeled());
  NoGradGuard ng;
  CHECK(probe.forward(batch).values() == m.model.forward(batch).values());
}
