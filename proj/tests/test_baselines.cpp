#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maze/baselines.hpp"
#include "maze/bench/dataset.hpp"
#include "maze/bench/metrics.hpp"
#include "maze/losses.hpp"

using namespace maze;

namespace {

Model tiny_target(int d = 8, int k = 3, std::uint64_t seed = 5) {
  Rng rng(seed);
  return make_mlp(d, {16}, k, LayerKind::Relu, false, LayerKind::Softmax, rng);
}

AttackConfig small_cfg() {
  AttackConfig cfg;
  cfg.batch = 16;
  cfg.clone_hidden = {24};
  cfg.seed = 9;
  return cfg;
}

}  // namespace

TEST_CASE("jbda_augment: zero gradient leaves the input unchanged") {
  // W = 0 makes the clone output constant in x, so sign(0) = 0 applies
  Rng rng(1);
  Model clone;
  Layer lin = Layer::linear(2, 2, rng);
  lin.W = Mat::Zero(2, 2);
  clone.layers.push_back(lin);
  clone.layers.push_back(Layer::activation(LayerKind::Softmax));
  Mat x = Mat::Zero(3, 2);
  Mat out = jbda_augment(clone, x, {0, 1, 0}, 0.1);
  CHECK((out - x).norm() == 0.0);
}

TEST_CASE("jbda_augment: all-positive gradient at x=0 moves by +lambda") {
  // loss = -log softmax(x W)_y with W forcing sign(grad_x) = +1
  Rng rng(2);
  Model clone;
  Layer lin = Layer::linear(2, 2, rng);
  lin.W << -1.0, 1.0,
           -1.0, 1.0;  // logit difference decreases in every coordinate
  lin.b = Mat::Zero(1, 2);
  clone.layers.push_back(lin);
  clone.layers.push_back(Layer::activation(LayerKind::Softmax));
  Mat x = Mat::Zero(1, 2);
  Mat out = jbda_augment(clone, x, {0}, 0.1);
  CHECK(out(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("jbda_augment clips to the valid range") {
  Rng rng(2);
  Model clone;
  Layer lin = Layer::linear(2, 2, rng);
  lin.W << -1.0, 1.0,
           -1.0, 1.0;
  lin.b = Mat::Zero(1, 2);
  clone.layers.push_back(lin);
  clone.layers.push_back(Layer::activation(LayerKind::Softmax));
  Mat x = Mat::Constant(1, 2, 0.95);
  Mat out = jbda_augment(clone, x, {0}, 0.1);
  CHECK(out(0, 0) == 1.0);
  CHECK(out(0, 1) == 1.0);
}

TEST_CASE("jbda pool doubles every round and queries accordingly") {
  Model target = tiny_target(4, 2, 31);
  auto cfg = small_cfg();
  DatasetSpec dspec;
  dspec.d = 4;
  dspec.classes = 2;
  dspec.n_train = 64;
  dspec.n_test = 32;
  Dataset data = make_dataset(dspec);
  SeedSet seeds{data.x_train.topRows(10)};

  JbdaConfig jb;
  jb.rounds = 3;
  jb.epochs_per_round = 2;
  BlackBoxOracle oracle(target, 100000);
  EvalContext eval{data.x_test, data.y_test, 1.0};
  auto result = run_jbda(oracle, seeds, jb, cfg, eval);
  // pool after r rounds: 10 * 2^3 = 80; every point labeled exactly once
  CHECK(oracle.ledger().q == 80);

  JbdaConfig none;
  none.rounds = 0;
  none.epochs_per_round = 1;
  BlackBoxOracle oracle0(target, 100000);
  run_jbda(oracle0, seeds, none, cfg, eval);
  CHECK(oracle0.ledger().q == 10);  // seed labeling only
}

TEST_CASE("jbda stops cleanly when the budget runs out") {
  Model target = tiny_target(4, 2, 31);
  auto cfg = small_cfg();
  SeedSet seeds{Mat::Zero(10, 4)};
  JbdaConfig jb;
  jb.rounds = 6;
  jb.epochs_per_round = 1;
  BlackBoxOracle oracle(target, 35);  // seeds(10) + round1(10) fit; round2(20) does not
  auto result = run_jbda(oracle, seeds, jb, cfg, EvalContext{});
  CHECK(result.log.truncated);
  CHECK(oracle.ledger().q <= 35);
}

TEST_CASE("noise attack stays in range and drains the budget exactly") {
  Model target = tiny_target(6, 3, 33);
  auto cfg = small_cfg();
  cfg.budget = 64 * cfg.batch;
  cfg.checkpoint_every = 16;
  BlackBoxOracle oracle(target, cfg.budget);
  auto result = run_noise(oracle, cfg, EvalContext{});
  CHECK(oracle.ledger().q == cfg.budget);  // Q is a multiple of B
  CHECK_FALSE(result.log.truncated);
}

TEST_CASE("surrogate attack queries exactly the surrogate size") {
  Model target = tiny_target(6, 3, 34);
  auto cfg = small_cfg();
  Rng rng(35);
  Mat surrogate = rand_uniform(rng, 500, 6, -1.0, 1.0);
  SurrogateConfig sc;
  sc.epochs = 3;
  BlackBoxOracle oracle(target, 10000);
  run_surrogate(oracle, surrogate, sc, cfg, EvalContext{});
  CHECK(oracle.ledger().q == 500);

  BlackBoxOracle tight(target, 400);
  CHECK_THROWS_AS(run_surrogate(tight, surrogate, sc, cfg, EvalContext{}),
                  std::invalid_argument);
}

TEST_CASE("matched surrogate beats a mismatched one") {
  DatasetSpec dspec;
  dspec.d = 8;
  dspec.classes = 3;
  dspec.n_train = 1200;
  dspec.n_test = 400;
  dspec.seed = 6;
  Dataset data = make_dataset(dspec);
  TargetSpec tspec;
  tspec.hidden = {32};
  tspec.epochs = 40;
  tspec.background_mix = 0.0;
  TrainedTarget target = train_target(tspec, data, 7);
  EvalContext eval{data.x_test, data.y_test, target.test_accuracy};

  auto cfg = small_cfg();
  SurrogateConfig sc;
  sc.epochs = 30;

  // matched: the target's own training inputs (upper-bound sanity)
  BlackBoxOracle o1(target.model, 10000);
  auto matched = run_surrogate(o1, data.x_train, sc, cfg, eval);
  double acc_matched =
      model_accuracy(matched.clone, data.x_test, data.y_test);

  // mismatched: rings in the same space
  DatasetSpec rspec = dspec;
  rspec.kind = DataKind::Rings;
  rspec.noise = 0.08;
  rspec.seed = 8;
  Dataset rings = make_dataset(rspec);
  BlackBoxOracle o2(target.model, 10000);
  auto mismatched = run_surrogate(o2, rings.x_train, sc, cfg, eval);
  double acc_mis =
      model_accuracy(mismatched.clone, data.x_test, data.y_test);

  CHECK(acc_matched >= acc_mis);
  CHECK(acc_matched > 0.9);
}
