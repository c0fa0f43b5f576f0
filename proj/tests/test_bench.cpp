#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "maze/bench/dataset.hpp"
#include "maze/bench/metrics.hpp"
#include "maze/bench/run_config.hpp"
#include "maze/bench/sweep.hpp"

using namespace maze;

TEST_CASE("blobs are reproducible, in range, and balanced") {
  DatasetSpec spec;
  spec.d = 16;
  spec.classes = 4;
  spec.n_train = 402;
  spec.n_test = 101;
  spec.seed = 9;
  Dataset a = make_dataset(spec);
  Dataset b = make_dataset(spec);
  CHECK((a.x_train - b.x_train).norm() == 0.0);
  CHECK(a.y_train == b.y_train);
  CHECK(a.x_train.maxCoeff() <= 1.0);
  CHECK(a.x_train.minCoeff() >= -1.0);
  std::vector<int> counts(4, 0);
  for (int y : a.y_train) ++counts[y];
  int lo = *std::min_element(counts.begin(), counts.end());
  int hi = *std::max_element(counts.begin(), counts.end());
  CHECK(hi - lo <= 1);
}

TEST_CASE("blobs with 4-sigma separation admit a near-perfect linear probe") {
  DatasetSpec spec;
  spec.sep = 4.0;
  spec.noise = 0.08;
  spec.center_box = 0.55;
  spec.d = 8;
  spec.classes = 2;
  spec.n_train = 800;
  spec.n_test = 400;
  spec.seed = 3;
  Dataset data = make_dataset(spec);
  TargetSpec probe;
  probe.hidden = {};  // single linear layer + softmax
  probe.epochs = 30;
  TrainedTarget t = train_target(probe, data, 1);
  CHECK(t.test_accuracy >= 0.99);
}

TEST_CASE("rings and grid reject unrepresentable class counts") {
  DatasetSpec rings;
  rings.kind = DataKind::Rings;
  rings.classes = 40;  // radius spacing below the noise scale
  rings.n_train = 80;
  rings.n_test = 80;
  CHECK_THROWS_AS(make_dataset(rings), std::invalid_argument);

  DatasetSpec grid;
  grid.kind = DataKind::Grid;
  grid.noise = 0.5;  // noise larger than a cell
  grid.classes = 9;
  CHECK_THROWS_AS(make_dataset(grid), std::invalid_argument);
}

TEST_CASE("normalized accuracy") {
  CHECK(normalized_accuracy(0.8985, 0.9226) == doctest::Approx(0.974).epsilon(1e-3));
  CHECK(normalized_accuracy(0.5, 0.5) == 1.0);
  CHECK(normalized_accuracy(0.0, 0.9) == 0.0);
  CHECK_THROWS_AS(normalized_accuracy(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("agreement rate: identical models agree everywhere") {
  Rng rng(5);
  Model m = make_mlp(6, {12}, 3, LayerKind::Relu, false, LayerKind::Softmax, rng);
  Mat x = rand_uniform(rng, 50, 6, -1.0, 1.0);
  CHECK(agreement_rate(m, m, x) == 1.0);
  CHECK_THROWS_AS(agreement_rate(m, m, Mat(0, 6)), std::invalid_argument);
}

TEST_CASE("agreement rate of a constant-class clone on balanced data is ~1/K") {
  DatasetSpec spec;
  spec.d = 6;
  spec.classes = 2;
  spec.n_train = 400;
  spec.n_test = 400;
  spec.seed = 12;
  Dataset data = make_dataset(spec);
  TargetSpec tspec;
  tspec.hidden = {16};
  tspec.epochs = 30;
  tspec.background_mix = 0.0;
  TrainedTarget target = train_target(tspec, data, 3);

  Model constant_clone;  // always predicts class 0
  Rng rng(1);
  Layer lin = Layer::linear(6, 2, rng);
  lin.W = Mat::Zero(6, 2);
  lin.b << 1.0, 0.0;
  constant_clone.layers.push_back(lin);
  constant_clone.layers.push_back(Layer::activation(LayerKind::Softmax));
  double agree = agreement_rate(constant_clone, target.model, data.x_test);
  CHECK(agree == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("run config parses files, rejects unknown keys, echoes canonically") {
  {
    std::ofstream f("cfg_test.txt");
    f << "# comment\n";
    f << "attack = noise\n";
    f << "budget = 4096\n";
    f << "B = 64\n";
    f << "dataset.kind = rings\n";
  }
  RunConfig cfg = RunConfig::from_file("cfg_test.txt");
  CHECK(cfg.attack == "noise");
  CHECK(cfg.atk.budget == 4096);
  CHECK(cfg.atk.batch == 64);
  CHECK(cfg.data.kind == DataKind::Rings);

  CHECK_THROWS_WITH_AS(cfg.apply("budgets", "1"),
                       doctest::Contains("budgets"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply("budget", "abc"), std::invalid_argument);

  cfg.write_echo("cfg_echo.txt");
  RunConfig back = RunConfig::from_file("cfg_echo.txt");
  CHECK(back.echo() == cfg.echo());
  CHECK(back.hash() == cfg.hash());
  std::remove("cfg_test.txt");
  std::remove("cfg_echo.txt");
}

TEST_CASE("sweep with one value and one repeat yields one row") {
  SweepSpec spec;
  spec.axis = "Q";
  spec.values = {"2048"};
  spec.repeats = 1;
  spec.base.data.d = 6;
  spec.base.data.classes = 2;
  spec.base.data.n_train = 200;
  spec.base.data.n_test = 100;
  spec.base.target.hidden = {16};
  spec.base.target.epochs = 20;
  spec.base.atk.latent_dim = 4;
  spec.base.atk.gen_hidden = {8};
  spec.base.atk.clone_hidden = {16};
  Report report = run_sweep(spec);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].status == "ok");
  CHECK(report.rows[0].final_q == 2048);
  CHECK(report.rows[0].value == "2048");
  report.write_csv("report_test.csv");
  CHECK(std::filesystem::exists("report_test.csv"));
  std::remove("report_test.csv");
}

TEST_CASE("sweep records failures without aborting") {
  SweepSpec spec;
  spec.axis = "Q";
  spec.values = {"0", "2048"};  // budget 0 is invalid and must fail that run
  spec.repeats = 1;
  spec.base.data.d = 6;
  spec.base.data.classes = 2;
  spec.base.data.n_train = 200;
  spec.base.data.n_test = 100;
  spec.base.target.hidden = {16};
  spec.base.target.epochs = 20;
  spec.base.atk.latent_dim = 4;
  spec.base.atk.gen_hidden = {8};
  spec.base.atk.clone_hidden = {16};
  Report report = run_sweep(spec);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].status == "failed");
  CHECK(report.rows[1].status == "ok");
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), std::invalid_argument);
}
