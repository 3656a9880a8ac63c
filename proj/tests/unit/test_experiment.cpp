#include "doctest.h"
#include "pathlift/errors.hpp"
#include "pathlift/experiment.hpp"

using namespace pathlift;

namespace {

ExperimentConfig small(std::uint64_t seed) {
  ExperimentConfig c;
  c.seed = seed;
  c.train_size = 300;
  c.test_size = 200;
  c.widths = {2, 8, 8, 2};
  c.epochs = 20;
  c.rewind_epoch = 2;
  c.parallel = false;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  auto c = parse_experiment_config(R"({"seed": 4, "dataset": "xor", "epochs": 3, "rewind_epoch": 1})");
  CHECK(c.seed == 4);
  CHECK(c.dataset == Dataset::Xor);
  CHECK(c.epochs == 3);
  CHECK(c.train_size == 2000);
  CHECK_THROWS_AS(parse_experiment_config(R"({"epoch": 3})"), Error);
  auto back = parse_experiment_config(experiment_config_to_json(c));
  CHECK(back.dataset == Dataset::Xor);
  CHECK(back.epochs == 3);

  ExperimentConfig bad;
  bad.rewind_epoch = 500;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("datasets are deterministic") {
  auto a = make_dataset(small(3)), b = make_dataset(small(3));
  CHECK(a.train_x == b.train_x);
  CHECK(a.test_label == b.test_label);
  CHECK(a.train_x.size() == 300);
}

TEST_CASE("small experiment") {
  auto r = run_experiment(small(1));
  REQUIRE(r.arms.size() == 4);
  CHECK(r.dense_test_accuracy > 0.7);
  for (const auto& arm : r.arms) {
    if (arm.criterion == Criterion::PathMag && arm.rescaled) CHECK(arm.hamming_to_unrescaled == 0);
    CHECK(arm.pruned == r.arms[0].pruned);
  }
  auto again = run_experiment(small(1));
  for (std::size_t i = 0; i < r.arms.size(); ++i) {
    CHECK(again.arms[i].mask == r.arms[i].mask);
    CHECK(again.arms[i].test_accuracy == r.arms[i].test_accuracy);
  }
  CHECK(report_table(r).find("pathmag") != std::string::npos);
  CHECK(report_to_json(r).find("\"arms\"") != std::string::npos);
}

TEST_CASE("fraction zero reproduces the dense run") {
  auto c = small(2);
  c.prune_fraction = 0.0;
  auto r = run_experiment(c);
  for (const auto& arm : r.arms) {
    CHECK(arm.pruned == 0);
    CHECK(arm.test_accuracy == r.dense_test_accuracy);
  }
}
