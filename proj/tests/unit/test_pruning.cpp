#include <random>

#include "doctest.h"
#include "pathlift/errors.hpp"
#include "pathlift/generators.hpp"
#include "pathlift/metrics.hpp"
#include "pathlift/pruning.hpp"
#include "pathlift/transforms.hpp"
#include "support.hpp"

using namespace pathlift;
using fixtures::all_close;
using fixtures::rel_close;

namespace {

// Path-Mag straight from the definition: mass of the paths using coordinate i,
// computed by the backward-recursion oracle on theta with i zeroed.
std::vector<double> oracle_path_mag(const Network& n) {
  const double full = fixtures::oracle_path_norm(n);
  std::vector<double> out;
  for (std::size_t i = 0; i < n.theta.size(); ++i) {
    auto t = n.theta;
    t[i] = 0.0;
    out.push_back(full - fixtures::oracle_path_norm({n.arch, t}));
  }
  return out;
}

Network scalar_model() {
  ArchitectureSpec s;
  s.neurons = {{"in", Activation::input()}, {"out", Activation::identity()}};
  s.edges = {{"in", "out"}};
  auto a = Architecture::validate(s);
  ParamVector t = ParamVector::zeros(a);
  t[0] = 2.0;
  return {std::move(a), std::move(t)};
}

}  // namespace

TEST_CASE("path-mag on the diamond by every method") {
  auto a = fixtures::net_a();
  std::vector<double> want{3, 2, 3, 2, 0, 0, 0};
  for (auto m : {PathMagMethod::Autodiff, PathMagMethod::PathNormDiff, PathMagMethod::BruteForce}) {
    auto s = path_mag_scores(a.arch, a.theta, m);
    CHECK(s.values == want);
    CHECK(s.criterion == Criterion::PathMag);
  }
  auto z = path_mag_scores(a.arch, ParamVector::zeros(a.arch));
  for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("three routes agree with each other and with the oracle") {
  std::mt19937_64 rng(83);
  for (int i = 0; i < 100; ++i) {
    auto n = random_dag(rng);
    auto ad = path_mag_scores(n.arch, n.theta, PathMagMethod::Autodiff).values;
    auto df = path_mag_scores(n.arch, n.theta, PathMagMethod::PathNormDiff).values;
    auto bf = path_mag_scores(n.arch, n.theta, PathMagMethod::BruteForce).values;
    CHECK(all_close(ad, bf, 1e-9, 1e-12));
    CHECK(all_close(df, bf, 1e-9, 1e-9));
    CHECK(all_close(bf, oracle_path_mag(n), 1e-9, 1e-9));
  }
}

TEST_CASE("path-mag is rescaling invariant") {
  std::mt19937_64 rng(89);
  for (int i = 0; i < 50; ++i) {
    auto n = random_dag(rng);
    auto t = rescale(n.arch, n.theta, random_rescaling(n.arch, rng(), RescalePreset::fixed(), true));
    CHECK(all_close(path_mag_scores(n.arch, t).values, path_mag_scores(n.arch, n.theta).values));
  }
}

TEST_CASE("baselines") {
  auto a = fixtures::net_a();
  auto m = baseline_scores(a.arch, a.theta, Criterion::Magnitude);
  CHECK(std::vector<double>(m.values.begin(), m.values.begin() + 4) == std::vector<double>{1, 2, 3, 1});

  auto s = scalar_model();
  Batch b{{{1.0}}, {{0.0}}};
  auto obd = baseline_scores(s.arch, s.theta, Criterion::ObdFd, &b);
  CHECK(obd.values[0] == doctest::Approx(2.0).epsilon(1e-6));

  BaselineOptions opt;
  opt.probes = 10000;
  opt.seed = 5;
  auto hut = baseline_scores(s.arch, s.theta, Criterion::ObdHutchinson, &b, opt);
  CHECK(std::abs(hut.values[0] - 2.0) <= 0.1);

  try {
    baseline_scores(s.arch, s.theta, Criterion::ObdFd);
    FAIL("expected MissingData");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingData);
  }
}

TEST_CASE("reverse hard thresholding") {
  auto a = fixtures::net_a();
  auto sc = path_mag_scores(a.arch, a.theta);
  PruneOptions edges;
  edges.edges_only = true;
  auto r = apply_prune(a.arch, a.theta, sc, PruneAmount::of_fraction(0.5), edges);
  CHECK(r.mask.pruned() == std::vector<CoordIndex>{1, 3});
  CHECK(r.theta[0] == 1.0);
  CHECK(r.theta[1] == 0.0);
  CHECK(r.theta[2] == 3.0);
  CHECK(r.theta[3] == 0.0);

  auto none = apply_prune(a.arch, a.theta, sc, PruneAmount::of_fraction(0.0));
  CHECK(none.mask == Mask(a.theta.size()));
  CHECK(none.theta == a.theta);

  ScoreVector flat{std::vector<double>(a.theta.size(), 1.0), Criterion::Magnitude, "test"};
  auto one = apply_prune(a.arch, a.theta, flat, PruneAmount::of_count(1));
  CHECK(one.mask.pruned() == std::vector<CoordIndex>{0});

  try {
    apply_prune(a.arch, a.theta, sc, PruneAmount::of_count(5), edges);
    FAIL("expected InfeasibleAmount");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InfeasibleAmount);
  }
  CHECK_THROWS_AS(apply_prune(a.arch, a.theta, sc, PruneAmount::of_fraction(1.5)), Error);
}

TEST_CASE("iterative pruning rescoring") {
  auto a = fixtures::net_a();
  PruneOptions it;
  it.edges_only = true;
  it.iterative = true;
  int calls = 0;
  it.rescore = [&](const ParamVector& t) {
    ++calls;
    return path_mag_scores(a.arch, t);
  };
  auto r = apply_prune(a.arch, a.theta, path_mag_scores(a.arch, a.theta), PruneAmount::of_count(2), it);
  CHECK(r.mask.pruned().size() == 2);
  CHECK(calls >= 1);
  // after removing in->h2, h2->out carries no mass and goes next
  CHECK(r.mask.pruned() == std::vector<CoordIndex>{1, 3});

  PruneOptions missing;
  missing.iterative = true;
  CHECK_THROWS_AS(apply_prune(a.arch, a.theta, path_mag_scores(a.arch, a.theta),
                              PruneAmount::of_count(1), missing),
                  Error);
}

TEST_CASE("masks") {
  auto m = Mask::from_pruned(5, std::vector<CoordIndex>{1, 3});
  CHECK(m.keeps(0));
  CHECK_FALSE(m.keeps(1));
  CHECK(hamming_distance(m, Mask(5)) == 2);
  ParamVector t(std::vector<double>{1, 2, 3, 4, 5});
  CHECK(m.apply(t) == ParamVector(std::vector<double>{1, 0, 3, 0, 5}));
}

TEST_CASE("pruning error bound") {
  auto a = fixtures::net_a();
  auto m = Mask::from_pruned(a.theta.size(), std::vector<CoordIndex>{1, 3});
  auto b = pruning_error_bound(a.arch, a.theta, m, std::vector<double>{1.0});
  CHECK(b.bound == 4.0);
  CHECK(b.empirical_lhs == 0.0);
  CHECK(b.holds);

  auto e = pruning_error_bound(a.arch, a.theta, Mask(a.theta.size()), std::vector<double>{1.0});
  CHECK(e.bound == 0.0);
  CHECK(e.empirical_lhs == 0.0);

  auto tight = pruning_error_bound(a.arch, a.theta, Mask::from_pruned(a.theta.size(), std::vector<CoordIndex>{2}),
                                   std::vector<double>{2.0});
  CHECK(tight.bound == 6.0);
  CHECK(tight.empirical_lhs == 6.0);
  CHECK(tight.holds);

  std::mt19937_64 rng(97);
  for (int i = 0; i < 300; ++i) {
    auto n = random_dag(rng);
    auto mask = random_mask(n.theta.size(), rng);
    auto r = pruning_error_bound(n.arch, n.theta, mask, random_input(n.arch, rng));
    CHECK(r.holds);
  }
}

TEST_CASE("name parsing") {
  CHECK(parse_criterion("pathmag") == Criterion::PathMag);
  CHECK(parse_criterion("obd") == Criterion::ObdFd);
  CHECK(parse_criterion("obd-hutchinson") == Criterion::ObdHutchinson);
  CHECK(parse_method("diff") == PathMagMethod::PathNormDiff);
  CHECK(parse_method("brute") == PathMagMethod::BruteForce);
  CHECK_THROWS_AS(parse_criterion("random"), Error);
}
