#include <random>

#include "doctest.h"
#include "pathlift/errors.hpp"
#include "pathlift/generators.hpp"
#include "pathlift/lipschitz.hpp"
#include "pathlift/transforms.hpp"
#include "support.hpp"

using namespace pathlift;
using fixtures::rel_close;

TEST_CASE("rhs on the pruning pair") {
  auto a = fixtures::net_a();
  auto p = fixtures::net_a(1, -2, 0, 1);
  std::vector<double> x{2.0};
  auto r = bound_rhs(a.arch, a.theta, p.theta, x, BoundVariant::Main);
  CHECK(r.value == 6.0);
  CHECK(r.source == MetricSource::Oracle);
  CHECK(bound_rhs(a.arch, a.theta, a.theta, x, BoundVariant::Main).value == 0.0);

  auto rep = verify_bound(a.arch, a.theta, p.theta, x, BoundVariant::Main);
  CHECK(rep.lhs == 6.0);
  CHECK(rep.rhs == 6.0);
  CHECK(rep.holds);
  CHECK(rep.slack == 0.0);
  auto same = verify_bound(a.arch, a.theta, a.theta, x, BoundVariant::Split);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
}

TEST_CASE("sign condition") {
  auto w = sign_counterexample();
  try {
    check_sign_condition(w.net.arch, w.net.theta, w.theta2);
    FAIL("expected SignConditionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SignConditionViolated);
    CHECK(std::string(e.what()).find("in->h") != std::string::npos);
  }
  CHECK_THROWS_AS(bound_rhs(w.net.arch, w.net.theta, w.theta2, w.x, BoundVariant::Main), Error);
}

TEST_CASE("counterexample values") {
  auto w = sign_counterexample();
  CHECK(w.path_metric == 0.0);
  CHECK(w.report.lhs == 1.0);
  CHECK(w.report.rhs == 0.0);
  CHECK_FALSE(w.report.holds);
  CHECK(sign_counterexample(-1.0).report.lhs == 1.0);
  CHECK(sign_counterexample(0.0).report.lhs == 0.0);
}

TEST_CASE("soundness on random same-sign pairs") {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 300; ++i) {
    auto n = random_dag(rng);
    auto t2 = same_sign_partner(n.theta, rng);
    auto x = random_input(n.arch, rng);
    CHECK(verify_bound(n.arch, n.theta, t2, x, BoundVariant::Main).holds);
    CHECK(verify_bound(n.arch, n.theta, t2, x, BoundVariant::Split).holds);
  }
}

TEST_CASE("rhs invariant under independent rescalings") {
  std::mt19937_64 rng(73);
  for (int i = 0; i < 100; ++i) {
    auto n = random_dag(rng);
    auto t2 = same_sign_partner(n.theta, rng);
    auto x = random_input(n.arch, rng);
    auto a = rescale(n.arch, n.theta, random_rescaling(n.arch, rng(), RescalePreset::fixed(), true));
    auto b = rescale(n.arch, t2, random_rescaling(n.arch, rng(), RescalePreset::fixed(), true));
    for (auto v : {BoundVariant::Main, BoundVariant::Split}) {
      CHECK(rel_close(bound_rhs(n.arch, a, b, x, v).value, bound_rhs(n.arch, n.theta, t2, x, v).value));
    }
  }
}

TEST_CASE("trajectory points") {
  ParamVector a(std::vector<double>{1.0, -2.0, 0.0});
  ParamVector b(std::vector<double>{4.0, -8.0, 0.0});
  auto m = trajectory_point(a, b, 0.5);
  CHECK(m[0] == doctest::Approx(2.0));
  CHECK(m[1] == doctest::Approx(-4.0));
  CHECK(m[2] == 0.0);
  CHECK(trajectory_point(a, b, 0.0) == a);
  CHECK(trajectory_point(a, b, 1.0) == b);

  ParamVector mixed(std::vector<double>{1.0, 0.0, 0.0});
  ParamVector other(std::vector<double>{1.0, -1.0, 0.0});
  try {
    trajectory_point(mixed, other, 0.5);
    FAIL("expected MixedZeroCoordinate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MixedZeroCoordinate);
  }
  ParamVector flip(std::vector<double>{-1.0, -2.0, 0.0});
  CHECK_THROWS_AS(trajectory_point(a, flip, 0.5), Error);
}

TEST_CASE("analytic breakpoint at one third") {
  // pre-activation along the path: 1*2^(1-3t)... weights (1,2) -> (1,0.25), x = (1,-1)
  ArchitectureSpec s;
  s.neurons = {{"x1", Activation::input()}, {"x2", Activation::input()},
               {"h", Activation::relu()}, {"out", Activation::identity()}};
  s.edges = {{"x1", "h"}, {"x2", "h"}, {"h", "out"}};
  auto arch = Architecture::validate(s);
  ParamVector a = ParamVector::zeros(arch), b = ParamVector::zeros(arch);
  a[0] = 1; a[1] = 2; a[2] = 1;
  b[0] = 1; b[1] = 0.25; b[2] = 1;
  // biases are zero in both, so they stay zero along the trajectory
  auto rep = breakpoints(arch, a, b, std::vector<double>{1.0, -1.0}, 10);
  REQUIRE(rep.breakpoints.size() == 1);
  CHECK(std::abs(rep.breakpoints[0].t - 1.0 / 3.0) < 1e-8);
  CHECK(rep.rel_error < 1e-9);

  auto none = breakpoints(arch, a, a, std::vector<double>{1.0, -1.0}, 10);
  CHECK(none.breakpoints.empty());
  CHECK(none.telescoped == 0.0);
}

TEST_CASE("telescoping on the pruning pair") {
  auto a = fixtures::net_a();
  auto pruned = fixtures::net_a(1, -2, 0, 1);
  auto pr = breakpoints(a.arch, a.theta, pruned.theta, std::vector<double>{2.0}, 10);
  CHECK(rel_close(pr.telescoped, 3.0));
  CHECK(rel_close(pr.endpoint, 3.0));
  CHECK(trajectory_monotonicity_violation(a.arch, a.theta, pruned.theta) <= 1e-12);

  // shrinking instead of removing

  auto p = fixtures::net_a(1, -2, 1e-3, 1);
  auto rep = breakpoints(a.arch, a.theta, p.theta, std::vector<double>{2.0}, 10);
  CHECK(rel_close(rep.telescoped, 3.0 - 1e-3));
  CHECK(rep.rel_error < 1e-9);
}

TEST_CASE("monotone path coordinates along trajectories") {
  std::mt19937_64 rng(79);
  for (int i = 0; i < 50; ++i) {
    auto n = random_dag(rng);
    auto t2 = same_sign_partner(n.theta, rng, 0.0);
    for (std::size_t c = 0; c < t2.size(); ++c) {
      if (n.theta[c] == 0.0) t2[c] = 0.0;
    }
    CHECK(trajectory_monotonicity_violation(n.arch, n.theta, t2) <= 1e-12);
    auto rep = breakpoints(n.arch, n.theta, t2, random_input(n.arch, rng), 11);
    CHECK(rep.rel_error < 1e-9);
  }
}

TEST_CASE("equality witness") {
  auto w = equality_witness(2, 2, 1, 1);
  CHECK(w.report.lhs == 3.0);
  CHECK(w.report.rhs == 3.0);
  auto same = equality_witness(3, 1.5, 1.5, 2);
  CHECK(same.report.lhs == 0.0);
  CHECK(same.report.rhs == 0.0);
  auto one = equality_witness(1, 5, 3, 2);
  CHECK(one.report.lhs == 4.0);
  CHECK(one.report.rhs == 4.0);
  CHECK_THROWS_AS(equality_witness(0, 1, 1, 1), Error);
  CHECK_THROWS_AS(equality_witness(2, -1, 1, 1), Error);
}

TEST_CASE("variant parsing") {
  CHECK(parse_variant("main") == BoundVariant::Main);
  CHECK(parse_variant("split") == BoundVariant::Split);
  CHECK_THROWS_AS(parse_variant("both"), Error);
}
