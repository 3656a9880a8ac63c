#include <random>

#include "doctest.h"
#include "pathlift/autodiff.hpp"
#include "pathlift/errors.hpp"
#include "pathlift/generators.hpp"
#include "pathlift/metrics.hpp"
#include "support.hpp"

using namespace pathlift;
using fixtures::rel_close;

namespace {

Network chain(double w) {
  ArchitectureSpec s;
  s.neurons = {{"in", Activation::input()}, {"out", Activation::identity()}};
  s.edges = {{"in", "out"}};
  auto a = Architecture::validate(s);
  ParamVector t = ParamVector::zeros(a);
  t[0] = w;
  return {std::move(a), std::move(t)};
}

}  // namespace

TEST_CASE("linear chain gradient") {
  auto c = chain(0.7);
  auto g = grad_scalar(c.arch, c.theta, std::vector<double>{2.0}, Aggregate::sum_outputs());
  CHECK(g.value == doctest::Approx(1.4));
  CHECK(g.grad[0] == 2.0);
  CHECK(g.grad[1] == 1.0);  // output bias
  auto chk = grad_check(c.arch, c.theta, std::vector<double>{2.0}, Aggregate::sum_outputs(), 1e-5);
  CHECK(chk.max_rel_error < 1e-10);
}

TEST_CASE("abs-transformed diamond gradient") {
  auto a = fixtures::net_a();
  auto t = abs_transform(a.arch, a.theta);
  auto g = grad_scalar(t.arch, t.theta, std::vector<double>{1.0}, Aggregate::sum_outputs());
  CHECK(g.grad[0] == 3.0);
  CHECK(g.grad[1] == 1.0);
  CHECK(g.grad[2] == 1.0);
  CHECK(g.grad[3] == 2.0);
}

TEST_CASE("path-norm gradient") {
  auto a = fixtures::net_a();
  auto g = grad_path_norm(a.arch, a.theta);
  CHECK(g[0] == 3.0);
  CHECK(g[1] == -1.0);
  CHECK(g[2] == 1.0);
  CHECK(g[3] == 2.0);

  auto z = grad_path_norm(a.arch, ParamVector::zeros(a.arch));
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("path-norm gradient against central differences") {
  std::mt19937_64 rng(61);
  const double h = 1e-6;
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    auto n = random_dag(rng);
    auto g = grad_path_norm(n.arch, n.theta);
    for (std::size_t c = 0; c < n.theta.size(); ++c) {
      if (std::abs(n.theta[c]) < 1e-3) continue;
      auto p = n.theta, m = n.theta;
      p[c] += h;
      m[c] -= h;
      const double fd = (fixtures::oracle_path_norm({n.arch, p}) -
                         fixtures::oracle_path_norm({n.arch, m})) / (2 * h);
      worst = std::max(worst, std::abs(g[c] - fd) / std::max({std::abs(g[c]), std::abs(fd), 1.0}));
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("grad_check on the diamond and random nets") {
  auto a = fixtures::net_a();
  auto r = grad_check(a.arch, a.theta, std::vector<double>{1.0}, Aggregate::sum_outputs(), 1e-5);
  CHECK(r.max_rel_error < 1e-5);

  std::mt19937_64 rng(67);
  for (int i = 0; i < 50; ++i) {
    auto n = random_dag(rng);
    auto x = random_input(n.arch, rng);
    std::vector<double> y(n.arch.outputs().size(), 0.5);
    for (auto agg : {Aggregate::sum_outputs(), Aggregate::loss_against(y, LossKind::SquaredError),
                     Aggregate::loss_against(y, LossKind::Logistic)}) {
      if (agg.kind == Aggregate::Kind::Loss && agg.loss == LossKind::Logistic) {
        std::fill(agg.target.begin(), agg.target.end(), 0.0);
        agg.target[0] = 1.0;
      }
      auto res = grad_check(n.arch, n.theta, x, agg, 1e-6);
      CHECK(res.max_rel_error < 1e-5);
    }
  }
}

TEST_CASE("grad_check honours the skip list") {
  auto a = fixtures::net_a();
  std::vector<char> skip(a.theta.size(), 1);
  auto r = grad_check(a.arch, a.theta, std::vector<double>{1.0}, Aggregate::sum_outputs(), 1e-5, skip);
  CHECK(r.checked == 0);
  CHECK(r.skipped == a.theta.size());

  // h2 sits exactly at 0 for x = 0: coordinates feeding it are auto-skipped
  auto z = grad_check(a.arch, a.theta, std::vector<double>{0.0}, Aggregate::sum_outputs(), 1e-5);
  CHECK(z.skipped > 0);
  CHECK(z.max_rel_error < 1e-5);
}

TEST_CASE("losses") {
  std::vector<double> out{1.0, 2.0}, y{0.0, 1.0};
  CHECK(loss_value(out, y, LossKind::SquaredError) == 1.0);
  const double lse = std::log(std::exp(1.0) + std::exp(2.0));
  CHECK(rel_close(loss_value(out, y, LossKind::Logistic), lse - 2.0));
  auto g = loss_adjoint(out, y, LossKind::Logistic);
  CHECK(rel_close(g[0] + g[1], 0.0, 1e-9, 1e-15));
  std::vector<double> one{0.0}, t1{1.0};
  CHECK(rel_close(loss_value(one, t1, LossKind::Logistic), std::log(2.0)));
  CHECK(rel_close(loss_adjoint(one, t1, LossKind::Logistic)[0], -0.5));
}

TEST_CASE("batch gradient is the sum of per-sample gradients") {
  auto a = fixtures::net_a();
  std::vector<std::vector<double>> xs{{1.0}, {-0.5}, {2.0}}, ys{{0.0}, {1.0}, {2.0}};
  auto bg = batch_loss_grad(a.arch, a.theta, xs, ys, LossKind::SquaredError);
  std::vector<double> sum(a.theta.size(), 0.0);
  double v = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    auto g = grad_scalar(a.arch, a.theta, xs[k], Aggregate::loss_against(ys[k], LossKind::SquaredError));
    v += g.value;
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += g.grad[c];
  }
  CHECK(rel_close(bg.value, v));
  CHECK(fixtures::all_close(bg.grad, sum));
  CHECK(rel_close(batch_loss(a.arch, a.theta, xs, ys, LossKind::SquaredError), v));
}

TEST_CASE("tape reuse") {
  auto d = fixtures::net_d();
  Tape tape(d.arch, d.theta, std::vector<double>{1.0, 1.0});
  CHECK(tape.outputs()[0] == 2.0);
  auto g = tape.backward(std::vector<double>{1.0});
  CHECK(g[0] == 1.0);  // x1->m selected
  CHECK(g[1] == 0.0);
  CHECK(g[2] == 2.0);
  auto g2 = tape.backward(std::vector<double>{2.0});
  CHECK(g2[2] == 4.0);
  CHECK_THROWS_AS(grad_scalar(d.arch, d.theta, std::vector<double>{1.0}, Aggregate::sum_outputs()), Error);
}
