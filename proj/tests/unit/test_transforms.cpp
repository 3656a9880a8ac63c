#include <random>

#include "doctest.h"
#include "pathlift/errors.hpp"
#include "pathlift/generators.hpp"
#include "pathlift/paths.hpp"
#include "pathlift/transforms.hpp"
#include "support.hpp"

using namespace pathlift;
using fixtures::all_close;
using fixtures::rel_close;

TEST_CASE("rescaling a single neuron") {
  auto a = fixtures::net_a();
  Rescaling l;
  l.set(a.arch.index_of("h1"), 2.0);
  auto t = rescale(a.arch, a.theta, l);
  CHECK(t[0] == 2.0);
  CHECK(t[1] == -2.0);
  CHECK(t[2] == 1.5);
  CHECK(t[3] == 1.0);
  CHECK(forward(a.arch, t, std::vector<double>{1.0})[0] == 3.0);

  CHECK(rescale(a.arch, a.theta, Rescaling{}) == a.theta);

  Rescaling big;
  big.set(a.arch.index_of("h1"), 4096.0);
  CHECK(all_close(path_lifting(a.arch, rescale(a.arch, a.theta, big)).values,
                  path_lifting(a.arch, a.theta).values));
}

TEST_CASE("rescaling errors") {
  auto a = fixtures::net_a();
  Rescaling neg;
  neg.set(a.arch.index_of("h1"), -1.0);
  CHECK_THROWS_AS(rescale(a.arch, a.theta, neg), Error);
  Rescaling out;
  out.set(a.arch.index_of("out"), 2.0);
  try {
    rescale(a.arch, a.theta, out);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IneligibleNeuron);
  }
  try {
    rescale(a.arch, a.theta, neg);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveFactor);
  }
  auto d = fixtures::net_d();
  CHECK_FALSE(is_rescalable(d.arch, d.arch.index_of("m"), false));
  CHECK(is_rescalable(d.arch, d.arch.index_of("m"), true));
}

TEST_CASE("random rescaling draws") {
  std::mt19937_64 rng(2);
  auto n = random_dag(rng);
  auto r1 = random_rescaling(n.arch, 99, RescalePreset::fixed());
  auto r2 = random_rescaling(n.arch, 99, RescalePreset::fixed());
  CHECK(r1.factors() == r2.factors());
  for (const auto& [v, f] : r1.factors()) {
    CHECK((f == 1.0 || f == 128.0 || f == 4096.0));
    CHECK(is_rescalable(n.arch, v, false));
  }
  auto flat = random_rescaling(n.arch, 5, RescalePreset::log_uniform(1.0));
  for (const auto& [v, f] : flat.factors()) CHECK(f == 1.0);

  auto lu = random_rescaling(n.arch, 5, RescalePreset::log_uniform(10.0));
  for (const auto& [v, f] : lu.factors()) {
    CHECK(f >= 0.1 - 1e-12);
    CHECK(f <= 10.0 + 1e-12);
  }
  CHECK(RescalePreset::parse("loguniform:8").lambda_max == 8.0);
  CHECK_THROWS_AS(RescalePreset::parse("bogus"), Error);
}

TEST_CASE("normalize") {
  auto a = fixtures::net_a();
  auto n = normalize(a.arch, a.theta);
  CHECK(n[0] == 1.0);
  CHECK(n[2] == 3.0);
  CHECK(n[1] == -1.0);
  CHECK(n[3] == 2.0);
  CHECK(all_close(path_lifting(a.arch, n).values, path_lifting(a.arch, a.theta).values));
  CHECK(normalize(a.arch, n) == n);

  SUBCASE("dead neuron left alone") {
    auto d = fixtures::net_a(0, -2, 3, 1);
    auto nd = normalize(d.arch, d.theta);
    CHECK(nd[0] == 0.0);
    CHECK(nd[2] == 3.0);
  }
}

TEST_CASE("invariance on random nets with extreme factors") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    auto n = random_dag(rng);
    auto lam = random_rescaling(n.arch, rng(), RescalePreset::fixed(), true);
    auto t = rescale(n.arch, n.theta, lam);
    auto x = random_input(n.arch, rng);
    CHECK(all_close(forward(n.arch, t, x), forward(n.arch, n.theta, x)));
    auto ps = enumerate_paths(n.arch);
    CHECK(all_close(path_lifting(n.arch, ps, t).values, path_lifting(n.arch, ps, n.theta).values));
    CHECK(path_activations(n.arch, ps, t, x) == path_activations(n.arch, ps, n.theta, x));

    // normalized representatives agree, and every hidden incoming norm is 0 or 1
    NormalizeOptions all{true};
    auto na = normalize(n.arch, n.theta, all);
    auto nb = normalize(n.arch, t, all);
    CHECK(all_close(std::vector<double>(na.values().begin(), na.values().end()),
                    std::vector<double>(nb.values().begin(), nb.values().end())));
    for (NeuronIndex v = 0; v < n.arch.num_neurons(); ++v) {
      if (!n.arch.is_hidden(v)) continue;
      double s = std::abs(na.bias(n.arch, v));
      for (auto e : n.arch.incoming(v)) s += std::abs(na[e]);
      CHECK((s == 0.0 || rel_close(s, 1.0)));
    }
  }
}
