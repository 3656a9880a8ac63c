#include "pathlift/lipschitz.hpp"

#include <algorithm>
#include <cmath>

#include "pathlift/errors.hpp"
#include "pathlift/metrics.hpp"

namespace pathlift {
namespace {

double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void check_input(const Architecture& arch, std::span<const double> x) {
  if (x.size() != arch.inputs().size()) {
    throw Error(ErrorKind::DimensionMismatch, "input size does not match the network inputs");
  }
}

}  // namespace

std::string to_string(BoundVariant v) { return v == BoundVariant::Main ? "main" : "split"; }

std::string to_string(MetricSource s) {
  switch (s) {
    case MetricSource::Oracle: return "oracle";
    case MetricSource::ExactDominated: return "exact-dominated";
    case MetricSource::LowerOnly: return "lower-only";
  }
  return "?";
}

BoundVariant parse_variant(const std::string& text) {
  if (text == "main") return BoundVariant::Main;
  if (text == "split") return BoundVariant::Split;
  throw Error(ErrorKind::InvalidConfig, "variant must be 'main' or 'split', got '" + text + "'");
}

void check_sign_condition(const Architecture& arch, const ParamVector& theta,
                          const ParamVector& theta2) {
  check_params(arch, theta);
  check_params(arch, theta2);
  std::string bad;
  std::size_t count = 0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] * theta2[i] < 0) {
      if (count < 20) bad += (count ? ", " : "") + arch.coord_name(i);
      ++count;
    }
  }
  if (count) {
    if (count > 20) bad += ", ... (" + std::to_string(count) + " in total)";
    throw Error(ErrorKind::SignConditionViolated, "coordinates change sign: " + bad);
  }
}

BoundRhs bound_rhs(const Architecture& arch, const ParamVector& theta, const ParamVector& theta2,
                   std::span<const double> x, BoundVariant variant, std::uint64_t cap) {
  check_sign_condition(arch, theta, theta2);
  check_input(arch, x);
  const double xinf = inf_norm(x);
  if (variant == BoundVariant::Split) {
    const PathLifting pl = path_lifting(arch, theta, cap);
    double in_part = 0.0, hidden_part = 0.0;
    for (std::size_t i = 0; i < pl.paths.size(); ++i) {
      const double d = std::abs(pl.values[i] - path_value(arch, pl.paths[i], theta2));
      (pl.from_input[i] ? in_part : hidden_part) += d;
    }
    return {xinf * in_part + hidden_part, MetricSource::Oracle};
  }
  const double scale = std::max(xinf, 1.0);
  if (count_paths(arch) <= cap) {
    return {scale * path_metric_oracle(arch, theta, theta2, cap), MetricSource::Oracle};
  }
  try {
    const ExactMetric ex = path_metric_exact_dominated(arch, theta, theta2, false, cap);
    return {scale * ex.value, MetricSource::ExactDominated};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DominanceUnverified) throw;
  }
  return {scale * path_metric_lower(arch, theta, theta2), MetricSource::LowerOnly};
}

bool bound_holds(double lhs, double rhs) { return lhs <= rhs * (1.0 + 1e-9) + 1e-12; }

BoundReport verify_bound(const Architecture& arch, const ParamVector& theta,
                         const ParamVector& theta2, std::span<const double> x,
                         BoundVariant variant, std::uint64_t cap) {
  const BoundRhs rhs = bound_rhs(arch, theta, theta2, x, variant, cap);
  const auto r1 = forward(arch, theta, x);
  const auto r2 = forward(arch, theta2, x);
  BoundReport rep;
  for (std::size_t o = 0; o < r1.size(); ++o) rep.lhs += std::abs(r1[o] - r2[o]);
  rep.rhs = rhs.value;
  rep.variant = variant;
  rep.source = rhs.source;
  rep.holds = bound_holds(rep.lhs, rep.rhs);
  rep.slack = rep.rhs - rep.lhs;
  return rep;
}

namespace {

// With allow_mixed, a coordinate zero at one end follows the pointwise limit
// of the formula (0^t = 0 for t > 0), which is how pruning pairs are traced.
ParamVector geodesic(const ParamVector& theta, const ParamVector& theta2, double t,
                     bool allow_mixed) {
  if (theta.size() != theta2.size()) {
    throw Error(ErrorKind::DimensionMismatch, "parameter vectors differ in size");
  }
  std::vector<double> out(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double a = theta[i], b = theta2[i];
    if (a * b < 0) {
      throw Error(ErrorKind::SignConditionViolated,
                  "coordinate " + std::to_string(i) + " changes sign");
    }
    if (!allow_mixed && (a == 0) != (b == 0)) {
      throw Error(ErrorKind::MixedZeroCoordinate,
                  "coordinate " + std::to_string(i) + " is zero at only one end");
    }
    if (t == 0.0) {
      out[i] = a;
    } else if (t == 1.0) {
      out[i] = b;
    } else if (a == 0 || b == 0) {
      out[i] = 0.0;
    } else {
      out[i] = sgn(a) * std::pow(std::abs(a), 1.0 - t) * std::pow(std::abs(b), t);
    }
  }
  return ParamVector(std::move(out));
}

}  // namespace

ParamVector trajectory_point(const ParamVector& theta, const ParamVector& theta2, double t) {
  return geodesic(theta, theta2, t, false);
}

BreakpointReport breakpoints(const Architecture& arch, const ParamVector& theta,
                             const ParamVector& theta2, std::span<const double> x,
                             std::size_t samples, double tol, std::uint64_t cap) {
  check_sign_condition(arch, theta, theta2);
  check_input(arch, x);
  if (samples == 0) throw Error(ErrorKind::InvalidConfig, "need at least one sampling interval");
  BreakpointReport rep;
  rep.paths = enumerate_paths(arch, std::nullopt, cap);
  const auto& paths = rep.paths;

  auto act = [&](double t) {
    return path_activations(arch, paths, geodesic(theta, theta2, t, true), x);
  };

  std::vector<double> cuts{0.0};
  auto left_act = act(0.0);
  for (std::size_t k = 1; k <= samples; ++k) {
    const double right = static_cast<double>(k) / static_cast<double>(samples);
    const auto right_act = act(right);
    double lo = static_cast<double>(k - 1) / static_cast<double>(samples);
    auto lo_act = left_act;
    while (lo_act != right_act) {
      // Localize the first flip in (lo, right].
      double a = lo, b = right;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (act(mid) == lo_act) {
          a = mid;
        } else {
          b = mid;
        }
      }
      auto b_act = act(b);
      Breakpoint bp;
      bp.t = 0.5 * (a + b);
      bp.width = b - a;
      for (std::size_t p = 0; p < paths.size(); ++p) {
        if (b_act[p] != lo_act[p]) bp.flipped.push_back(p);
      }
      rep.breakpoints.push_back(std::move(bp));
      cuts.push_back(b);
      lo = b;
      lo_act = std::move(b_act);
    }
    left_act = right_act;
  }
  if (cuts.back() != 1.0) cuts.push_back(1.0);

  auto lift = [&](double t) {
    const ParamVector p = geodesic(theta, theta2, t, true);
    std::vector<double> v;
    v.reserve(paths.size());
    for (const Path& path : paths) v.push_back(path_value(arch, path, p));
    return v;
  };
  auto prev = lift(cuts.front());
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    auto cur = lift(cuts[k]);
    for (std::size_t p = 0; p < paths.size(); ++p) rep.telescoped += std::abs(cur[p] - prev[p]);
    prev = std::move(cur);
  }
  const auto start = lift(0.0);
  const auto end = lift(1.0);
  for (std::size_t p = 0; p < paths.size(); ++p) rep.endpoint += std::abs(start[p] - end[p]);
  rep.rel_error = std::abs(rep.telescoped - rep.endpoint) / std::max(rep.endpoint, 1e-300);
  if (rep.telescoped == rep.endpoint) rep.rel_error = 0.0;
  return rep;
}

double trajectory_monotonicity_violation(const Architecture& arch, const ParamVector& theta,
                                         const ParamVector& theta2, std::size_t samples,
                                         std::uint64_t cap) {
  check_sign_condition(arch, theta, theta2);
  if (samples < 2) throw Error(ErrorKind::InvalidConfig, "need at least two sample points");
  const auto paths = enumerate_paths(arch, std::nullopt, cap);
  std::vector<std::vector<double>> vals(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(samples - 1);
    const ParamVector p = geodesic(theta, theta2, t, true);
    for (const Path& path : paths) vals[k].push_back(path_value(arch, path, p));
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const double first = vals.front()[p], last = vals.back()[p];
    const double scale = std::max({std::abs(first), std::abs(last), 1e-300});
    const double dir = last >= first ? 1.0 : -1.0;
    for (std::size_t k = 1; k < samples; ++k) {
      const double step = dir * (vals[k][p] - vals[k - 1][p]);
      if (step < 0) worst = std::max(worst, -step / scale);
    }
  }
  return worst;
}

namespace {

Architecture chain(std::size_t d) {
  ArchitectureSpec spec;
  spec.neurons.push_back({"in", Activation::input()});
  for (std::size_t i = 1; i < d; ++i) spec.neurons.push_back({"h" + std::to_string(i), Activation::relu()});
  spec.neurons.push_back({"out", Activation::identity()});
  for (std::size_t i = 0; i < d; ++i) spec.edges.push_back({spec.neurons[i].id, spec.neurons[i + 1].id});
  return Architecture::validate(spec);
}

}  // namespace

WitnessReport equality_witness(std::size_t d, double a, double b, double x0) {
  if (d < 1 || !(a > 0) || !(b > 0) || !(x0 > 0)) {
    throw Error(ErrorKind::InvalidConfig, "equality witness needs d >= 1 and a, b, x0 > 0");
  }
  Architecture arch = chain(d);
  ParamVector t1 = ParamVector::zeros(arch), t2 = ParamVector::zeros(arch);
  for (EdgeIndex e = 0; e < arch.num_edges(); ++e) {
    t1[e] = a;
    t2[e] = b;
  }
  WitnessReport w{Network{std::move(arch), std::move(t1)}, std::move(t2), {x0}, {}, 0.0};
  w.report = verify_bound(w.net.arch, w.net.theta, w.theta2, w.x, BoundVariant::Split);
  w.path_metric = path_metric_oracle(w.net.arch, w.net.theta, w.theta2);
  return w;
}

WitnessReport sign_counterexample(double x) {
  Architecture arch = chain(2);
  ParamVector t1 = ParamVector::zeros(arch), t2 = ParamVector::zeros(arch);
  t1[0] = t1[1] = 1.0;
  t2[0] = t2[1] = -1.0;
  WitnessReport w{Network{std::move(arch), std::move(t1)}, std::move(t2), {x}, {}, 0.0};
  w.path_metric = path_metric_oracle(w.net.arch, w.net.theta, w.theta2);
  const auto r1 = forward(w.net.arch, w.net.theta, w.x);
  const auto r2 = forward(w.net.arch, w.theta2, w.x);
  w.report.lhs = std::abs(r1[0] - r2[0]);
  w.report.rhs = std::max(std::abs(x), 1.0) * w.path_metric;
  w.report.variant = BoundVariant::Main;
  w.report.source = MetricSource::Oracle;
  w.report.holds = bound_holds(w.report.lhs, w.report.rhs);
  w.report.slack = w.report.rhs - w.report.lhs;
  return w;
}

}  // namespace pathlift
