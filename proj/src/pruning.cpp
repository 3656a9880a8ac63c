#include "pathlift/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pathlift/errors.hpp"
#include "pathlift/lipschitz.hpp"
#include "pathlift/metrics.hpp"

namespace pathlift {

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::PathMag: return "pathmag";
    case Criterion::Magnitude: return "magnitude";
    case Criterion::ObdFd: return "obd-fd";
    case Criterion::ObdHutchinson: return "obd-hutchinson";
  }
  return "?";
}

std::string to_string(PathMagMethod m) {
  switch (m) {
    case PathMagMethod::Autodiff: return "autodiff";
    case PathMagMethod::PathNormDiff: return "pathnorm_diff";
    case PathMagMethod::BruteForce: return "bruteforce";
  }
  return "?";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "pathmag") return Criterion::PathMag;
  if (text == "magnitude") return Criterion::Magnitude;
  if (text == "obd" || text == "obd-fd") return Criterion::ObdFd;
  if (text == "obd-hutchinson") return Criterion::ObdHutchinson;
  throw Error(ErrorKind::InvalidConfig, "unknown criterion '" + text + "'");
}

PathMagMethod parse_method(const std::string& text) {
  if (text == "autodiff") return PathMagMethod::Autodiff;
  if (text == "diff" || text == "pathnorm_diff") return PathMagMethod::PathNormDiff;
  if (text == "brute" || text == "bruteforce") return PathMagMethod::BruteForce;
  throw Error(ErrorKind::InvalidConfig, "unknown method '" + text + "'");
}

ScoreVector path_mag_scores(const Architecture& arch, const ParamVector& theta,
                            PathMagMethod method, std::uint64_t cap) {
  check_params(arch, theta);
  ScoreVector s;
  s.criterion = Criterion::PathMag;
  s.method = to_string(method);
  s.values.assign(theta.size(), 0.0);
  switch (method) {
    case PathMagMethod::Autodiff: {
      const auto g = grad_path_norm(arch, theta);
      for (std::size_t i = 0; i < g.size(); ++i) s.values[i] = theta[i] * g[i];
      break;
    }
    case PathMagMethod::PathNormDiff: {
      const double full = path_norm_fast(arch, theta);
      ParamVector cut = theta;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        if (theta[i] == 0) continue;
        cut[i] = 0.0;
        s.values[i] = full - path_norm_fast(arch, cut);
        cut[i] = theta[i];
      }
      break;
    }
    case PathMagMethod::BruteForce: {
      const auto paths = enumerate_paths(arch, std::nullopt, cap);
      for (const Path& p : paths) {
        const double mag = std::abs(path_value(arch, p, theta));
        if (mag == 0) continue;
        if (!arch.is_input(p.start())) s.values[*arch.bias_coord(p.start())] += mag;
        for (EdgeIndex e : p.edges) s.values[e] += mag;
      }
      break;
    }
  }
  return s;
}

namespace {

const Batch& require_batch(const Batch* data) {
  if (!data || data->empty()) {
    throw Error(ErrorKind::MissingData, "OBD scores need a data batch");
  }
  return *data;
}

}  // namespace

ScoreVector baseline_scores(const Architecture& arch, const ParamVector& theta, Criterion criterion,
                            const Batch* data, const BaselineOptions& options) {
  check_params(arch, theta);
  ScoreVector s;
  s.criterion = criterion;
  s.values.assign(theta.size(), 0.0);
  const double eps = options.eps;
  switch (criterion) {
    case Criterion::PathMag:
      return path_mag_scores(arch, theta);
    case Criterion::Magnitude:
      s.method = "abs";
      for (std::size_t i = 0; i < theta.size(); ++i) s.values[i] = std::abs(theta[i]);
      return s;
    case Criterion::ObdFd: {
      const Batch& b = require_batch(data);
      s.method = "central-difference hessian diagonal";
      const double base = batch_loss(arch, theta, b.inputs, b.targets, options.loss);
      ParamVector p = theta;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        p[i] = theta[i] + eps;
        const double up = batch_loss(arch, p, b.inputs, b.targets, options.loss);
        p[i] = theta[i] - eps;
        const double down = batch_loss(arch, p, b.inputs, b.targets, options.loss);
        p[i] = theta[i];
        const double h = (up - 2.0 * base + down) / (eps * eps);
        s.values[i] = 0.5 * h * theta[i] * theta[i];
      }
      return s;
    }
    case Criterion::ObdHutchinson: {
      const Batch& b = require_batch(data);
      if (options.probes == 0) throw Error(ErrorKind::InvalidConfig, "need at least one probe");
      s.method = "hutchinson, " + std::to_string(options.probes) + " probes";
      std::mt19937_64 rng(options.seed);
      std::vector<double> diag(theta.size(), 0.0), v(theta.size());
      ParamVector up = theta, down = theta;
      for (std::size_t k = 0; k < options.probes; ++k) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (rng() & 1u) ? 1.0 : -1.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          up[i] = theta[i] + eps * v[i];
          down[i] = theta[i] - eps * v[i];
        }
        const auto gu = batch_loss_grad(arch, up, b.inputs, b.targets, options.loss).grad;
        const auto gd = batch_loss_grad(arch, down, b.inputs, b.targets, options.loss).grad;
        for (std::size_t i = 0; i < v.size(); ++i) diag[i] += (gu[i] - gd[i]) / (2.0 * eps) * v[i];
      }
      for (std::size_t i = 0; i < theta.size(); ++i) {
        s.values[i] = 0.5 * (diag[i] / static_cast<double>(options.probes)) * theta[i] * theta[i];
      }
      return s;
    }
  }
  return s;
}

ScoreVector compute_scores(const Architecture& arch, const ParamVector& theta, Criterion criterion,
                           PathMagMethod method, const Batch* data,
                           const BaselineOptions& options) {
  if (criterion == Criterion::PathMag) return path_mag_scores(arch, theta, method);
  return baseline_scores(arch, theta, criterion, data, options);
}

Mask Mask::from_pruned(std::size_t n, std::span<const CoordIndex> pruned) {
  Mask m(n);
  for (CoordIndex i : pruned) {
    if (i >= n) throw Error(ErrorKind::DimensionMismatch, "pruned coordinate out of range");
    m.keep_[i] = 0;
  }
  return m;
}

std::vector<CoordIndex> Mask::pruned() const {
  std::vector<CoordIndex> out;
  for (std::size_t i = 0; i < keep_.size(); ++i) {
    if (!keep_[i]) out.push_back(i);
  }
  return out;
}

ParamVector Mask::apply(const ParamVector& theta) const {
  if (theta.size() != keep_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "mask and parameters differ in size");
  }
  ParamVector out = theta;
  for (std::size_t i = 0; i < keep_.size(); ++i) {
    if (!keep_[i]) out[i] = 0.0;
  }
  return out;
}

std::size_t hamming_distance(const Mask& a, const Mask& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "masks differ in size");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a.keeps(i) != b.keeps(i);
  return d;
}

namespace {

// Candidates sorted by (score, index).
std::vector<CoordIndex> ranked(const std::vector<CoordIndex>& cand, std::span<const double> score) {
  std::vector<CoordIndex> order = cand;
  std::stable_sort(order.begin(), order.end(), [&](CoordIndex a, CoordIndex b) {
    return score[a] < score[b];
  });
  return order;
}

}  // namespace

PruneResult apply_prune(const Architecture& arch, const ParamVector& theta,
                        const ScoreVector& scores, PruneAmount amount,
                        const PruneOptions& options) {
  check_params(arch, theta);
  if (scores.values.size() != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "score vector and parameters differ in size");
  }
  const std::size_t n = options.edges_only ? arch.num_edges() : theta.size();
  std::vector<CoordIndex> cand(n);
  std::iota(cand.begin(), cand.end(), CoordIndex{0});

  std::size_t k = 0;
  if (amount.kind == PruneAmount::Kind::Fraction) {
    if (!(amount.fraction >= 0.0 && amount.fraction <= 1.0)) {
      throw Error(ErrorKind::InfeasibleAmount,
                  "fraction must lie in [0, 1], got " + std::to_string(amount.fraction));
    }
    k = static_cast<std::size_t>(std::floor(amount.fraction * static_cast<double>(n)));
  } else {
    k = amount.count;
  }
  if (k > n) {
    throw Error(ErrorKind::InfeasibleAmount, "cannot prune " + std::to_string(k) + " of " +
                                                 std::to_string(n) + " candidate coordinates");
  }
  if (options.iterative && k > 0 && !options.rescore) {
    throw Error(ErrorKind::InvalidConfig, "iterative pruning needs a rescoring function");
  }

  PruneResult r{Mask(theta.size()), theta};
  if (!options.iterative) {
    const auto order = ranked(cand, scores.values);
    for (std::size_t j = 0; j < k; ++j) r.mask.drop(order[j]);
    r.theta = r.mask.apply(theta);
    return r;
  }
  std::vector<double> current = scores.values;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<CoordIndex> alive;
    for (CoordIndex c : cand) {
      if (r.mask.keeps(c)) alive.push_back(c);
    }
    const auto order = ranked(alive, current);
    r.mask.drop(order.front());
    r.theta = r.mask.apply(theta);
    if (j + 1 < k) current = options.rescore(r.theta).values;
  }
  return r;
}

PruneBound pruning_error_bound(const Architecture& arch, const ParamVector& theta,
                               const Mask& mask, std::span<const double> x) {
  check_params(arch, theta);
  if (mask.size() != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "mask and parameters differ in size");
  }
  const ScoreVector s = path_mag_scores(arch, theta);
  double mass = 0.0;
  for (CoordIndex i : mask.pruned()) mass += s.values[i];
  double xinf = 0.0;
  for (double v : x) xinf = std::max(xinf, std::abs(v));
  PruneBound b;
  b.bound = mass * std::max(1.0, xinf);
  const auto r1 = forward(arch, theta, x);
  const auto r2 = forward(arch, mask.apply(theta), x);
  for (std::size_t o = 0; o < r1.size(); ++o) b.empirical_lhs += std::abs(r1[o] - r2[o]);
  b.holds = bound_holds(b.empirical_lhs, b.bound);
  return b;
}

}  // namespace pathlift
