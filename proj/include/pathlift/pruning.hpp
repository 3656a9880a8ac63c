#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pathlift/autodiff.hpp"
#include "pathlift/net.hpp"
#include "pathlift/paths.hpp"

namespace pathlift {

enum class Criterion { PathMag, Magnitude, ObdFd, ObdHutchinson };
enum class PathMagMethod { Autodiff, PathNormDiff, BruteForce };

std::string to_string(Criterion c);
std::string to_string(PathMagMethod m);
// "pathmag", "magnitude", "obd" (finite differences), "obd-fd", "obd-hutchinson".
Criterion parse_criterion(const std::string& text);
// "autodiff", "diff" / "pathnorm_diff", "brute" / "bruteforce".
PathMagMethod parse_method(const std::string& text);

struct ScoreVector {
  std::vector<double> values;  // one per coordinate
  Criterion criterion = Criterion::PathMag;
  std::string method;          // how the values were obtained
};

/// Path-Mag(theta, i) = sum of |Phi_p(theta)| over paths through coordinate i.
/// Autodiff: theta . grad ||Phi||_1. PathNormDiff: ||Phi(theta)||_1 -
/// ||Phi(theta_{-i})||_1 per coordinate. BruteForce: enumeration (PathExplosion
/// past cap).
ScoreVector path_mag_scores(const Architecture& arch, const ParamVector& theta,
                            PathMagMethod method = PathMagMethod::Autodiff,
                            std::uint64_t cap = default_path_cap());

struct Batch {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;

  bool empty() const { return inputs.empty(); }
};

struct BaselineOptions {
  LossKind loss = LossKind::SquaredError;
  double eps = 1e-4;           // finite-difference step
  std::size_t probes = 100;    // Hutchinson probe count
  std::uint64_t seed = 0;      // Hutchinson probe generator seed
};

/// Magnitude |theta_i|; OBD 0.5 h_ii theta_i^2 with h_ii from second-order
/// central differences of the summed batch loss, or from the Hutchinson
/// estimate mean_v (Hv . v) with Rademacher v drawn from std::mt19937_64(seed)
/// (one 64-bit draw per coordinate, low bit) and Hv = (grad(theta + eps v) -
/// grad(theta - eps v)) / (2 eps). Throws MissingData for OBD without a batch.
ScoreVector baseline_scores(const Architecture& arch, const ParamVector& theta, Criterion criterion,
                            const Batch* data = nullptr, const BaselineOptions& options = {});

/// Dispatches to path_mag_scores or baseline_scores.
ScoreVector compute_scores(const Architecture& arch, const ParamVector& theta, Criterion criterion,
                           PathMagMethod method = PathMagMethod::Autodiff,
                           const Batch* data = nullptr, const BaselineOptions& options = {});

class Mask {
 public:
  Mask() = default;
  // Keeps every coordinate.
  explicit Mask(std::size_t n) : keep_(n, 1) {}
  static Mask from_pruned(std::size_t n, std::span<const CoordIndex> pruned);

  std::size_t size() const { return keep_.size(); }
  bool keeps(CoordIndex i) const { return keep_[i] != 0; }
  const std::vector<std::uint8_t>& keep() const { return keep_; }
  // Pruned coordinates in increasing order.
  std::vector<CoordIndex> pruned() const;
  void drop(CoordIndex i) { keep_[i] = 0; }
  ParamVector apply(const ParamVector& theta) const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::vector<std::uint8_t> keep_;
};

std::size_t hamming_distance(const Mask& a, const Mask& b);

struct PruneAmount {
  enum class Kind { Fraction, Count };
  Kind kind = Kind::Fraction;
  double fraction = 0.0;
  std::size_t count = 0;

  static PruneAmount of_fraction(double f) { return {Kind::Fraction, f, 0}; }
  static PruneAmount of_count(std::size_t k) { return {Kind::Count, 0.0, k}; }
};

// Rescoring hook for the iterative variant; receives the current pruned theta.
using Rescorer = std::function<ScoreVector(const ParamVector&)>;

struct PruneOptions {
  bool edges_only = false;  // restrict candidates to edge weights
  bool iterative = false;   // re-score after every single removal
  Rescorer rescore;         // required when iterative
};

struct PruneResult {
  Mask mask;
  ParamVector theta;  // s . theta
};

/// Reverse hard thresholding: zero the candidates with the smallest scores,
/// ties broken by coordinate index. A fraction f prunes floor(f * n) of the n
/// candidates. Throws InfeasibleAmount.
PruneResult apply_prune(const Architecture& arch, const ParamVector& theta,
                        const ScoreVector& scores, PruneAmount amount,
                        const PruneOptions& options = {});

struct PruneBound {
  double bound = 0.0;          // (sum_{i in I} Path-Mag(theta, i)) max(1, ||x||_inf)
  double empirical_lhs = 0.0;  // ||R_theta(x) - R_{s.theta}(x)||_1
  bool holds = false;
};

PruneBound pruning_error_bound(const Architecture& arch, const ParamVector& theta,
                               const Mask& mask, std::span<const double> x);

}  // namespace pathlift
