#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathlift/net.hpp"
#include "pathlift/paths.hpp"

namespace pathlift {

enum class BoundVariant {
  Main,   // max(||x||_inf, 1) * ||Phi(theta) - Phi(theta')||_1
  Split,  // ||x||_inf * ||dPhi^I||_1 + ||dPhi^H||_1
};

// Where the path-metric inside the main right-hand side came from.
enum class MetricSource {
  Oracle,          // enumerated paths
  ExactDominated,  // |theta| >= |theta'| (or reverse), two forward passes
  LowerOnly,       // neither available: only the lower bound, so rhs is not certified
};

std::string to_string(BoundVariant v);
std::string to_string(MetricSource s);
// "main" or "split"; throws InvalidConfig.
BoundVariant parse_variant(const std::string& text);

/// Throws SignConditionViolated naming every coordinate with theta_i * theta'_i < 0.
void check_sign_condition(const Architecture& arch, const ParamVector& theta,
                          const ParamVector& theta2);

struct BoundRhs {
  double value = 0.0;
  MetricSource source = MetricSource::Oracle;
};

/// Right-hand side of the parameter-space Lipschitz bound at input x.
/// The split variant always enumerates paths (PathExplosion past cap).
BoundRhs bound_rhs(const Architecture& arch, const ParamVector& theta, const ParamVector& theta2,
                   std::span<const double> x, BoundVariant variant,
                   std::uint64_t cap = default_path_cap());

struct BoundReport {
  double lhs = 0.0;  // ||R_theta(x) - R_theta'(x)||_1
  double rhs = 0.0;
  BoundVariant variant = BoundVariant::Main;
  MetricSource source = MetricSource::Oracle;
  bool holds = false;  // lhs <= rhs (1 + 1e-9) + 1e-12
  double slack = 0.0;  // rhs - lhs
};

bool bound_holds(double lhs, double rhs);

BoundReport verify_bound(const Architecture& arch, const ParamVector& theta,
                         const ParamVector& theta2, std::span<const double> x,
                         BoundVariant variant, std::uint64_t cap = default_path_cap());

/// theta_i(t) = sgn(theta_i) |theta_i|^(1-t) |theta'_i|^t; coordinates zero in
/// both stay zero. Throws SignConditionViolated or MixedZeroCoordinate.
ParamVector trajectory_point(const ParamVector& theta, const ParamVector& theta2, double t);

struct Breakpoint {
  double t = 0.0;                     // centre of the bracketing interval
  double width = 0.0;                 // bracket width
  std::vector<std::size_t> flipped;   // path indices whose activation changed
};

struct BreakpointReport {
  std::vector<Path> paths;
  std::vector<Breakpoint> breakpoints;
  double telescoped = 0.0;  // sum over segments of ||Phi(theta(t_k+1)) - Phi(theta(t_k))||_1
  double endpoint = 0.0;    // ||Phi(theta) - Phi(theta')||_1
  double rel_error = 0.0;   // |telescoped - endpoint| / max(endpoint, tiny)
};

/// Coordinates that vanish at only one end (pruning pairs) follow the limit
/// of the trajectory: nonzero at that end only. Samples a(theta(t), x) at M+1 uniform t, then bisects every interval whose
/// ends disagree down to width `tol`, repeating inside the interval until the
/// right end is reached. Detection is sampled, so a pair of flips inside one
/// sampling cell can be missed; the telescoping sum is unaffected.
BreakpointReport breakpoints(const Architecture& arch, const ParamVector& theta,
                             const ParamVector& theta2, std::span<const double> x,
                             std::size_t samples, double tol = 1e-10,
                             std::uint64_t cap = default_path_cap());

/// Largest violation of per-path monotonicity of t -> Phi_p(theta(t)) over
/// `samples` uniform points, relative to max(|Phi_p(theta)|, |Phi_p(theta')|).
/// Zero when every path is monotone.
double trajectory_monotonicity_violation(const Architecture& arch, const ParamVector& theta,
                                         const ParamVector& theta2, std::size_t samples = 11,
                                         std::uint64_t cap = default_path_cap());

struct WitnessReport {
  Network net;  // architecture and theta
  ParamVector theta2;
  std::vector<double> x;
  BoundReport report;
  double path_metric = 0.0;
};

/// Chain in -> h1 -> ... -> out of length d, all weights a (resp. b), biases
/// zero, input x0. Reports lhs = rhs = |a^d - b^d| x0 under the split variant.
/// Throws InvalidConfig unless d >= 1 and a, b, x0 > 0.
WitnessReport equality_witness(std::size_t d, double a, double b, double x0);

/// Chain in -> h -> out with theta = (1, 1) and theta' = (-1, -1). The paths
/// lift to the same vector, yet the outputs differ at x = 1. The sign
/// condition is not checked; report.rhs is the main rhs computed anyway.
WitnessReport sign_counterexample(double x = 1.0);

}  // namespace pathlift
