#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathlift/net.hpp"
#include "pathlift/paths.hpp"

namespace pathlift {

/// ||Phi(theta)||_q^q in one forward pass: k-max-pool neurons become sums,
/// every coordinate becomes |.|^q, the input is all ones, and the outputs
/// are summed.
double path_norm_fast(const Architecture& arch, const ParamVector& theta, double q = 1.0);

/// The transformed network used by path_norm_fast, materialized: k-max-pool
/// neurons retagged identity and coordinates replaced by |.|^q.
Network abs_transform(const Architecture& arch, const ParamVector& theta, double q = 1.0);

/// | ||Phi(theta)||_1 - ||Phi(theta')||_1 |, a lower bound on the path-metric.
double path_metric_lower(const Architecture& arch, const ParamVector& theta,
                         const ParamVector& theta2);

enum class DominanceCertificate { None, Coordinatewise, Oracle };

struct ExactMetric {
  double value;
  DominanceCertificate certificate;
};

/// Exact path-metric when |Phi(theta)| >= |Phi(theta')| (or the reverse) can be
/// certified, first from |theta| >= |theta'| coordinatewise, then by
/// enumerating paths if use_oracle is set and the count is under cap.
/// Throws DominanceUnverified otherwise.
ExactMetric path_metric_exact_dominated(const Architecture& arch, const ParamVector& theta,
                                        const ParamVector& theta2, bool use_oracle = true,
                                        std::uint64_t cap = default_path_cap());

struct ArchitectureShape {
  std::size_t width = 0;   // W = max(d_out, max_v |ant(v)|)
  std::size_t depth = 0;   // D = longest path length
  std::size_t layers = 0;  // L = max(D - 1, 0)
};

ArchitectureShape architecture_shape(const Architecture& arch);

/// Rescaling-invariant upper bound on ||Phi(theta) - Phi(theta')||_1, hence
/// on every ||.||_q with q >= 1 (q is validated, the l^1 bound is returned).
/// Coarse: (W^2 + min_pn * L * W) * ||N(theta) - N(theta')||_inf.
/// Refined: the normalized-parameter bound whose path maximum is computed by
/// a longest-path dynamic program. Both normalize every hidden neuron,
/// k-max-pool included, to incoming l^1 norm 1; dead neurons (norm 0) also
/// have their outgoing weights zeroed, which leaves Phi unchanged.
double path_metric_upper(const Architecture& arch, const ParamVector& theta,
                         const ParamVector& theta2, double q = 1.0, bool refined = false);

struct PathMetricReport {
  double lower = 0.0;
  std::optional<double> exact;
  DominanceCertificate certificate = DominanceCertificate::None;
  double upper_coarse = 0.0;
  double upper_refined = 0.0;
  std::optional<double> oracle;  // set when paths could be enumerated
};

PathMetricReport path_metric_report(const Architecture& arch, const ParamVector& theta,
                                    const ParamVector& theta2,
                                    std::uint64_t cap = default_path_cap());

std::string to_string(DominanceCertificate c);

// Dense row-major matrix for the layered bias-free MLP comparison.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);

  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  // Largest row l1-norm.
  double max_row_l1() const;
};

struct MlpBounds {
  double path_metric_ub = 0.0;      // L W^2 R^(L-1) ||theta - theta'||_inf
  double legacy = 0.0;              // (W ||x||_inf + 1) W L^2 R^(L-1) ||theta - theta'||_inf
  double recovered_same_sign = 0.0; // max(||x||_inf, 1) L W^2 R^(L-1) ||theta - theta'||_inf
  double recovered_any_sign = 0.0;  // twice the same-sign constant
  std::size_t width = 0;
  std::size_t layers = 0;
  double radius = 0.0;              // R, clamped to >= 1
  double param_distance = 0.0;      // ||theta - theta'||_inf
};

/// layers[l] maps layer l to layer l+1 (rows = outputs). Throws RaggedLayers
/// if the dimensions do not chain or the two parameter sets differ in shape.
MlpBounds mlp_bounds(std::span<const Matrix> layers, std::span<const Matrix> layers2,
                     std::span<const double> x);

/// Bias-free layered network x -> M_L relu(... relu(M_1 x)), neurons named
/// "l<layer>_<index>"; hidden layers are ReLU.
Network mlp_network(std::span<const Matrix> layers);

}  // namespace pathlift
