#pragma once

#include <span>
#include <vector>

#include "pathlift/net.hpp"

namespace pathlift {

enum class LossKind {
  SquaredError,  // 0.5 * sum_o (R_o - y_o)^2
  Logistic,      // softmax cross-entropy; binary sigmoid cross-entropy for one output
};

/// Reduction of the output vector to a scalar.
struct Aggregate {
  enum class Kind { SumOutputs, Loss };
  Kind kind = Kind::SumOutputs;
  std::vector<double> target;
  LossKind loss = LossKind::SquaredError;

  static Aggregate sum_outputs() { return {}; }
  static Aggregate loss_against(std::vector<double> target, LossKind kind) {
    return {Kind::Loss, std::move(target), kind};
  }
};

/// Scalar loss of an output vector, and its gradient with respect to the outputs.
double loss_value(std::span<const double> outputs, std::span<const double> target, LossKind kind);
std::vector<double> loss_adjoint(std::span<const double> outputs, std::span<const double> target,
                                 LossKind kind);

/// One recorded forward evaluation of (arch, theta, x); backward() fills the
/// adjoint of every coordinate.
class Tape {
 public:
  Tape(const Architecture& arch, const ParamVector& theta, std::span<const double> x);

  const std::vector<double>& outputs() const { return outputs_; }
  // Per-neuron forward values, topological order.
  const std::vector<double>& values() const { return value_; }

  // d(sum_o seed[o] * R_o)/d(theta); seed is indexed like arch.outputs().
  const std::vector<double>& backward(std::span<const double> seed);
  const std::vector<double>& adjoints() const { return adjoint_; }

 private:
  const Architecture* arch_;
  std::vector<double> coords_;
  std::vector<double> outputs_;
  std::vector<double> adjoint_;
  std::vector<double> value_, pre_;
  std::vector<EdgeIndex> winner_;
};

struct ValueGrad {
  double value = 0.0;
  std::vector<double> grad;  // over the coordinates of theta
};

/// Exact reverse-mode gradient of aggregate(R_theta(x)). ReLU subgradient is 0
/// at a pre-activation of exactly 0; k-max-pool routes to the selected edge.
/// Throws DimensionMismatch.
ValueGrad grad_scalar(const Architecture& arch, const ParamVector& theta,
                      std::span<const double> x, const Aggregate& aggregate);

/// Loss summed over a batch (not averaged) and its gradient.
ValueGrad batch_loss_grad(const Architecture& arch, const ParamVector& theta,
                          std::span<const std::vector<double>> inputs,
                          std::span<const std::vector<double>> targets, LossKind kind);
double batch_loss(const Architecture& arch, const ParamVector& theta,
                  std::span<const std::vector<double>> inputs,
                  std::span<const std::vector<double>> targets, LossKind kind);

/// Gradient of ||Phi(theta)||_1: reverse sweep through the |theta| network
/// (k-max-pool summed, all-ones input) times sign(theta_i), sign(0) = 0.
std::vector<double> grad_path_norm(const Architecture& arch, const ParamVector& theta);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Central differences coordinate by coordinate against grad_scalar. The
/// relative error of a coordinate is |g - fd| / max(|g|, |fd|, 1). Coordinates
/// flagged in `skip` (if non-empty) are not compared, nor are coordinates
/// whose +-eps perturbation changes any ReLU sign or k-max-pool selection.
GradCheckResult grad_check(const Architecture& arch, const ParamVector& theta,
                           std::span<const double> x, const Aggregate& aggregate, double eps,
                           std::span<const char> skip = {});

}  // namespace pathlift
