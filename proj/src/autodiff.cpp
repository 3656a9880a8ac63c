#include "pathlift/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "eval.hpp"
#include "pathlift/errors.hpp"

namespace pathlift {
namespace {

void check_input(const Architecture& arch, std::span<const double> x) {
  if (x.size() != arch.inputs().size()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " entries, network has " +
                                                  std::to_string(arch.inputs().size()) + " inputs");
  }
}

void check_target(const Architecture& arch, std::span<const double> target) {
  if (target.size() != arch.outputs().size()) {
    throw Error(ErrorKind::DimensionMismatch, "target has " + std::to_string(target.size()) +
                                                  " entries, network has " +
                                                  std::to_string(arch.outputs().size()) + " outputs");
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (p[i] = std::exp(z[i] - m));
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

double loss_value(std::span<const double> outputs, std::span<const double> target, LossKind kind) {
  if (outputs.size() != target.size()) {
    throw Error(ErrorKind::DimensionMismatch, "target and output sizes differ");
  }
  if (kind == LossKind::SquaredError) {
    double s = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      const double d = outputs[i] - target[i];
      s += d * d;
    }
    return 0.5 * s;
  }
  if (outputs.size() == 1) return softplus(outputs[0]) - target[0] * outputs[0];
  const double m = *std::max_element(outputs.begin(), outputs.end());
  double s = 0.0;
  for (double z : outputs) s += std::exp(z - m);
  const double lse = m + std::log(s);
  double loss = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) loss += target[i] * (lse - outputs[i]);
  return loss;
}

std::vector<double> loss_adjoint(std::span<const double> outputs, std::span<const double> target,
                                 LossKind kind) {
  if (outputs.size() != target.size()) {
    throw Error(ErrorKind::DimensionMismatch, "target and output sizes differ");
  }
  std::vector<double> g(outputs.size());
  if (kind == LossKind::SquaredError) {
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = outputs[i] - target[i];
    return g;
  }
  if (outputs.size() == 1) {
    g[0] = 1.0 / (1.0 + std::exp(-outputs[0])) - target[0];
    return g;
  }
  const auto p = softmax(outputs);
  double mass = 0.0;
  for (double t : target) mass += t;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = mass * p[i] - target[i];
  return g;
}

Tape::Tape(const Architecture& arch, const ParamVector& theta, std::span<const double> x)
    : arch_(&arch) {
  check_params(arch, theta);
  check_input(arch, x);
  coords_.assign(theta.values().begin(), theta.values().end());
  detail::EvalState st;
  detail::evaluate(arch, coords_, x, detail::PoolMode::Select, st);
  outputs_.reserve(arch.outputs().size());
  for (NeuronIndex v : arch.outputs()) outputs_.push_back(st.value[v]);
  value_ = std::move(st.value);
  pre_ = std::move(st.pre);
  winner_ = std::move(st.winner);
}

const std::vector<double>& Tape::backward(std::span<const double> seed) {
  if (seed.size() != outputs_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "seed must have one entry per output");
  }
  detail::EvalState st;
  st.value.swap(value_);
  st.pre.swap(pre_);
  st.winner.swap(winner_);
  adjoint_.assign(coords_.size(), 0.0);
  detail::backward(*arch_, coords_, st, detail::PoolMode::Select, seed, adjoint_);
  st.value.swap(value_);
  st.pre.swap(pre_);
  st.winner.swap(winner_);
  return adjoint_;
}

ValueGrad grad_scalar(const Architecture& arch, const ParamVector& theta,
                      std::span<const double> x, const Aggregate& aggregate) {
  Tape tape(arch, theta, x);
  ValueGrad out;
  std::vector<double> seed;
  if (aggregate.kind == Aggregate::Kind::SumOutputs) {
    for (double v : tape.outputs()) out.value += v;
    seed.assign(tape.outputs().size(), 1.0);
  } else {
    check_target(arch, aggregate.target);
    out.value = loss_value(tape.outputs(), aggregate.target, aggregate.loss);
    seed = loss_adjoint(tape.outputs(), aggregate.target, aggregate.loss);
  }
  out.grad = tape.backward(seed);
  return out;
}

namespace {

void check_batch(std::span<const std::vector<double>> inputs,
                 std::span<const std::vector<double>> targets) {
  if (inputs.size() != targets.size()) {
    throw Error(ErrorKind::DimensionMismatch, "batch has " + std::to_string(inputs.size()) +
                                                  " inputs but " + std::to_string(targets.size()) +
                                                  " targets");
  }
}

}  // namespace

ValueGrad batch_loss_grad(const Architecture& arch, const ParamVector& theta,
                          std::span<const std::vector<double>> inputs,
                          std::span<const std::vector<double>> targets, LossKind kind) {
  check_batch(inputs, targets);
  check_params(arch, theta);
  ValueGrad out;
  out.grad.assign(theta.size(), 0.0);
  detail::EvalState st;
  std::vector<double> outs(arch.outputs().size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    check_input(arch, inputs[k]);
    check_target(arch, targets[k]);
    detail::evaluate(arch, theta.values(), inputs[k], detail::PoolMode::Select, st);
    for (std::size_t o = 0; o < outs.size(); ++o) outs[o] = st.value[arch.outputs()[o]];
    out.value += loss_value(outs, targets[k], kind);
    const auto seed = loss_adjoint(outs, targets[k], kind);
    detail::backward(arch, theta.values(), st, detail::PoolMode::Select, seed, out.grad);
  }
  return out;
}

double batch_loss(const Architecture& arch, const ParamVector& theta,
                  std::span<const std::vector<double>> inputs,
                  std::span<const std::vector<double>> targets, LossKind kind) {
  check_batch(inputs, targets);
  check_params(arch, theta);
  detail::EvalState st;
  std::vector<double> outs(arch.outputs().size());
  double total = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    check_input(arch, inputs[k]);
    check_target(arch, targets[k]);
    detail::evaluate(arch, theta.values(), inputs[k], detail::PoolMode::Select, st);
    for (std::size_t o = 0; o < outs.size(); ++o) outs[o] = st.value[arch.outputs()[o]];
    total += loss_value(outs, targets[k], kind);
  }
  return total;
}

std::vector<double> grad_path_norm(const Architecture& arch, const ParamVector& theta) {
  check_params(arch, theta);
  std::vector<double> mag(theta.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(theta[i]);
  detail::EvalState st;
  detail::evaluate_ones(arch, mag, detail::PoolMode::Sum, st);
  std::vector<double> grad(theta.size(), 0.0);
  const std::vector<double> seed(arch.outputs().size(), 1.0);
  detail::backward(arch, mag, st, detail::PoolMode::Sum, seed, grad);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (theta[i] < 0) {
      grad[i] = -grad[i];
    } else if (theta[i] == 0) {
      grad[i] = 0.0;
    }
  }
  return grad;
}

namespace {

double aggregate_value(const Architecture& arch, std::span<const double> coords,
                       std::span<const double> x, const Aggregate& agg, detail::EvalState& st) {
  detail::evaluate(arch, coords, x, detail::PoolMode::Select, st);
  std::vector<double> outs;
  for (NeuronIndex v : arch.outputs()) outs.push_back(st.value[v]);
  if (agg.kind == Aggregate::Kind::SumOutputs) {
    double s = 0.0;
    for (double o : outs) s += o;
    return s;
  }
  return loss_value(outs, agg.target, agg.loss);
}

bool same_pattern(const Architecture& arch, const detail::EvalState& a,
                  const detail::EvalState& b) {
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    const auto kind = arch.activation(v).kind;
    if (kind == ActivationKind::Relu && ((a.pre[v] > 0) != (b.pre[v] > 0))) return false;
    if (kind == ActivationKind::KPool && a.winner[v] != b.winner[v]) return false;
  }
  return true;
}

}  // namespace

GradCheckResult grad_check(const Architecture& arch, const ParamVector& theta,
                           std::span<const double> x, const Aggregate& aggregate, double eps,
                           std::span<const char> skip) {
  const ValueGrad vg = grad_scalar(arch, theta, x, aggregate);
  if (!skip.empty() && skip.size() != theta.size()) {
    throw Error(ErrorKind::DimensionMismatch, "skip flags must cover every coordinate");
  }
  GradCheckResult r;
  std::vector<double> coords(theta.values().begin(), theta.values().end());
  detail::EvalState base, plus, minus;
  detail::evaluate(arch, coords, x, detail::PoolMode::Select, base);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!skip.empty() && skip[i]) {
      ++r.skipped;
      continue;
    }
    const double keep = coords[i];
    coords[i] = keep + eps;
    const double fp = aggregate_value(arch, coords, x, aggregate, plus);
    coords[i] = keep - eps;
    const double fm = aggregate_value(arch, coords, x, aggregate, minus);
    coords[i] = keep;
    if (!same_pattern(arch, base, plus) || !same_pattern(arch, base, minus)) {
      ++r.skipped;
      continue;
    }
    const double fd = (fp - fm) / (2.0 * eps);
    const double g = vg.grad[i];
    const double denom = std::max({std::abs(g), std::abs(fd), 1.0});
    r.max_rel_error = std::max(r.max_rel_error, std::abs(g - fd) / denom);
    ++r.checked;
  }
  return r;
}

}  // namespace pathlift
