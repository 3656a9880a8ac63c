#include "pathlift/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "eval.hpp"
#include "pathlift/errors.hpp"
#include "pathlift/transforms.hpp"

namespace pathlift {
namespace {

double abs_pow(double v, double q) { return q == 1.0 ? std::abs(v) : std::pow(std::abs(v), q); }

void check_q(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) {
    throw Error(ErrorKind::InvalidConfig, "exponent q must be a finite value >= 1");
  }
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i]) < std::abs(b[i])) return false;
  }
  return true;
}

}  // namespace

double path_norm_fast(const Architecture& arch, const ParamVector& theta, double q) {
  check_params(arch, theta);
  check_q(q);
  std::vector<double> coords(theta.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = abs_pow(theta[i], q);
  detail::EvalState state;
  detail::evaluate_ones(arch, coords, detail::PoolMode::Sum, state);
  double total = 0.0;
  for (NeuronIndex v : arch.outputs()) total += state.value[v];
  return total;
}

Network abs_transform(const Architecture& arch, const ParamVector& theta, double q) {
  check_params(arch, theta);
  check_q(q);
  ArchitectureSpec spec = arch.spec();
  for (NeuronSpec& n : spec.neurons) {
    if (n.activation.kind == ActivationKind::KPool) n.activation = Activation::identity();
  }
  Architecture out = Architecture::validate(spec);
  // Same declaration order of edges and the same topological order, so the
  // coordinate layout carries over unchanged.
  std::vector<double> coords(theta.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = abs_pow(theta[i], q);
  return Network{std::move(out), ParamVector(std::move(coords))};
}

double path_metric_lower(const Architecture& arch, const ParamVector& theta,
                         const ParamVector& theta2) {
  return std::abs(path_norm_fast(arch, theta) - path_norm_fast(arch, theta2));
}

ExactMetric path_metric_exact_dominated(const Architecture& arch, const ParamVector& theta,
                                        const ParamVector& theta2, bool use_oracle,
                                        std::uint64_t cap) {
  check_params(arch, theta);
  check_params(arch, theta2);
  DominanceCertificate cert = DominanceCertificate::None;
  if (dominates(theta.values(), theta2.values()) || dominates(theta2.values(), theta.values())) {
    cert = DominanceCertificate::Coordinatewise;
  } else if (use_oracle && count_paths(arch) <= cap) {
    const auto paths = enumerate_paths(arch, std::nullopt, cap);
    std::vector<double> phi, phi2;
    phi.reserve(paths.size());
    phi2.reserve(paths.size());
    for (const Path& p : paths) {
      phi.push_back(path_value(arch, p, theta));
      phi2.push_back(path_value(arch, p, theta2));
    }
    if (dominates(phi, phi2) || dominates(phi2, phi)) cert = DominanceCertificate::Oracle;
  }
  if (cert == DominanceCertificate::None) {
    throw Error(ErrorKind::DominanceUnverified,
                "neither |Phi(theta)| >= |Phi(theta')| nor the reverse could be certified");
  }
  return {path_metric_lower(arch, theta, theta2), cert};
}

ArchitectureShape architecture_shape(const Architecture& arch) {
  ArchitectureShape s;
  s.width = arch.outputs().size();
  std::vector<std::size_t> longest(arch.num_neurons(), 0);
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    const auto in = arch.incoming(v);
    s.width = std::max(s.width, in.size());
    for (EdgeIndex e : in) longest[v] = std::max(longest[v], longest[arch.edge(e).src] + 1);
    s.depth = std::max(s.depth, longest[v]);
  }
  s.layers = s.depth > 0 ? s.depth - 1 : 0;
  return s;
}

namespace {

// Normalization used by the upper bounds: every hidden neuron, k-max-pool
// included, ends with ||(theta^{->v}, b_v)||_1 in {0, 1}. A dead neuron also
// loses its outgoing weights. No nonzero path crosses it, so Phi is unchanged,
// and the result no longer depends on where in the orbit theta sits.
ParamVector bound_normalize(const Architecture& arch, const ParamVector& theta) {
  ParamVector out = theta;
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    if (!arch.is_hidden(v)) continue;
    double norm = std::abs(out.bias(arch, v));
    for (EdgeIndex e : arch.incoming(v)) norm += std::abs(out[e]);
    if (norm > 0.0) {
      for (EdgeIndex e : arch.incoming(v)) out[e] /= norm;
      if (auto c = arch.bias_coord(v)) out[*c] /= norm;
      for (EdgeIndex e : arch.outgoing(v)) out[e] *= norm;
    } else {
      for (EdgeIndex e : arch.outgoing(v)) out[e] = 0.0;
    }
  }
  return out;
}

}  // namespace

double path_metric_upper(const Architecture& arch, const ParamVector& theta,
                         const ParamVector& theta2, double q, bool refined) {
  check_params(arch, theta);
  check_params(arch, theta2);
  check_q(q);
  // The q-th power form of these bounds does not hold for q > 1 (the q-th
  // power of a sum is not bounded by the sum of q-th powers), so every q
  // gets the l^1 bound, which also bounds ||.||_q.
  const ParamVector n1 = bound_normalize(arch, theta);
  const ParamVector n2 = bound_normalize(arch, theta2);
  const double min_pn = std::min(path_norm_fast(arch, theta), path_norm_fast(arch, theta2));

  if (!refined) {
    const ArchitectureShape shape = architecture_shape(arch);
    double dist = 0.0;
    for (std::size_t i = 0; i < n1.size(); ++i) dist = std::max(dist, std::abs(n1[i] - n2[i]));
    const double w = static_cast<double>(shape.width);
    const double l = static_cast<double>(shape.layers);
    return (w * w + min_pn * l * w) * dist;
  }

  // delta(u) = |b_u - b'_u| + ||theta^{->u} - theta'^{->u}||_1
  const std::size_t n = arch.num_neurons();
  std::vector<double> delta(n, 0.0);
  for (NeuronIndex v = 0; v < n; ++v) {
    if (arch.is_input(v)) continue;
    double d = std::abs(n1.bias(arch, v) - n2.bias(arch, v));
    for (EdgeIndex e : arch.incoming(v)) d += std::abs(n1[e] - n2[e]);
    delta[v] = d;
  }
  // best[u] = max over paths r ending at u of sum_{l=1}^{|r|} delta(r_l).
  std::vector<double> best(n, 0.0);
  double out_sum = 0.0;
  double path_max = 0.0;
  for (NeuronIndex v = 0; v < n; ++v) {
    if (arch.is_input(v)) continue;
    double from_ant = 0.0;
    for (EdgeIndex e : arch.incoming(v)) from_ant = std::max(from_ant, best[arch.edge(e).src]);
    best[v] = delta[v] + from_ant;
    if (arch.is_output(v)) {
      out_sum += delta[v];
      path_max = std::max(path_max, from_ant);
    }
  }
  return out_sum + min_pn * path_max;
}

std::string to_string(DominanceCertificate c) {
  switch (c) {
    case DominanceCertificate::None: return "none";
    case DominanceCertificate::Coordinatewise: return "coordinatewise";
    case DominanceCertificate::Oracle: return "oracle";
  }
  return "?";
}

PathMetricReport path_metric_report(const Architecture& arch, const ParamVector& theta,
                                    const ParamVector& theta2, std::uint64_t cap) {
  PathMetricReport r;
  r.lower = path_metric_lower(arch, theta, theta2);
  try {
    const ExactMetric ex = path_metric_exact_dominated(arch, theta, theta2, true, cap);
    r.exact = ex.value;
    r.certificate = ex.certificate;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DominanceUnverified) throw;
  }
  r.upper_coarse = path_metric_upper(arch, theta, theta2, 1.0, false);
  r.upper_refined = path_metric_upper(arch, theta, theta2, 1.0, true);
  if (count_paths(arch) <= cap) r.oracle = path_metric_oracle(arch, theta, theta2, cap);
  return r;
}

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != r * c) {
    throw Error(ErrorKind::RaggedLayers, "matrix data does not match its " + std::to_string(r) +
                                             "x" + std::to_string(c) + " shape");
  }
}

double Matrix::max_row_l1() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols; ++j) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

namespace {

void check_chain(std::span<const Matrix> layers) {
  if (layers.empty()) throw Error(ErrorKind::RaggedLayers, "an MLP needs at least one layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].data.size() != layers[l].rows * layers[l].cols) {
      throw Error(ErrorKind::RaggedLayers, "layer " + std::to_string(l + 1) + " is malformed");
    }
    if (l > 0 && layers[l].cols != layers[l - 1].rows) {
      throw Error(ErrorKind::RaggedLayers, "layer " + std::to_string(l + 1) + " expects " +
                                               std::to_string(layers[l].cols) + " inputs but layer " +
                                               std::to_string(l) + " has " +
                                               std::to_string(layers[l - 1].rows) + " outputs");
    }
  }
}

}  // namespace

MlpBounds mlp_bounds(std::span<const Matrix> layers, std::span<const Matrix> layers2,
                     std::span<const double> x) {
  check_chain(layers);
  check_chain(layers2);
  if (layers.size() != layers2.size()) {
    throw Error(ErrorKind::RaggedLayers, "the two parameter sets have different depths");
  }
  MlpBounds b;
  b.layers = layers.size();
  b.width = layers[0].cols;
  double radius = 1.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Matrix& m = layers[l];
    const Matrix& m2 = layers2[l];
    if (m.rows != m2.rows || m.cols != m2.cols) {
      throw Error(ErrorKind::RaggedLayers,
                  "layer " + std::to_string(l + 1) + " differs in shape between parameter sets");
    }
    b.width = std::max(b.width, m.rows);
    radius = std::max({radius, m.max_row_l1(), m2.max_row_l1()});
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      b.param_distance = std::max(b.param_distance, std::abs(m.data[i] - m2.data[i]));
    }
  }
  if (x.size() != layers[0].cols) {
    throw Error(ErrorKind::DimensionMismatch, "input does not match the first layer");
  }
  b.radius = radius;
  double xinf = 0.0;
  for (double v : x) xinf = std::max(xinf, std::abs(v));

  const double w = static_cast<double>(b.width);
  const double l = static_cast<double>(b.layers);
  const double r_pow = std::pow(radius, l - 1.0);
  b.path_metric_ub = l * w * w * r_pow * b.param_distance;
  b.legacy = (w * xinf + 1.0) * w * l * l * r_pow * b.param_distance;
  b.recovered_same_sign = std::max(xinf, 1.0) * b.path_metric_ub;
  b.recovered_any_sign = 2.0 * b.recovered_same_sign;
  return b;
}

Network mlp_network(std::span<const Matrix> layers) {
  check_chain(layers);
  auto name = [](std::size_t l, std::size_t i) {
    return "l" + std::to_string(l) + "_" + std::to_string(i);
  };
  ArchitectureSpec spec;
  for (std::size_t i = 0; i < layers[0].cols; ++i) spec.neurons.push_back({name(0, i), Activation::input()});
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const bool last = l + 1 == layers.size();
    for (std::size_t i = 0; i < layers[l].rows; ++i) {
      spec.neurons.push_back({name(l + 1, i), last ? Activation::identity() : Activation::relu()});
    }
  }
  std::vector<double> weights;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].rows; ++i) {
      for (std::size_t j = 0; j < layers[l].cols; ++j) {
        spec.edges.push_back({name(l, j), name(l + 1, i)});
        weights.push_back(layers[l](i, j));
      }
    }
  }
  Architecture arch = Architecture::validate(spec);
  ParamVector theta = ParamVector::zeros(arch);
  for (std::size_t e = 0; e < weights.size(); ++e) theta[e] = weights[e];
  return Network{std::move(arch), std::move(theta)};
}

}  // namespace pathlift
