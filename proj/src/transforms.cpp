#include "pathlift/transforms.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "pathlift/errors.hpp"

namespace pathlift {

bool is_rescalable(const Architecture& arch, NeuronIndex v, bool include_kpool) {
  if (!arch.is_hidden(v)) return false;
  switch (arch.activation(v).kind) {
    case ActivationKind::Relu:
    case ActivationKind::Identity: return true;
    case ActivationKind::KPool: return include_kpool;
    default: return false;
  }
}

namespace {

void scale_neuron(const Architecture& arch, ParamVector& theta, NeuronIndex v, double lambda) {
  for (EdgeIndex e : arch.incoming(v)) theta[e] *= lambda;
  if (auto c = arch.bias_coord(v)) theta[*c] *= lambda;
  for (EdgeIndex e : arch.outgoing(v)) theta[e] /= lambda;
}

}  // namespace

ParamVector rescale(const Architecture& arch, const ParamVector& theta, const Rescaling& lambda) {
  check_params(arch, theta);
  for (const auto& [v, f] : lambda.factors()) {
    if (v >= arch.num_neurons() || !is_rescalable(arch, v, true)) {
      const std::string name = v < arch.num_neurons() ? arch.id(v) : std::to_string(v);
      throw Error(ErrorKind::IneligibleNeuron, "neuron '" + name + "' cannot be rescaled");
    }
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw Error(ErrorKind::NonPositiveFactor,
                  "factor for '" + arch.id(v) + "' must be positive, got " + std::to_string(f));
    }
  }
  ParamVector out = theta;
  for (const auto& [v, f] : lambda.factors()) scale_neuron(arch, out, v, f);
  return out;
}

RescalePreset RescalePreset::parse(std::string_view text) {
  if (text == "fixed") return fixed();
  constexpr std::string_view prefix = "loguniform:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string rest(text.substr(prefix.size()));
    std::istringstream is(rest);
    double lmax = 0.0;
    if ((is >> lmax) && is.eof() && lmax >= 1.0) return log_uniform(lmax);
  }
  throw Error(ErrorKind::InvalidConfig,
              "rescale preset must be 'fixed' or 'loguniform:LMAX' with LMAX >= 1, got '" +
                  std::string(text) + "'");
}

std::string to_string(const RescalePreset& preset) {
  if (preset.kind == RescalePreset::Kind::FixedFactors) return "fixed";
  std::ostringstream os;
  os << "loguniform:" << preset.lambda_max;
  return os.str();
}

Rescaling random_rescaling(const Architecture& arch, std::uint64_t seed,
                           const RescalePreset& preset, bool include_kpool) {
  static constexpr double kFixedFactors[3] = {1.0, 128.0, 4096.0};
  std::mt19937_64 rng(seed);
  Rescaling r;
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    if (!is_rescalable(arch, v, include_kpool)) continue;
    const std::uint64_t draw = rng();
    if (preset.kind == RescalePreset::Kind::FixedFactors) {
      r.set(v, kFixedFactors[draw % 3]);
    } else {
      const double u = static_cast<double>(draw >> 11) * 0x1.0p-53;
      r.set(v, std::exp((2.0 * u - 1.0) * std::log(preset.lambda_max)));
    }
  }
  return r;
}

ParamVector normalize(const Architecture& arch, const ParamVector& theta,
                      NormalizeOptions options) {
  check_params(arch, theta);
  ParamVector out = theta;
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    if (!is_rescalable(arch, v, options.include_kpool)) continue;
    double norm = std::abs(out.bias(arch, v));
    for (EdgeIndex e : arch.incoming(v)) norm += std::abs(out[e]);
    if (!(norm > 0.0)) continue;
    for (EdgeIndex e : arch.incoming(v)) out[e] /= norm;
    if (auto c = arch.bias_coord(v)) out[*c] /= norm;
    for (EdgeIndex e : arch.outgoing(v)) out[e] *= norm;
  }
  return out;
}

}  // namespace pathlift
