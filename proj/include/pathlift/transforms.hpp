#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "pathlift/net.hpp"

namespace pathlift {

/// Positive per-neuron factors; neurons absent from the map have factor 1.
class Rescaling {
 public:
  Rescaling() = default;

  void set(NeuronIndex v, double factor) { factors_[v] = factor; }
  double factor(NeuronIndex v) const {
    auto it = factors_.find(v);
    return it == factors_.end() ? 1.0 : it->second;
  }
  const std::map<NeuronIndex, double>& factors() const { return factors_; }
  bool empty() const { return factors_.empty(); }

 private:
  std::map<NeuronIndex, double> factors_;
};

/// Hidden neurons whose rescaling leaves the realization unchanged: ReLU and
/// identity always, k-max-pool when include_kpool is set.
bool is_rescalable(const Architecture& arch, NeuronIndex v, bool include_kpool = true);

/// lambda . theta: incoming weights and bias of v times lambda_v, outgoing
/// weights divided by lambda_v. Throws NonPositiveFactor or IneligibleNeuron.
ParamVector rescale(const Architecture& arch, const ParamVector& theta, const Rescaling& lambda);

struct RescalePreset {
  enum class Kind { FixedFactors, LogUniform };
  Kind kind = Kind::FixedFactors;
  double lambda_max = 1.0;  // LogUniform only

  static RescalePreset fixed() { return {Kind::FixedFactors, 1.0}; }
  static RescalePreset log_uniform(double lambda_max) { return {Kind::LogUniform, lambda_max}; }
  // "fixed" or "loguniform:LMAX". Throws InvalidConfig.
  static RescalePreset parse(std::string_view text);
};

std::string to_string(const RescalePreset& preset);

/// Draws one factor per rescalable neuron, in topological order, from a
/// std::mt19937_64 seeded with `seed`. Each neuron consumes exactly one
/// 64-bit draw r: FixedFactors picks {1, 128, 4096}[r % 3]; LogUniform maps
/// u = (r >> 11) * 2^-53 to exp((2u - 1) ln lambda_max).
Rescaling random_rescaling(const Architecture& arch, std::uint64_t seed,
                           const RescalePreset& preset, bool include_kpool = false);

struct NormalizeOptions {
  bool include_kpool = false;
};

/// Canonical orbit representative: every rescalable hidden neuron ends with
/// ||(incoming weights, bias)||_1 in {0, 1}. Neurons are visited in
/// topological order; a neuron whose norm is 0 is left untouched.
ParamVector normalize(const Architecture& arch, const ParamVector& theta,
                      NormalizeOptions options = {});

}  // namespace pathlift
