#pragma once

// Internal single-pass DAG evaluator shared by forward, the fast path-norm and
// the reverse-mode tape.

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pathlift/net.hpp"

namespace pathlift::detail {

enum class PoolMode {
  Select,  // k-th largest antecedent term, lexicographic tie-break
  Sum,     // b + sum of antecedent terms (path-norm transform)
};

inline constexpr EdgeIndex kNoEdge = std::numeric_limits<EdgeIndex>::max();

struct EvalState {
  std::vector<double> value;     // per neuron
  std::vector<double> pre;       // pre-activation (ReLU / identity / sum-pool)
  std::vector<EdgeIndex> winner; // selected incoming edge of k-max-pool neurons
};

// coords must already be checked against arch; x has one entry per input.
void evaluate(const Architecture& arch, std::span<const double> coords,
              std::span<const double> x, PoolMode mode, EvalState& state);

// Same as evaluate, with inputs all set to one.
void evaluate_ones(const Architecture& arch, std::span<const double> coords, PoolMode mode,
                   EvalState& state);

// Reverse sweep. out_adjoint is indexed like arch.outputs(); grad receives
// d(sum_o out_adjoint[o] * output_o)/d(coords), added into its contents.
void backward(const Architecture& arch, std::span<const double> coords, const EvalState& state,
              PoolMode mode, std::span<const double> out_adjoint, std::span<double> grad);

}  // namespace pathlift::detail
