#include "eval.hpp"

#include <algorithm>
#include <functional>

namespace pathlift::detail {
namespace {

double bias_of(const Architecture& arch, std::span<const double> coords, NeuronIndex v) {
  auto c = arch.bias_coord(v);
  return c ? coords[*c] : 0.0;
}

void run(const Architecture& arch, std::span<const double> coords, std::span<const double> x,
         bool ones, PoolMode mode, EvalState& state) {
  const std::size_t n = arch.num_neurons();
  state.value.assign(n, 0.0);
  state.pre.assign(n, 0.0);
  state.winner.assign(n, kNoEdge);
  std::vector<double> terms;

  std::size_t next_input = 0;
  for (NeuronIndex v = 0; v < n; ++v) {
    if (arch.is_input(v)) {
      state.value[v] = ones ? 1.0 : x[next_input];
      ++next_input;
      continue;
    }
    const double b = bias_of(arch, coords, v);
    const auto in = arch.incoming(v);
    const Activation& act = arch.activation(v);
    if (act.kind == ActivationKind::KPool && mode == PoolMode::Select) {
      terms.resize(in.size());
      for (std::size_t j = 0; j < in.size(); ++j) {
        const EdgeIndex e = in[j];
        terms[j] = b + state.value[arch.edge(e).src] * coords[e];
      }
      std::vector<double> sorted = terms;
      const auto kth = sorted.begin() + (act.k - 1);
      std::nth_element(sorted.begin(), kth, sorted.end(), std::greater<>());
      const double target = *kth;
      for (std::size_t j = 0; j < in.size(); ++j) {
        if (terms[j] == target) {
          state.winner[v] = in[j];
          break;
        }
      }
      state.value[v] = target;
      state.pre[v] = target;
      continue;
    }
    double s = b;
    for (const EdgeIndex e : in) s += state.value[arch.edge(e).src] * coords[e];
    state.pre[v] = s;
    state.value[v] = (act.kind == ActivationKind::Relu) ? (s > 0.0 ? s : 0.0) : s;
  }
}

}  // namespace

void evaluate(const Architecture& arch, std::span<const double> coords,
              std::span<const double> x, PoolMode mode, EvalState& state) {
  run(arch, coords, x, false, mode, state);
}

void evaluate_ones(const Architecture& arch, std::span<const double> coords, PoolMode mode,
                   EvalState& state) {
  run(arch, coords, {}, true, mode, state);
}

void backward(const Architecture& arch, std::span<const double> coords, const EvalState& state,
              PoolMode mode, std::span<const double> out_adjoint, std::span<double> grad) {
  const std::size_t n = arch.num_neurons();
  std::vector<double> adj(n, 0.0);
  const auto outs = arch.outputs();
  for (std::size_t o = 0; o < outs.size(); ++o) adj[outs[o]] += out_adjoint[o];

  for (std::size_t i = n; i-- > 0;) {
    const NeuronIndex v = i;
    if (arch.is_input(v)) continue;
    double g = adj[v];
    if (g == 0.0) continue;
    const Activation& act = arch.activation(v);
    const auto bc = arch.bias_coord(v);
    if (act.kind == ActivationKind::KPool && mode == PoolMode::Select) {
      const EdgeIndex e = state.winner[v];
      if (bc) grad[*bc] += g;
      const NeuronIndex u = arch.edge(e).src;
      grad[e] += g * state.value[u];
      adj[u] += g * coords[e];
      continue;
    }
    // ReLU subgradient is 0 at exactly 0.
    if (act.kind == ActivationKind::Relu && !(state.pre[v] > 0.0)) continue;
    if (bc) grad[*bc] += g;
    for (const EdgeIndex e : arch.incoming(v)) {
      const NeuronIndex u = arch.edge(e).src;
      grad[e] += g * state.value[u];
      adj[u] += g * coords[e];
    }
  }
}

}  // namespace pathlift::detail
