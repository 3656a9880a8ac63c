#include "pathlift/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>

#include "eval.hpp"
#include "pathlift/errors.hpp"

namespace pathlift {
namespace {

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

// reach[v] = 1 iff v has a directed path to one of the targets.
std::vector<char> reaching(const Architecture& arch, std::optional<NeuronIndex> end) {
  std::vector<char> reach(arch.num_neurons(), 0);
  if (end) {
    reach[*end] = 1;
  } else {
    for (NeuronIndex v : arch.outputs()) reach[v] = 1;
  }
  for (std::size_t i = arch.num_neurons(); i-- > 0;) {
    if (!reach[i]) continue;
    for (EdgeIndex e : arch.incoming(i)) reach[arch.edge(e).src] = 1;
  }
  return reach;
}

bool is_target(const Architecture& arch, std::optional<NeuronIndex> end, NeuronIndex v) {
  return end ? v == *end : arch.is_output(v);
}

void extend(const Architecture& arch, std::optional<NeuronIndex> end,
            const std::vector<char>& reach, Path& cur, std::vector<Path>& out) {
  const NeuronIndex v = cur.end();
  if (is_target(arch, end, v)) {
    out.push_back(cur);
    return;  // targets have no onward path back to a target in a DAG
  }
  for (EdgeIndex e : arch.outgoing(v)) {
    const NeuronIndex w = arch.edge(e).dst;
    if (!reach[w]) continue;
    cur.neurons.push_back(w);
    cur.edges.push_back(e);
    extend(arch, end, reach, cur, out);
    cur.neurons.pop_back();
    cur.edges.pop_back();
  }
}

}  // namespace

std::string path_string(const Architecture& arch, const Path& p) {
  std::string s;
  for (std::size_t i = 0; i < p.neurons.size(); ++i) {
    if (i) s += "->";
    s += arch.id(p.neurons[i]);
  }
  return s;
}

std::uint64_t default_path_cap() {
  if (const char* env = std::getenv("PATHLIFT_PATH_CAP")) {
    char* tail = nullptr;
    const unsigned long long v = std::strtoull(env, &tail, 10);
    if (tail != env && *tail == '\0' && v > 0) return v;
  }
  return 1000000;
}

std::uint64_t count_paths(const Architecture& arch, std::optional<NeuronIndex> end) {
  // ending[v] = number of paths (any start) ending at v.
  std::vector<std::uint64_t> ending(arch.num_neurons(), 1);
  std::uint64_t total = 0;
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    for (EdgeIndex e : arch.incoming(v)) ending[v] = sat_add(ending[v], ending[arch.edge(e).src]);
    if (is_target(arch, end, v)) total = sat_add(total, ending[v]);
  }
  return total;
}

std::vector<Path> enumerate_paths(const Architecture& arch, std::optional<NeuronIndex> end,
                                  std::uint64_t cap) {
  const std::uint64_t count = count_paths(arch, end);
  if (count > cap) throw PathExplosionError(count, cap);
  const auto reach = reaching(arch, end);
  std::vector<Path> out;
  out.reserve(count);
  Path cur;
  for (NeuronIndex s = 0; s < arch.num_neurons(); ++s) {
    if (!reach[s]) continue;
    cur.neurons.assign(1, s);
    cur.edges.clear();
    extend(arch, end, reach, cur, out);
  }
  // DFS already yields (start, lexicographic) order; group by end neuron.
  std::stable_sort(out.begin(), out.end(),
                   [](const Path& a, const Path& b) { return a.end() < b.end(); });
  return out;
}

double path_value(const Architecture& arch, const Path& p, const ParamVector& theta) {
  double v = arch.is_input(p.start()) ? 1.0 : theta.bias(arch, p.start());
  for (EdgeIndex e : p.edges) v *= theta[e];
  return v;
}

std::vector<double> PathLifting::input_block() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (from_input[i]) out.push_back(values[i]);
  }
  return out;
}

std::vector<double> PathLifting::hidden_block() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!from_input[i]) out.push_back(values[i]);
  }
  return out;
}

double PathLifting::l1_norm() const {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s;
}

PathLifting path_lifting(const Architecture& arch, std::vector<Path> paths,
                         const ParamVector& theta) {
  check_params(arch, theta);
  PathLifting pl;
  pl.values.reserve(paths.size());
  pl.from_input.reserve(paths.size());
  for (const Path& p : paths) {
    pl.values.push_back(path_value(arch, p, theta));
    pl.from_input.push_back(arch.is_input(p.start()) ? 1 : 0);
  }
  pl.paths = std::move(paths);
  return pl;
}

PathLifting path_lifting(const Architecture& arch, const ParamVector& theta, std::uint64_t cap) {
  return path_lifting(arch, enumerate_paths(arch, std::nullopt, cap), theta);
}

std::vector<std::uint8_t> path_activations(const Architecture& arch, std::span<const Path> paths,
                                           const ParamVector& theta, std::span<const double> x) {
  check_params(arch, theta);
  if (x.size() != arch.inputs().size()) {
    throw Error(ErrorKind::DimensionMismatch, "input size does not match the network inputs");
  }
  detail::EvalState state;
  detail::evaluate(arch, theta.values(), x, detail::PoolMode::Select, state);

  auto neuron_active = [&](NeuronIndex v) -> bool {
    return arch.activation(v).kind != ActivationKind::Relu || state.value[v] > 0.0;
  };
  auto edge_active = [&](EdgeIndex e) -> bool {
    const NeuronIndex v = arch.edge(e).dst;
    switch (arch.activation(v).kind) {
      case ActivationKind::Relu: return state.value[v] > 0.0;
      case ActivationKind::KPool: return state.winner[v] == e;
      default: return true;
    }
  };

  std::vector<std::uint8_t> a;
  a.reserve(paths.size());
  for (const Path& p : paths) {
    bool on = neuron_active(p.start());
    for (std::size_t i = 0; on && i < p.edges.size(); ++i) on = edge_active(p.edges[i]);
    a.push_back(on ? 1 : 0);
  }
  return a;
}

std::vector<std::uint8_t> path_activations(const Architecture& arch, const ParamVector& theta,
                                           std::span<const double> x, std::uint64_t cap) {
  const auto paths = enumerate_paths(arch, std::nullopt, cap);
  return path_activations(arch, paths, theta, x);
}

IncidenceMatrix incidence_matrix(const Architecture& arch, std::span<const Path> paths) {
  const std::size_t bias_col = arch.inputs().size();
  std::vector<std::size_t> cols;
  cols.reserve(paths.size());
  for (const Path& p : paths) cols.push_back(arch.input_position(p.start()).value_or(bias_col));
  return IncidenceMatrix(arch.inputs().size(), std::move(cols));
}

IncidenceMatrix incidence_matrix(const Architecture& arch, std::uint64_t cap) {
  const auto paths = enumerate_paths(arch, std::nullopt, cap);
  return incidence_matrix(arch, paths);
}

std::vector<double> linearized_output(const Architecture& arch, const ParamVector& theta,
                                      std::span<const double> x, std::uint64_t cap) {
  const PathLifting pl = path_lifting(arch, theta, cap);
  const auto a = path_activations(arch, pl.paths, theta, x);
  const IncidenceMatrix inc = incidence_matrix(arch, pl.paths);

  std::vector<double> out(arch.outputs().size(), 0.0);
  std::vector<std::size_t> out_pos(arch.num_neurons(), 0);
  for (std::size_t o = 0; o < arch.outputs().size(); ++o) out_pos[arch.outputs()[o]] = o;
  for (std::size_t r = 0; r < pl.paths.size(); ++r) {
    if (!a[r]) continue;
    const std::size_t col = inc.column_of(r);
    const double feature = col == inc.bias_column() ? 1.0 : x[col];
    out[out_pos[pl.paths[r].end()]] += pl.values[r] * feature;
  }
  return out;
}

double path_metric_oracle(const Architecture& arch, const ParamVector& theta,
                          const ParamVector& theta2, std::uint64_t cap) {
  check_params(arch, theta2);
  const PathLifting pl = path_lifting(arch, theta, cap);
  double s = 0.0;
  for (std::size_t i = 0; i < pl.paths.size(); ++i) {
    s += std::abs(pl.values[i] - path_value(arch, pl.paths[i], theta2));
  }
  return s;
}

void write_path_table(std::ostream& os, const Architecture& arch, std::span<const Path> paths,
                      std::span<const double> values) {
  const auto old = os.precision(17);
  os << "path\tvalue\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    os << path_string(arch, paths[i]) << '\t' << values[i] << '\n';
  }
  os.precision(old);
}

}  // namespace pathlift
