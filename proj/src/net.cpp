#include "pathlift/net.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <set>

#include "eval.hpp"
#include "pathlift/errors.hpp"

namespace pathlift {

std::string to_string(const Activation& act) {
  switch (act.kind) {
    case ActivationKind::Input: return "input";
    case ActivationKind::Identity: return "identity";
    case ActivationKind::Relu: return "relu";
    case ActivationKind::KPool: return "kpool(" + std::to_string(act.k) + ")";
  }
  return "?";
}

Architecture Architecture::validate(const ArchitectureSpec& spec) { return build(spec, true); }

Architecture Architecture::build(const ArchitectureSpec& spec, bool identity_outputs) {
  const std::size_t n = spec.neurons.size();
  std::unordered_map<std::string, std::size_t> decl;
  decl.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!decl.emplace(spec.neurons[i].id, i).second) {
      throw Error(ErrorKind::DuplicateNeuron, "neuron '" + spec.neurons[i].id + "' declared twice");
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> decl_edges;
  decl_edges.reserve(spec.edges.size());
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indeg(n, 0), outdeg(n, 0);
  {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const EdgeSpec& es : spec.edges) {
      auto s = decl.find(es.src);
      auto d = decl.find(es.dst);
      if (s == decl.end() || d == decl.end()) {
        throw Error(ErrorKind::DanglingEdge, "edge " + es.src + "->" + es.dst +
                                                 " references an unknown neuron");
      }
      if (!seen.emplace(s->second, d->second).second) {
        throw Error(ErrorKind::DuplicateEdge, "edge " + es.src + "->" + es.dst + " declared twice");
      }
      decl_edges.emplace_back(s->second, d->second);
      succ[s->second].push_back(d->second);
      ++indeg[d->second];
      ++outdeg[s->second];
    }
  }

  // Kahn's algorithm, smallest id first among ready neurons.
  using Item = std::pair<std::string_view, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  std::vector<std::size_t> remaining = indeg;
  for (std::size_t i = 0; i < n; ++i) {
    if (remaining[i] == 0) ready.emplace(spec.neurons[i].id, i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::size_t i = ready.top().second;
    ready.pop();
    order.push_back(i);
    for (std::size_t j : succ[i]) {
      if (--remaining[j] == 0) ready.emplace(spec.neurons[j].id, j);
    }
  }
  if (order.size() != n) throw Error(ErrorKind::CycleDetected, "the graph contains a cycle");

  std::vector<std::size_t> pos(n);
  for (std::size_t p = 0; p < n; ++p) pos[order[p]] = p;

  Architecture a;
  a.ids_.resize(n);
  a.activations_.resize(n);
  a.index_.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    const NeuronSpec& ns = spec.neurons[order[p]];
    a.ids_[p] = ns.id;
    a.activations_[p] = ns.activation;
    a.index_.emplace(ns.id, p);
  }

  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t i = order[p];
    const Activation& act = a.activations_[p];
    const bool no_ant = indeg[i] == 0;
    if (no_ant != (act.kind == ActivationKind::Input)) {
      throw Error(ErrorKind::BadActivation,
                  "neuron '" + a.ids_[p] + "' is tagged " + to_string(act) + " but has " +
                      std::to_string(indeg[i]) + " antecedents");
    }
    if (act.kind == ActivationKind::KPool &&
        (act.k < 1 || static_cast<std::size_t>(act.k) > indeg[i])) {
      throw Error(ErrorKind::BadPoolArity, "neuron '" + a.ids_[p] + "' is kpool(" +
                                               std::to_string(act.k) + ") with " +
                                               std::to_string(indeg[i]) + " antecedents");
    }
    if (identity_outputs && outdeg[i] == 0 && !no_ant && act.kind != ActivationKind::Identity) {
      throw Error(ErrorKind::NonIdentityOutput,
                  "output neuron '" + a.ids_[p] + "' must be identity, got " + to_string(act));
    }
  }

  a.edges_.reserve(decl_edges.size());
  for (auto [s, d] : decl_edges) a.edges_.push_back(Edge{pos[s], pos[d]});

  const std::size_t m = a.edges_.size();
  a.in_offsets_.assign(n + 1, 0);
  a.out_offsets_.assign(n + 1, 0);
  for (const Edge& e : a.edges_) {
    ++a.in_offsets_[e.dst + 1];
    ++a.out_offsets_[e.src + 1];
  }
  for (std::size_t v = 0; v < n; ++v) {
    a.in_offsets_[v + 1] += a.in_offsets_[v];
    a.out_offsets_[v + 1] += a.out_offsets_[v];
  }
  a.in_edges_.resize(m);
  a.out_edges_.resize(m);
  {
    std::vector<std::size_t> in_fill(a.in_offsets_.begin(), a.in_offsets_.end() - 1);
    std::vector<std::size_t> out_fill(a.out_offsets_.begin(), a.out_offsets_.end() - 1);
    for (EdgeIndex e = 0; e < m; ++e) {
      a.in_edges_[in_fill[a.edges_[e].dst]++] = e;
      a.out_edges_[out_fill[a.edges_[e].src]++] = e;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(a.in_edges_.begin() + a.in_offsets_[v], a.in_edges_.begin() + a.in_offsets_[v + 1],
              [&](EdgeIndex x, EdgeIndex y) { return a.edges_[x].src < a.edges_[y].src; });
    std::sort(a.out_edges_.begin() + a.out_offsets_[v],
              a.out_edges_.begin() + a.out_offsets_[v + 1],
              [&](EdgeIndex x, EdgeIndex y) { return a.edges_[x].dst < a.edges_[y].dst; });
  }

  a.bias_slot_.assign(n, std::numeric_limits<std::size_t>::max());
  a.input_pos_.assign(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t v = 0; v < n; ++v) {
    if (a.is_input(v)) {
      a.input_pos_[v] = a.inputs_.size();
      a.inputs_.push_back(v);
    } else {
      a.bias_slot_[v] = a.bias_owner_.size();
      a.bias_owner_.push_back(v);
    }
    if (a.is_output(v)) a.outputs_.push_back(v);
  }
  a.num_biases_ = a.bias_owner_.size();
  return a;
}

std::optional<NeuronIndex> Architecture::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NeuronIndex Architecture::index_of(std::string_view id) const {
  auto v = find(id);
  if (!v) throw Error(ErrorKind::UnknownNeuron, "no neuron named '" + std::string(id) + "'");
  return *v;
}

std::span<const EdgeIndex> Architecture::incoming(NeuronIndex v) const {
  return std::span<const EdgeIndex>(in_edges_).subspan(in_offsets_[v],
                                                       in_offsets_[v + 1] - in_offsets_[v]);
}

std::span<const EdgeIndex> Architecture::outgoing(NeuronIndex v) const {
  return std::span<const EdgeIndex>(out_edges_).subspan(out_offsets_[v],
                                                        out_offsets_[v + 1] - out_offsets_[v]);
}

std::optional<EdgeIndex> Architecture::find_edge(NeuronIndex src, NeuronIndex dst) const {
  for (EdgeIndex e : outgoing(src)) {
    if (edges_[e].dst == dst) return e;
  }
  return std::nullopt;
}

EdgeIndex Architecture::edge_index(std::string_view src, std::string_view dst) const {
  auto e = find_edge(index_of(src), index_of(dst));
  if (!e) {
    throw Error(ErrorKind::UnknownNeuron,
                "no edge " + std::string(src) + "->" + std::string(dst));
  }
  return *e;
}

std::optional<CoordIndex> Architecture::bias_coord(NeuronIndex v) const {
  if (bias_slot_[v] == std::numeric_limits<std::size_t>::max()) return std::nullopt;
  return edges_.size() + bias_slot_[v];
}

std::string Architecture::coord_name(CoordIndex c) const {
  if (is_edge_coord(c)) return ids_[edges_[c].src] + "->" + ids_[edges_[c].dst];
  return "bias:" + ids_[bias_neuron(c)];
}

std::optional<std::size_t> Architecture::input_position(NeuronIndex v) const {
  if (input_pos_[v] == std::numeric_limits<std::size_t>::max()) return std::nullopt;
  return input_pos_[v];
}

ArchitectureSpec Architecture::spec() const {
  ArchitectureSpec s;
  s.neurons.reserve(ids_.size());
  for (std::size_t v = 0; v < ids_.size(); ++v) s.neurons.push_back({ids_[v], activations_[v]});
  s.edges.reserve(edges_.size());
  for (const Edge& e : edges_) s.edges.push_back({ids_[e.src], ids_[e.dst]});
  return s;
}

double ParamVector::bias(const Architecture& arch, NeuronIndex v) const {
  auto c = arch.bias_coord(v);
  return c ? coords_[*c] : 0.0;
}

void check_params(const Architecture& arch, const ParamVector& theta) {
  if (theta.size() != arch.num_coords()) {
    throw Error(ErrorKind::DimensionMismatch,
                "parameter vector has " + std::to_string(theta.size()) + " coordinates, expected " +
                    std::to_string(arch.num_coords()));
  }
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    if (arch.activation(v).kind == ActivationKind::KPool && theta.bias(arch, v) != 0.0) {
      throw Error(ErrorKind::InvalidParameters,
                  "k-max-pool neuron '" + arch.id(v) + "' must have a zero bias");
    }
  }
}

namespace {

void check_input(const Architecture& arch, std::span<const double> x) {
  if (x.size() != arch.inputs().size()) {
    throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " entries, network has " +
                                                  std::to_string(arch.inputs().size()) +
                                                  " inputs");
  }
}

}  // namespace

ForwardTrace forward_trace(const Architecture& arch, const ParamVector& theta,
                           std::span<const double> x) {
  check_params(arch, theta);
  check_input(arch, x);
  detail::EvalState state;
  detail::evaluate(arch, theta.values(), x, detail::PoolMode::Select, state);
  ForwardTrace t;
  t.outputs.reserve(arch.outputs().size());
  for (NeuronIndex v : arch.outputs()) t.outputs.push_back(state.value[v]);
  t.values = std::move(state.value);
  return t;
}

std::vector<double> forward(const Architecture& arch, const ParamVector& theta,
                            std::span<const double> x) {
  return forward_trace(arch, theta, x).outputs;
}

Architecture subgraph_to(const Architecture& arch, std::string_view v) {
  const NeuronIndex target = arch.index_of(v);
  std::vector<char> keep(arch.num_neurons(), 0);
  keep[target] = 1;
  for (std::size_t i = target + 1; i-- > 0;) {
    if (!keep[i]) continue;
    for (EdgeIndex e : arch.incoming(i)) keep[arch.edge(e).src] = 1;
  }
  ArchitectureSpec spec;
  for (NeuronIndex u = 0; u < arch.num_neurons(); ++u) {
    if (keep[u]) spec.neurons.push_back({arch.id(u), arch.activation(u)});
  }
  for (const Edge& e : arch.edges()) {
    if (keep[e.src] && keep[e.dst]) spec.edges.push_back({arch.id(e.src), arch.id(e.dst)});
  }
  return Architecture::build(spec, false);
}

ParamVector restrict_params(const Architecture& arch, const ParamVector& theta,
                            const Architecture& sub) {
  ParamVector out = ParamVector::zeros(sub);
  for (EdgeIndex e = 0; e < sub.num_edges(); ++e) {
    const Edge& se = sub.edge(e);
    out[e] = theta[arch.edge_index(sub.id(se.src), sub.id(se.dst))];
  }
  for (NeuronIndex v = 0; v < sub.num_neurons(); ++v) {
    if (auto c = sub.bias_coord(v)) out[*c] = theta.bias(arch, arch.index_of(sub.id(v)));
  }
  return out;
}

}  // namespace pathlift
