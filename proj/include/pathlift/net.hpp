#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pathlift {

using NeuronIndex = std::size_t;
using EdgeIndex = std::size_t;
using CoordIndex = std::size_t;

enum class ActivationKind { Input, Identity, Relu, KPool };

struct Activation {
  ActivationKind kind = ActivationKind::Identity;
  int k = 0;  // only meaningful for KPool

  static Activation input() { return {ActivationKind::Input, 0}; }
  static Activation identity() { return {ActivationKind::Identity, 0}; }
  static Activation relu() { return {ActivationKind::Relu, 0}; }
  static Activation kpool(int k) { return {ActivationKind::KPool, k}; }

  friend bool operator==(const Activation&, const Activation&) = default;
};

std::string to_string(const Activation& act);

// Unvalidated description of a network graph, as read from a file.
struct NeuronSpec {
  std::string id;
  Activation activation;
};

struct EdgeSpec {
  std::string src;
  std::string dst;
};

struct ArchitectureSpec {
  std::vector<NeuronSpec> neurons;
  std::vector<EdgeSpec> edges;
};

struct Edge {
  NeuronIndex src;
  NeuronIndex dst;
};

/// A validated DAG-ReLU architecture.
///
/// Neurons are stored in a fixed topological order (Kahn's algorithm, ready
/// neurons taken by smallest id), and every neuron index below refers to a
/// position in that order. Edges keep their declaration order. The parameter
/// coordinate set is the edges (coordinates 0..E-1) followed by one bias per
/// non-input neuron in topological order.
class Architecture {
 public:
  /// Throws Error with kind CycleDetected, DanglingEdge, BadPoolArity,
  /// NonIdentityOutput, BadActivation, DuplicateNeuron or DuplicateEdge.
  static Architecture validate(const ArchitectureSpec& spec);

  std::size_t num_neurons() const { return ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_coords() const { return edges_.size() + num_biases_; }

  const std::string& id(NeuronIndex v) const { return ids_[v]; }
  const Activation& activation(NeuronIndex v) const { return activations_[v]; }
  std::optional<NeuronIndex> find(std::string_view id) const;
  // Throws UnknownNeuron.
  NeuronIndex index_of(std::string_view id) const;

  bool is_input(NeuronIndex v) const { return in_offsets_[v] == in_offsets_[v + 1]; }
  bool is_output(NeuronIndex v) const { return out_offsets_[v] == out_offsets_[v + 1]; }
  bool is_hidden(NeuronIndex v) const { return !is_input(v) && !is_output(v); }

  std::span<const NeuronIndex> inputs() const { return inputs_; }
  std::span<const NeuronIndex> outputs() const { return outputs_; }

  const Edge& edge(EdgeIndex e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }
  // Incoming edges sorted by source position in the topological order.
  std::span<const EdgeIndex> incoming(NeuronIndex v) const;
  // Outgoing edges sorted by destination position in the topological order.
  std::span<const EdgeIndex> outgoing(NeuronIndex v) const;
  std::optional<EdgeIndex> find_edge(NeuronIndex src, NeuronIndex dst) const;
  // Throws UnknownNeuron if either end is unknown or the edge does not exist.
  EdgeIndex edge_index(std::string_view src, std::string_view dst) const;

  CoordIndex edge_coord(EdgeIndex e) const { return e; }
  std::optional<CoordIndex> bias_coord(NeuronIndex v) const;
  bool is_edge_coord(CoordIndex c) const { return c < edges_.size(); }
  // Neuron owning a bias coordinate.
  NeuronIndex bias_neuron(CoordIndex c) const { return bias_owner_[c - edges_.size()]; }
  // "src->dst" for edges, "bias:id" for biases.
  std::string coord_name(CoordIndex c) const;

  // Position of an input neuron among inputs(), or nullopt.
  std::optional<std::size_t> input_position(NeuronIndex v) const;

  ArchitectureSpec spec() const;

 private:
  friend Architecture subgraph_to(const Architecture&, std::string_view);
  static Architecture build(const ArchitectureSpec& spec, bool identity_outputs);

  std::vector<std::string> ids_;
  std::vector<Activation> activations_;
  std::unordered_map<std::string, NeuronIndex> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> in_offsets_, out_offsets_;
  std::vector<EdgeIndex> in_edges_, out_edges_;
  std::vector<NeuronIndex> inputs_, outputs_;
  std::vector<std::size_t> bias_slot_;  // SIZE_MAX for inputs
  std::vector<NeuronIndex> bias_owner_;
  std::vector<std::size_t> input_pos_;
  std::size_t num_biases_ = 0;
};

inline Architecture validate_architecture(const ArchitectureSpec& spec) {
  return Architecture::validate(spec);
}

/// One weight per edge followed by one bias per non-input neuron.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> coords) : coords_(std::move(coords)) {}

  static ParamVector zeros(const Architecture& arch) {
    return ParamVector(std::vector<double>(arch.num_coords(), 0.0));
  }

  std::size_t size() const { return coords_.size(); }
  double operator[](CoordIndex c) const { return coords_[c]; }
  double& operator[](CoordIndex c) { return coords_[c]; }
  std::span<const double> values() const { return coords_; }
  std::span<double> values() { return coords_; }

  double weight(EdgeIndex e) const { return coords_[e]; }
  double bias(const Architecture& arch, NeuronIndex v) const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> coords_;
};

/// Throws DimensionMismatch on size mismatch and InvalidParameters when a
/// k-max-pool neuron carries a nonzero bias.
void check_params(const Architecture& arch, const ParamVector& theta);

struct ForwardTrace {
  std::vector<double> outputs;  // over arch.outputs()
  std::vector<double> values;   // v(theta, x) for every neuron
};

/// Realization R_theta(x), outputs ordered as arch.outputs(). Throws
/// DimensionMismatch if x does not match the input count.
std::vector<double> forward(const Architecture& arch, const ParamVector& theta,
                            std::span<const double> x);
ForwardTrace forward_trace(const Architecture& arch, const ParamVector& theta,
                           std::span<const double> x);

/// Subgraph keeping only neurons with a directed path to v; v becomes the
/// single output and keeps its own activation (it may be a ReLU).
Architecture subgraph_to(const Architecture& arch, std::string_view v);
ParamVector restrict_params(const Architecture& arch, const ParamVector& theta,
                            const Architecture& sub);

// Bundled architecture and parameters, used by file I/O and generators.
struct Network {
  Architecture arch;
  ParamVector theta;
};

}  // namespace pathlift
