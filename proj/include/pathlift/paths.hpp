#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathlift/net.hpp"

namespace pathlift {

struct Path {
  std::vector<NeuronIndex> neurons;  // v_0 .. v_d
  std::vector<EdgeIndex> edges;      // d edges

  NeuronIndex start() const { return neurons.front(); }
  NeuronIndex end() const { return neurons.back(); }
  std::size_t length() const { return edges.size(); }

  friend bool operator==(const Path&, const Path&) = default;
};

std::string path_string(const Architecture& arch, const Path& p);

/// Cap read from PATHLIFT_PATH_CAP, defaulting to 1e6.
std::uint64_t default_path_cap();

/// Number of paths ending at an output neuron (or at `end`), by dynamic
/// programming over the topological order. Saturates at UINT64_MAX.
std::uint64_t count_paths(const Architecture& arch, std::optional<NeuronIndex> end = {});

/// All paths ending at output neurons (or at `end`), sorted by end neuron,
/// then start neuron, then lexicographically by neuron sequence. Throws
/// PathExplosionError when the count exceeds cap.
std::vector<Path> enumerate_paths(const Architecture& arch, std::optional<NeuronIndex> end = {},
                                  std::uint64_t cap = default_path_cap());

/// Phi_p(theta): product of weights along p, times the bias of p_0 when p_0
/// is not an input neuron.
double path_value(const Architecture& arch, const Path& p, const ParamVector& theta);

struct PathLifting {
  std::vector<Path> paths;
  std::vector<double> values;
  std::vector<char> from_input;  // 1 for input-starting paths (Phi^I block)

  std::vector<double> input_block() const;
  std::vector<double> hidden_block() const;
  double l1_norm() const;
};

PathLifting path_lifting(const Architecture& arch, const ParamVector& theta,
                         std::uint64_t cap = default_path_cap());
// Evaluates Phi on an already enumerated path list.
PathLifting path_lifting(const Architecture& arch, std::vector<Path> paths,
                         const ParamVector& theta);

/// Binary path-activation vector a(theta, x) in canonical path order.
std::vector<std::uint8_t> path_activations(const Architecture& arch, const ParamVector& theta,
                                           std::span<const double> x,
                                           std::uint64_t cap = default_path_cap());
std::vector<std::uint8_t> path_activations(const Architecture& arch, std::span<const Path> paths,
                                           const ParamVector& theta, std::span<const double> x);

/// Fixed incidence matrix: one row per path, columns are the inputs (in
/// arch.inputs() order) followed by a bias column.
class IncidenceMatrix {
 public:
  IncidenceMatrix(std::size_t num_inputs, std::vector<std::size_t> row_columns)
      : cols_(num_inputs + 1), row_col_(std::move(row_columns)) {}

  std::size_t rows() const { return row_col_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t bias_column() const { return cols_ - 1; }
  std::uint8_t at(std::size_t row, std::size_t col) const { return row_col_[row] == col ? 1 : 0; }
  // Column holding the single 1 of a row.
  std::size_t column_of(std::size_t row) const { return row_col_[row]; }

  friend bool operator==(const IncidenceMatrix&, const IncidenceMatrix&) = default;

 private:
  std::size_t cols_;
  std::vector<std::size_t> row_col_;
};

IncidenceMatrix incidence_matrix(const Architecture& arch, std::uint64_t cap = default_path_cap());
IncidenceMatrix incidence_matrix(const Architecture& arch, std::span<const Path> paths);

/// Per output v: <Phi^{->v}(theta) * a^{->v}(theta,x), A^{->v} (x; 1)>.
std::vector<double> linearized_output(const Architecture& arch, const ParamVector& theta,
                                      std::span<const double> x,
                                      std::uint64_t cap = default_path_cap());

/// Oracle l^1 path-metric ||Phi(theta) - Phi(theta')||_1 by enumeration.
double path_metric_oracle(const Architecture& arch, const ParamVector& theta,
                          const ParamVector& theta2, std::uint64_t cap = default_path_cap());

/// Tab-separated dump, one path per row: path string, value.
void write_path_table(std::ostream& os, const Architecture& arch, std::span<const Path> paths,
                      std::span<const double> values);

}  // namespace pathlift
