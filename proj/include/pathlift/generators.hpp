#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pathlift/net.hpp"
#include "pathlift/pruning.hpp"

namespace pathlift {

struct RandomDagOptions {
  std::size_t max_inputs = 3;
  std::size_t max_hidden_layers = 3;  // plus the input and output layers: at most 5
  std::size_t max_width = 6;
  std::size_t max_outputs = 3;
  double skip_probability = 0.2;  // extra edge from an earlier layer
  double weight_scale = 2.0;      // weights uniform in [-scale, scale]
  double bias_scale = 1.0;        // biases uniform in [-scale, scale], 0 on k-max-pool
  bool allow_kpool = true;
  bool allow_identity = true;
};

/// Layered DAG with skip edges; hidden neurons are ReLU, identity or k-max-pool
/// (k uniform in 1..|ant|), outputs identity. Every hidden neuron has a successor.
Network random_dag(std::mt19937_64& rng, const RandomDagOptions& options = {});

/// Fresh parameters for an existing architecture (same distributions as random_dag).
ParamVector random_params(const Architecture& arch, std::mt19937_64& rng,
                          const RandomDagOptions& options = {});

std::vector<double> random_input(const Architecture& arch, std::mt19937_64& rng,
                                 double scale = 3.0);

/// theta' with theta_i * theta'_i >= 0: each coordinate is zeroed with
/// probability zero_probability, otherwise multiplied by exp(U(-1.5, 1.5)).
ParamVector same_sign_partner(const ParamVector& theta, std::mt19937_64& rng,
                              double zero_probability = 0.1);

/// Mask dropping each candidate coordinate independently with probability p.
Mask random_mask(std::size_t n, std::mt19937_64& rng, double p = 0.3);

/// CNN-shaped DAG: 3x16x16 input, 3x3 convolution to 10 channels (ReLU), 2x2
/// max-pool as kpool(1), 3x3 convolution to 16 channels (ReLU), dense to 10
/// identity outputs. Weights are not shared. About 9.5e4 edges.
Network cnn_dag(std::mt19937_64& rng);

}  // namespace pathlift
