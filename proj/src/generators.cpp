#include "pathlift/generators.hpp"

#include <algorithm>
#include <cmath>

namespace pathlift {
namespace {

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

}  // namespace

Network random_dag(std::mt19937_64& rng, const RandomDagOptions& opt) {
  std::vector<std::vector<std::string>> layers;
  const std::size_t hidden = uniform_int(rng, 1, opt.max_hidden_layers);
  layers.resize(hidden + 2);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::size_t w;
    if (l == 0) {
      w = uniform_int(rng, 1, opt.max_inputs);
    } else if (l + 1 == layers.size()) {
      w = uniform_int(rng, 1, opt.max_outputs);
    } else {
      w = uniform_int(rng, 1, opt.max_width);
    }
    for (std::size_t i = 0; i < w; ++i) {
      const char tag = l == 0 ? 'x' : (l + 1 == layers.size() ? 'y' : 'h');
      std::string id(1, tag);
      if (tag == 'h') id += std::to_string(l);
      id += "_" + std::to_string(i);
      layers[l].push_back(id);
    }
  }

  ArchitectureSpec spec;
  auto flat = [&](std::size_t l, std::size_t i) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < l; ++j) off += layers[j].size();
    return off + i;
  };
  std::vector<std::string> ids;
  for (const auto& layer : layers) ids.insert(ids.end(), layer.begin(), layer.end());
  std::vector<std::vector<char>> adj(ids.size(), std::vector<char>(ids.size(), 0));

  for (std::size_t l = 1; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].size(); ++i) {
      const std::size_t v = flat(l, i);
      // Each previous-layer neuron feeds v with probability 0.7; at least one.
      bool any = false;
      for (std::size_t j = 0; j < layers[l - 1].size(); ++j) {
        if (coin(rng, 0.7)) {
          adj[flat(l - 1, j)][v] = 1;
          any = true;
        }
      }
      if (!any) adj[flat(l - 1, uniform_int(rng, 0, layers[l - 1].size() - 1))][v] = 1;
      if (l >= 2 && coin(rng, opt.skip_probability)) {
        const std::size_t sl = uniform_int(rng, 0, l - 2);
        adj[flat(sl, uniform_int(rng, 0, layers[sl].size() - 1))][v] = 1;
      }
    }
  }
  // Hidden neurons without a successor get one in the next layer.
  for (std::size_t l = 1; l + 1 < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].size(); ++i) {
      const std::size_t u = flat(l, i);
      if (std::find(adj[u].begin(), adj[u].end(), 1) == adj[u].end()) {
        adj[u][flat(l + 1, uniform_int(rng, 0, layers[l + 1].size() - 1))] = 1;
      }
    }
  }
  // Same for inputs.
  for (std::size_t i = 0; i < layers[0].size(); ++i) {
    const std::size_t u = flat(0, i);
    if (std::find(adj[u].begin(), adj[u].end(), 1) == adj[u].end()) {
      adj[u][flat(1, uniform_int(rng, 0, layers[1].size() - 1))] = 1;
    }
  }

  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].size(); ++i) {
      const std::size_t v = flat(l, i);
      Activation act = Activation::identity();
      if (l == 0) {
        act = Activation::input();
      } else if (l + 1 < layers.size()) {
        std::size_t fan_in = 0;
        for (std::size_t u = 0; u < ids.size(); ++u) fan_in += adj[u][v];
        const double r = uniform(rng, 0.0, 1.0);
        if (opt.allow_kpool && r < 0.2) {
          act = Activation::kpool(static_cast<int>(uniform_int(rng, 1, fan_in)));
        } else if (opt.allow_identity && r < 0.4) {
          act = Activation::identity();
        } else {
          act = Activation::relu();
        }
      }
      spec.neurons.push_back({ids[v], act});
    }
  }
  for (std::size_t u = 0; u < ids.size(); ++u) {
    for (std::size_t v = 0; v < ids.size(); ++v) {
      if (adj[u][v]) spec.edges.push_back({ids[u], ids[v]});
    }
  }
  Architecture arch = Architecture::validate(spec);
  ParamVector theta = random_params(arch, rng, opt);
  return Network{std::move(arch), std::move(theta)};
}

ParamVector random_params(const Architecture& arch, std::mt19937_64& rng,
                          const RandomDagOptions& opt) {
  ParamVector theta = ParamVector::zeros(arch);
  for (EdgeIndex e = 0; e < arch.num_edges(); ++e) {
    theta[e] = uniform(rng, -opt.weight_scale, opt.weight_scale);
  }
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    const auto c = arch.bias_coord(v);
    if (!c) continue;
    theta[*c] = arch.activation(v).kind == ActivationKind::KPool
                    ? 0.0
                    : uniform(rng, -opt.bias_scale, opt.bias_scale);
  }
  return theta;
}

std::vector<double> random_input(const Architecture& arch, std::mt19937_64& rng, double scale) {
  std::vector<double> x(arch.inputs().size());
  for (double& v : x) v = uniform(rng, -scale, scale);
  return x;
}

ParamVector same_sign_partner(const ParamVector& theta, std::mt19937_64& rng,
                              double zero_probability) {
  ParamVector out = theta;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (coin(rng, zero_probability)) {
      out[i] = 0.0;
    } else {
      out[i] *= std::exp(uniform(rng, -1.5, 1.5));
    }
  }
  return out;
}

Mask random_mask(std::size_t n, std::mt19937_64& rng, double p) {
  Mask m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (coin(rng, p)) m.drop(i);
  }
  return m;
}

Network cnn_dag(std::mt19937_64& rng) {
  ArchitectureSpec spec;
  auto name = [](const char* layer, std::size_t c, std::size_t i, std::size_t j) {
    return std::string(layer) + std::to_string(c) + "_" + std::to_string(i) + "_" + std::to_string(j);
  };
  constexpr std::size_t kIn = 16, kC1 = 10, kS1 = 14, kP = 7, kC2 = 16, kS2 = 5, kOut = 10;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < kIn; ++i)
      for (std::size_t j = 0; j < kIn; ++j) spec.neurons.push_back({name("x", c, i, j), Activation::input()});
  for (std::size_t c = 0; c < kC1; ++c)
    for (std::size_t i = 0; i < kS1; ++i)
      for (std::size_t j = 0; j < kS1; ++j) {
        spec.neurons.push_back({name("a", c, i, j), Activation::relu()});
        for (std::size_t ci = 0; ci < 3; ++ci)
          for (std::size_t di = 0; di < 3; ++di)
            for (std::size_t dj = 0; dj < 3; ++dj)
              spec.edges.push_back({name("x", ci, i + di, j + dj), name("a", c, i, j)});
      }
  for (std::size_t c = 0; c < kC1; ++c)
    for (std::size_t i = 0; i < kP; ++i)
      for (std::size_t j = 0; j < kP; ++j) {
        spec.neurons.push_back({name("p", c, i, j), Activation::kpool(1)});
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj)
            spec.edges.push_back({name("a", c, 2 * i + di, 2 * j + dj), name("p", c, i, j)});
      }
  for (std::size_t c = 0; c < kC2; ++c)
    for (std::size_t i = 0; i < kS2; ++i)
      for (std::size_t j = 0; j < kS2; ++j) {
        spec.neurons.push_back({name("b", c, i, j), Activation::relu()});
        for (std::size_t ci = 0; ci < kC1; ++ci)
          for (std::size_t di = 0; di < 3; ++di)
            for (std::size_t dj = 0; dj < 3; ++dj)
              spec.edges.push_back({name("p", ci, i + di, j + dj), name("b", c, i, j)});
      }
  for (std::size_t o = 0; o < kOut; ++o) {
    const std::string out = "y" + std::to_string(o);
    spec.neurons.push_back({out, Activation::identity()});
    for (std::size_t c = 0; c < kC2; ++c)
      for (std::size_t i = 0; i < kS2; ++i)
        for (std::size_t j = 0; j < kS2; ++j) spec.edges.push_back({name("b", c, i, j), out});
  }
  Architecture arch = Architecture::validate(spec);
  ParamVector theta = ParamVector::zeros(arch);
  for (EdgeIndex e = 0; e < arch.num_edges(); ++e) {
    const std::size_t fan_in = arch.incoming(arch.edge(e).dst).size();
    const double s = std::sqrt(3.0 / static_cast<double>(fan_in));
    theta[e] = uniform(rng, -s, s);
  }
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    const auto c = arch.bias_coord(v);
    if (c && arch.activation(v).kind != ActivationKind::KPool) theta[*c] = uniform(rng, -0.1, 0.1);
  }
  return Network{std::move(arch), std::move(theta)};
}

}  // namespace pathlift
