#pragma once

// Fixtures and independent oracles shared by the unit tests. The oracles work
// from the raw ArchitectureSpec and do not call into the evaluator or the path
// enumerator under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pathlift/net.hpp"

namespace fixtures {

using namespace pathlift;

inline bool rel_close(double a, double b, double rel = 1e-9, double abs_floor = 1e-12) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

inline bool all_close(const std::vector<double>& a, const std::vector<double>& b,
                      double rel = 1e-9, double abs_floor = 1e-12) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!rel_close(a[i], b[i], rel, abs_floor)) return false;
  }
  return true;
}

// One input, two ReLU neurons, one output; theta = (1, -2, 3, 1), biases 0.
inline Network net_a(double w1 = 1, double w2 = -2, double w3 = 3, double w4 = 1) {
  ArchitectureSpec s;
  s.neurons = {{"in", Activation::input()},
               {"h1", Activation::relu()},
               {"h2", Activation::relu()},
               {"out", Activation::identity()}};
  s.edges = {{"in", "h1"}, {"in", "h2"}, {"h1", "out"}, {"h2", "out"}};
  Architecture a = Architecture::validate(s);
  ParamVector t = ParamVector::zeros(a);
  t[0] = w1;
  t[1] = w2;
  t[2] = w3;
  t[3] = w4;
  return {std::move(a), std::move(t)};
}

// Two inputs into a kpool(1) neuron, then an identity output.
inline Network net_d(double w1 = 2, double w2 = -3, double w3 = 1) {
  ArchitectureSpec s;
  s.neurons = {{"x1", Activation::input()},
               {"x2", Activation::input()},
               {"m", Activation::kpool(1)},
               {"out", Activation::identity()}};
  s.edges = {{"x1", "m"}, {"x2", "m"}, {"m", "out"}};
  Architecture a = Architecture::validate(s);
  ParamVector t = ParamVector::zeros(a);
  t[0] = w1;
  t[1] = w2;
  t[2] = w3;
  return {std::move(a), std::move(t)};
}

// Named view of a network straight from its spec, for the oracles below.
struct RawNet {
  std::vector<std::string> ids;
  std::map<std::string, Activation> act;
  std::map<std::string, std::vector<std::pair<std::string, double>>> in;  // dst -> (src, w)
  std::map<std::string, std::vector<std::string>> out;
  std::map<std::string, double> bias;

  explicit RawNet(const Network& n) {
    const ArchitectureSpec s = n.arch.spec();
    for (const auto& ns : s.neurons) {
      ids.push_back(ns.id);
      act[ns.id] = ns.activation;
      in[ns.id];
      out[ns.id];
    }
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
      in[s.edges[e].dst].push_back({s.edges[e].src, n.theta[e]});
      out[s.edges[e].src].push_back(s.edges[e].dst);
    }
    for (NeuronIndex v = 0; v < n.arch.num_neurons(); ++v) {
      if (auto c = n.arch.bias_coord(v)) bias[n.arch.id(v)] = n.theta[*c];
    }
  }
  bool is_output(const std::string& v) const { return out.at(v).empty(); }
  bool is_input(const std::string& v) const { return in.at(v).empty(); }
};

// Sum over all paths ending at outputs of |Phi_p|^q, by backward recursion
// from every output with explicit path products.
inline double oracle_path_norm(const Network& n, double q = 1.0) {
  const RawNet r(n);
  double total = 0.0;
  std::function<void(const std::string&, double)> back = [&](const std::string& v, double prod) {
    // The path may start here.
    const double start = r.is_input(v) ? 1.0 : r.bias.at(v);
    total += std::pow(std::abs(start * prod), q);
    for (const auto& [u, w] : r.in.at(v)) back(u, prod * w);
  };
  for (const auto& v : r.ids) {
    if (r.is_output(v)) back(v, 1.0);
  }
  return total;
}

// Memo-free recursive forward pass over the raw spec. Inputs are consumed in
// the order of arch.inputs().
inline std::vector<double> oracle_forward(const Network& n, const std::vector<double>& x) {
  const RawNet r(n);
  std::map<std::string, double> xin;
  for (std::size_t i = 0; i < n.arch.inputs().size(); ++i) xin[n.arch.id(n.arch.inputs()[i])] = x[i];
  std::function<double(const std::string&)> val = [&](const std::string& v) -> double {
    if (r.is_input(v)) return xin.at(v);
    const double b = r.bias.at(v);
    const Activation a = r.act.at(v);
    if (a.kind == ActivationKind::KPool) {
      std::vector<double> terms;
      for (const auto& [u, w] : r.in.at(v)) terms.push_back(b + val(u) * w);
      std::sort(terms.begin(), terms.end(), std::greater<>());
      return terms[a.k - 1];
    }
    double s = b;
    for (const auto& [u, w] : r.in.at(v)) s += val(u) * w;
    return a.kind == ActivationKind::Relu ? std::max(s, 0.0) : s;
  };
  std::vector<double> out;
  for (NeuronIndex v : n.arch.outputs()) out.push_back(val(n.arch.id(v)));
  return out;
}

}  // namespace fixtures
