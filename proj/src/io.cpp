#include "pathlift/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pathlift/errors.hpp"

namespace pathlift {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ParseError, where + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

std::string string_at(const json& obj, const char* key, const std::string& where) {
  const json& v = member(obj, key, where);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

double number_at(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

Activation parse_activation(const json& v, const std::string& where) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "input") return Activation::input();
    if (s == "identity") return Activation::identity();
    if (s == "relu") return Activation::relu();
    fail(where, "unknown activation '" + s + "'");
  }
  if (v.is_object() && v.size() == 1 && v.contains("kpool")) {
    const json& k = v["kpool"];
    if (!k.is_number_integer()) fail(where + ".kpool", "expected an integer");
    const auto kv = k.get<long long>();
    if (kv < 1 || kv > 1'000'000'000) fail(where + ".kpool", "k must be a positive integer");
    return Activation::kpool(static_cast<int>(kv));
  }
  fail(where, "activation must be \"input\", \"identity\", \"relu\" or {\"kpool\": k}");
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

std::vector<double> number_row(const json& row, const std::string& where) {
  if (!row.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    out.push_back(number_at(row[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

Network parse_network(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) fail("document", "expected an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "neurons" && it.key() != "edges" && it.key() != "biases") {
      fail("document", "unknown key '" + it.key() + "'");
    }
  }
  ArchitectureSpec spec;
  std::vector<double> weights;

  const json& neurons = member(doc, "neurons", "document");
  if (!neurons.is_array()) fail("neurons", "expected an array");
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    const std::string where = "neurons[" + std::to_string(i) + "]";
    spec.neurons.push_back({string_at(neurons[i], "id", where),
                            parse_activation(member(neurons[i], "activation", where),
                                             where + ".activation")});
  }
  const json& edges = member(doc, "edges", "document");
  if (!edges.is_array()) fail("edges", "expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    spec.edges.push_back({string_at(edges[i], "src", where), string_at(edges[i], "dst", where)});
    weights.push_back(number_at(member(edges[i], "weight", where), where + ".weight"));
  }

  Architecture arch = Architecture::validate(spec);
  ParamVector theta = ParamVector::zeros(arch);
  for (EdgeIndex e = 0; e < weights.size(); ++e) theta[e] = weights[e];

  if (doc.contains("biases")) {
    const json& biases = doc["biases"];
    if (!biases.is_object()) fail("biases", "expected an object mapping neuron id to number");
    for (auto it = biases.begin(); it != biases.end(); ++it) {
      const std::string where = "biases." + it.key();
      const NeuronIndex v = arch.index_of(it.key());
      const auto c = arch.bias_coord(v);
      if (!c) fail(where, "input neurons carry no bias");
      theta[*c] = number_at(it.value(), where);
    }
  }
  check_params(arch, theta);
  return Network{std::move(arch), std::move(theta)};
}

std::string network_to_string(const Architecture& arch, const ParamVector& theta) {
  check_params(arch, theta);
  json doc;
  json neurons = json::array();
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    const Activation& a = arch.activation(v);
    json act;
    switch (a.kind) {
      case ActivationKind::Input: act = "input"; break;
      case ActivationKind::Identity: act = "identity"; break;
      case ActivationKind::Relu: act = "relu"; break;
      case ActivationKind::KPool: act = json{{"kpool", a.k}}; break;
    }
    neurons.push_back(json{{"id", arch.id(v)}, {"activation", act}});
  }
  json edges = json::array();
  for (EdgeIndex e = 0; e < arch.num_edges(); ++e) {
    edges.push_back(json{{"src", arch.id(arch.edge(e).src)},
                         {"dst", arch.id(arch.edge(e).dst)},
                         {"weight", theta[e]}});
  }
  json biases = json::object();
  for (NeuronIndex v = 0; v < arch.num_neurons(); ++v) {
    if (auto c = arch.bias_coord(v)) biases[arch.id(v)] = theta[*c];
  }
  doc["neurons"] = std::move(neurons);
  doc["edges"] = std::move(edges);
  doc["biases"] = std::move(biases);
  return doc.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error(ErrorKind::InvalidConfig, "failed writing '" + path + "'");
}

Network load_network(const std::string& path) { return parse_network(read_file(path)); }

void save_network(const std::string& path, const Architecture& arch, const ParamVector& theta) {
  write_file(path, network_to_string(arch, theta));
}

Batch parse_batch(std::string_view text) {
  const json doc = parse_json(text);
  Batch b;
  const json& inputs = member(doc, "inputs", "document");
  const json& targets = member(doc, "targets", "document");
  if (!inputs.is_array()) fail("inputs", "expected an array");
  if (!targets.is_array()) fail("targets", "expected an array");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    b.inputs.push_back(number_row(inputs[i], "inputs[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    b.targets.push_back(number_row(targets[i], "targets[" + std::to_string(i) + "]"));
  }
  if (b.inputs.size() != b.targets.size()) fail("document", "inputs and targets differ in length");
  return b;
}

Batch load_batch(const std::string& path) { return parse_batch(read_file(path)); }

}  // namespace pathlift
