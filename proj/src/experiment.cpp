#include "pathlift/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include "eval.hpp"
#include "json.hpp"
#include "pathlift/errors.hpp"
#include "pathlift/metrics.hpp"

namespace pathlift {
namespace {

using json = nlohmann::ordered_json;

// Stream tags keep the data, initialization and batch-order generators apart.
constexpr std::uint64_t kDataTag = 0xDA7A;
constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kOrderTag = 0x0BDE;
constexpr std::uint64_t kProbeTag = 0x9B0E;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t extra = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(extra),
                    static_cast<std::uint32_t>(extra >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string loss_name(LossKind k) { return k == LossKind::Logistic ? "logistic" : "squared"; }

LossKind parse_loss(const std::string& s) {
  if (s == "logistic") return LossKind::Logistic;
  if (s == "squared") return LossKind::SquaredError;
  throw Error(ErrorKind::InvalidConfig, "loss must be 'logistic' or 'squared', got '" + s + "'");
}

Dataset parse_dataset(const std::string& s) {
  if (s == "gaussians") return Dataset::TwoGaussians;
  if (s == "xor") return Dataset::Xor;
  throw Error(ErrorKind::InvalidConfig, "dataset must be 'gaussians' or 'xor', got '" + s + "'");
}

struct Trainer {
  const Architecture& arch;
  const ExperimentConfig& cfg;
  const SyntheticData& data;

  // Runs epochs [begin, end). Coordinates dropped by `mask` stay at zero.
  void run(ParamVector& theta, std::size_t begin, std::size_t end, const Mask* mask,
           ParamVector* snapshot) const {
    const std::size_t n = data.train_x.size();
    std::vector<std::size_t> order(n);
    std::vector<double> grad(theta.size());
    std::vector<double> outs(arch.outputs().size());
    detail::EvalState st;
    for (std::size_t epoch = begin; epoch < end; ++epoch) {
      if (snapshot && epoch == cfg.rewind_epoch) *snapshot = theta;
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      auto rng = stream(cfg.seed, kOrderTag, epoch);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t stop = std::min(n, start + cfg.batch_size);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t j = start; j < stop; ++j) {
          const std::size_t k = order[j];
          detail::evaluate(arch, theta.values(), data.train_x[k], detail::PoolMode::Select, st);
          for (std::size_t o = 0; o < outs.size(); ++o) outs[o] = st.value[arch.outputs()[o]];
          const auto seed = loss_adjoint(outs, data.train_y[k], cfg.loss);
          detail::backward(arch, theta.values(), st, detail::PoolMode::Select, seed, grad);
        }
        const double step = cfg.learning_rate / static_cast<double>(stop - start);
        for (std::size_t i = 0; i < grad.size(); ++i) {
          if (mask && !mask->keeps(i)) continue;
          theta[i] -= step * grad[i];
        }
      }
    }
  }
};

Network initial_network(const ExperimentConfig& cfg) {
  std::vector<Matrix> layers;
  for (std::size_t l = 0; l + 1 < cfg.widths.size(); ++l) {
    layers.emplace_back(cfg.widths[l + 1], cfg.widths[l]);
  }
  Network net = mlp_network(layers);
  auto rng = stream(cfg.seed, kInitTag);
  for (EdgeIndex e = 0; e < net.arch.num_edges(); ++e) {
    const double fan_in = static_cast<double>(net.arch.incoming(net.arch.edge(e).dst).size());
    const double s = std::sqrt(6.0 / fan_in);
    net.theta[e] = std::uniform_real_distribution<double>(-s, s)(rng);
  }
  return net;
}

}  // namespace

std::string to_string(Dataset d) { return d == Dataset::TwoGaussians ? "gaussians" : "xor"; }

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::InvalidConfig, m); };
  if (widths.size() < 2) bad("widths needs at least an input and an output layer");
  for (std::size_t w : widths) {
    if (w == 0) bad("layer widths must be positive");
  }
  if (widths.front() != 2) bad("the synthetic tasks are 2-D: widths must start with 2");
  if (widths.back() != 1 && widths.back() != 2) bad("the synthetic tasks have 2 classes: last width must be 1 or 2");
  if (train_size == 0 || test_size == 0) bad("train_size and test_size must be positive");
  if (epochs == 0) bad("epochs must be positive");
  if (rewind_epoch >= epochs) bad("rewind_epoch must be smaller than epochs");
  if (!(prune_fraction >= 0.0 && prune_fraction < 1.0)) bad("prune_fraction must lie in [0, 1)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad("learning_rate must be positive");
  if (batch_size == 0) bad("batch_size must be positive");
  if (criteria.empty()) bad("criteria must not be empty");
  for (Criterion c : criteria) {
    if ((c == Criterion::ObdFd || c == Criterion::ObdHutchinson) && obd_batch == 0) {
      bad("obd_batch must be positive for OBD criteria");
    }
    if (c == Criterion::ObdHutchinson && hutchinson_probes == 0) bad("hutchinson_probes must be positive");
  }
  if (preset.kind == RescalePreset::Kind::LogUniform && !(preset.lambda_max >= 1.0)) {
    bad("loguniform preset needs lambda_max >= 1");
  }
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "config: expected an object");
  ExperimentConfig c;
  try {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "dataset") c.dataset = parse_dataset(v.get<std::string>());
      else if (k == "train_size") c.train_size = v.get<std::size_t>();
      else if (k == "test_size") c.test_size = v.get<std::size_t>();
      else if (k == "widths") c.widths = v.get<std::vector<std::size_t>>();
      else if (k == "epochs") c.epochs = v.get<std::size_t>();
      else if (k == "learning_rate") c.learning_rate = v.get<double>();
      else if (k == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (k == "rewind_epoch") c.rewind_epoch = v.get<std::size_t>();
      else if (k == "prune_fraction") c.prune_fraction = v.get<double>();
      else if (k == "prune_biases") c.prune_biases = v.get<bool>();
      else if (k == "preset") c.preset = RescalePreset::parse(v.get<std::string>());
      else if (k == "criteria") {
        c.criteria.clear();
        for (const auto& s : v) c.criteria.push_back(parse_criterion(s.get<std::string>()));
      }
      else if (k == "loss") c.loss = parse_loss(v.get<std::string>());
      else if (k == "obd_batch") c.obd_batch = v.get<std::size_t>();
      else if (k == "hutchinson_probes") c.hutchinson_probes = v.get<std::size_t>();
      else if (k == "parallel") c.parallel = v.get<bool>();
      else throw Error(ErrorKind::ParseError, "config: unknown key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["dataset"] = to_string(c.dataset);
  j["train_size"] = c.train_size;
  j["test_size"] = c.test_size;
  j["widths"] = c.widths;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["rewind_epoch"] = c.rewind_epoch;
  j["prune_fraction"] = c.prune_fraction;
  j["prune_biases"] = c.prune_biases;
  j["preset"] = to_string(c.preset);
  json crit = json::array();
  for (Criterion k : c.criteria) crit.push_back(to_string(k));
  j["criteria"] = crit;
  j["loss"] = loss_name(c.loss);
  j["obd_batch"] = c.obd_batch;
  j["hutchinson_probes"] = c.hutchinson_probes;
  j["parallel"] = c.parallel;
  return j.dump(2);
}

SyntheticData make_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  auto rng = stream(cfg.seed, kDataTag);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::size_t classes = cfg.widths.back();
  SyntheticData d;
  auto draw = [&](std::vector<std::vector<double>>& xs, std::vector<std::vector<double>>& ys,
                  std::vector<std::size_t>& labels, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t label;
      std::vector<double> x(2);
      if (cfg.dataset == Dataset::TwoGaussians) {
        label = (rng() >> 63) & 1u;
        const double mu = label ? 1.0 : -1.0;
        x[0] = mu + noise(rng);
        x[1] = 0.5 * mu + noise(rng);
      } else {
        x[0] = unit(rng);
        x[1] = unit(rng);
        label = (x[0] * x[1] > 0) ? 1 : 0;
      }
      std::vector<double> y(classes, 0.0);
      if (classes == 1) {
        y[0] = static_cast<double>(label);
      } else {
        y[label] = 1.0;
      }
      xs.push_back(std::move(x));
      ys.push_back(std::move(y));
      labels.push_back(label);
    }
  };
  draw(d.train_x, d.train_y, d.train_label, cfg.train_size);
  draw(d.test_x, d.test_y, d.test_label, cfg.test_size);
  return d;
}

double accuracy(const Architecture& arch, const ParamVector& theta,
                const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& labels,
                LossKind loss) {
  if (xs.empty()) return 0.0;
  // A single output is a logit under the logistic loss, a 0/1 regression otherwise.
  const double cut = loss == LossKind::Logistic ? 0.0 : 0.5;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto out = forward(arch, theta, xs[i]);
    std::size_t pred;
    if (out.size() == 1) {
      pred = out[0] > cut ? 1 : 0;
    } else {
      pred = static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
    }
    hits += pred == labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(xs.size());
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const SyntheticData data = make_dataset(cfg);
  Network net = initial_network(cfg);
  const Architecture& arch = net.arch;
  const Trainer trainer{arch, cfg, data};

  ExperimentReport rep;
  rep.config = cfg;
  ParamVector snapshot;
  trainer.run(net.theta, 0, cfg.epochs, nullptr, &snapshot);
  rep.dense_test_accuracy = accuracy(arch, net.theta, data.test_x, data.test_label, cfg.loss);

  // Draw factors; redraw in the (astronomically unlikely) event that all are 1.
  std::uint64_t rs = splitmix(cfg.seed);
  Rescaling lambda = random_rescaling(arch, rs, cfg.preset);
  for (int attempt = 0; attempt < 64; ++attempt) {
    bool trivial = true;
    for (const auto& [v, f] : lambda.factors()) trivial = trivial && f == 1.0;
    if (!trivial || lambda.empty() || cfg.preset.kind == RescalePreset::Kind::LogUniform) break;
    lambda = random_rescaling(arch, ++rs, cfg.preset);
  }
  rep.rescale_seed = rs;
  const ParamVector rescaled = rescale(arch, net.theta, lambda);

  Batch obd;
  for (std::size_t i = 0; i < std::min(cfg.obd_batch, data.train_x.size()); ++i) {
    obd.inputs.push_back(data.train_x[i]);
    obd.targets.push_back(data.train_y[i]);
  }
  BaselineOptions bopt;
  bopt.loss = cfg.loss;
  bopt.probes = cfg.hutchinson_probes;
  bopt.seed = stream(cfg.seed, kProbeTag)();

  rep.arms.resize(cfg.criteria.size() * 2);
  auto run_arm = [&](std::size_t idx) {
    ArmResult& arm = rep.arms[idx];
    arm.criterion = cfg.criteria[idx / 2];
    arm.rescaled = idx % 2 == 1;
    const ParamVector& scored = arm.rescaled ? rescaled : net.theta;
    const ScoreVector s =
        compute_scores(arch, scored, arm.criterion, PathMagMethod::Autodiff, &obd, bopt);
    PruneOptions popt;
    popt.edges_only = !cfg.prune_biases;
    const PruneResult pr =
        apply_prune(arch, scored, s, PruneAmount::of_fraction(cfg.prune_fraction), popt);
    arm.mask = pr.mask;
    arm.pruned = pr.mask.pruned().size();
    ParamVector theta = pr.mask.apply(snapshot);
    trainer.run(theta, cfg.rewind_epoch, cfg.epochs, &pr.mask, nullptr);
    arm.test_accuracy = accuracy(arch, theta, data.test_x, data.test_label, cfg.loss);
  };
  if (cfg.parallel) {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(rep.arms.size());
    for (std::size_t i = 0; i < rep.arms.size(); ++i) {
      pool.emplace_back([&, i] {
        try {
          run_arm(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t i = 0; i < rep.arms.size(); ++i) run_arm(i);
  }
  for (std::size_t i = 1; i < rep.arms.size(); i += 2) {
    rep.arms[i].hamming_to_unrescaled = hamming_distance(rep.arms[i].mask, rep.arms[i - 1].mask);
  }
  rep.dense = std::move(net);
  return rep;
}

std::string report_to_json(const ExperimentReport& r) {
  json j;
  j["config"] = json::parse(experiment_config_to_json(r.config));
  j["rescale_seed"] = r.rescale_seed;
  j["dense_test_accuracy"] = r.dense_test_accuracy;
  json arms = json::array();
  for (const ArmResult& a : r.arms) {
    std::string bits;
    for (auto k : a.mask.keep()) bits += k ? '1' : '0';
    arms.push_back(json{{"criterion", to_string(a.criterion)},
                        {"rescaled", a.rescaled},
                        {"test_accuracy", a.test_accuracy},
                        {"pruned", a.pruned},
                        {"hamming_to_unrescaled", a.hamming_to_unrescaled},
                        {"mask", bits}});
  }
  j["arms"] = arms;
  return j.dump(2) + "\n";
}

std::string report_table(const ExperimentReport& r) {
  std::ostringstream os;
  os << "criterion\trescaled\taccuracy\thamming\n";
  os << std::fixed << std::setprecision(4);
  os << "dense\tno\t" << r.dense_test_accuracy << "\t-\n";
  for (const ArmResult& a : r.arms) {
    os << to_string(a.criterion) << '\t' << (a.rescaled ? "yes" : "no") << '\t' << a.test_accuracy
       << '\t' << a.hamming_to_unrescaled << '\n';
  }
  return os.str();
}

}  // namespace pathlift
