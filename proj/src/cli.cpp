#include "pathlift/cli.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "CLI11.hpp"
#include "json.hpp"
#include "pathlift/errors.hpp"
#include "pathlift/experiment.hpp"
#include "pathlift/generators.hpp"
#include "pathlift/io.hpp"
#include "pathlift/lipschitz.hpp"
#include "pathlift/metrics.hpp"
#include "pathlift/paths.hpp"
#include "pathlift/pruning.hpp"
#include "pathlift/transforms.hpp"

namespace pathlift {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

using json = nlohmann::ordered_json;

bool same_architecture(const Architecture& a, const Architecture& b) {
  if (a.num_neurons() != b.num_neurons() || a.num_edges() != b.num_edges()) return false;
  for (NeuronIndex v = 0; v < a.num_neurons(); ++v) {
    if (a.id(v) != b.id(v) || !(a.activation(v) == b.activation(v))) return false;
  }
  for (EdgeIndex e = 0; e < a.num_edges(); ++e) {
    if (a.edge(e).src != b.edge(e).src || a.edge(e).dst != b.edge(e).dst) return false;
  }
  return true;
}

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

struct Flags {
  // shared
  std::string net, net2, output;
  std::uint64_t seed = 0;
  // eval
  std::vector<double> x;
  bool trace = false;
  // pathnorm
  double q = 1.0;
  // pathmetric
  bool lower = false, exact = false, upper = false, upper_refined = false, oracle = false;
  // prune
  std::string criterion = "pathmag", method = "autodiff", data, loss = "squared";
  double amount = 0.0;
  std::size_t count = 0;
  bool iterative = false, edges_only = false;
  std::size_t probes = 100;
  // rescale / normalize
  std::string preset = "fixed";
  bool include_kpool = false;
  // verify-lipschitz
  std::size_t cases = 100;
  std::string variant = "both";
  // witness
  std::vector<double> equality;
  bool counterexample = false;
  double witness_x = 1.0;
  // experiment
  std::string config;
  bool table = false;
};

int run_eval(const Flags& f, std::ostream& out) {
  const Network n = load_network(f.net);
  const ForwardTrace t = forward_trace(n.arch, n.theta, f.x);
  if (f.trace) {
    for (NeuronIndex v = 0; v < n.arch.num_neurons(); ++v) {
      out << n.arch.id(v) << '\t' << format_number(t.values[v]) << '\n';
    }
    return 0;
  }
  for (std::size_t o = 0; o < t.outputs.size(); ++o) {
    out << n.arch.id(n.arch.outputs()[o]) << '\t' << format_number(t.outputs[o]) << '\n';
  }
  return 0;
}

int run_paths(const Flags& f, std::ostream& out) {
  const Network n = load_network(f.net);
  const PathLifting pl = path_lifting(n.arch, n.theta);
  if (f.x.empty()) {
    write_path_table(out, n.arch, pl.paths, pl.values);
    return 0;
  }
  const auto a = path_activations(n.arch, pl.paths, n.theta, f.x);
  const IncidenceMatrix inc = incidence_matrix(n.arch, pl.paths);
  out << "path\tvalue\tactive\tcolumn\n";
  for (std::size_t i = 0; i < pl.paths.size(); ++i) {
    const std::size_t col = inc.column_of(i);
    out << path_string(n.arch, pl.paths[i]) << '\t' << format_number(pl.values[i]) << '\t'
        << int(a[i]) << '\t'
        << (col == inc.bias_column() ? std::string("bias") : n.arch.id(n.arch.inputs()[col]))
        << '\n';
  }
  return 0;
}

int run_pathmetric(const Flags& f, std::ostream& out) {
  const Network a = load_network(f.net);
  const Network b = load_network(f.net2);
  if (!same_architecture(a.arch, b.arch)) {
    throw Error(ErrorKind::DimensionMismatch, "the two networks do not share an architecture");
  }
  const int chosen = f.lower + f.exact + f.upper + f.upper_refined + f.oracle;
  json j;
  if (chosen == 0) {
    const PathMetricReport r = path_metric_report(a.arch, a.theta, b.theta);
    j["lower"] = r.lower;
    j["exact"] = r.exact ? json(*r.exact) : json(nullptr);
    j["certificate"] = to_string(r.certificate);
    j["upper_coarse"] = r.upper_coarse;
    j["upper_refined"] = r.upper_refined;
    j["oracle"] = r.oracle ? json(*r.oracle) : json(nullptr);
    out << j.dump(2) << '\n';
    return 0;
  }
  if (f.lower) j["lower"] = path_metric_lower(a.arch, a.theta, b.theta);
  if (f.exact) j["exact"] = path_metric_exact_dominated(a.arch, a.theta, b.theta).value;
  if (f.upper) j["upper_coarse"] = path_metric_upper(a.arch, a.theta, b.theta, f.q, false);
  if (f.upper_refined) j["upper_refined"] = path_metric_upper(a.arch, a.theta, b.theta, f.q, true);
  if (f.oracle) j["oracle"] = path_metric_oracle(a.arch, a.theta, b.theta);
  if (chosen == 1) {
    out << format_number(j.begin().value().get<double>()) << '\n';
  } else {
    for (auto it = j.begin(); it != j.end(); ++it) {
      out << it.key() << '\t' << format_number(it.value().get<double>()) << '\n';
    }
  }
  return 0;
}

int run_prune(const Flags& f, bool seed_given, bool count_given, std::ostream& out) {
  const Network n = load_network(f.net);
  const Criterion crit = parse_criterion(f.criterion);
  const PathMagMethod method = parse_method(f.method);
  if (crit == Criterion::ObdHutchinson && !seed_given) {
    throw CLI::RequiredError("--seed is required for obd-hutchinson");
  }
  Batch batch;
  if (!f.data.empty()) batch = load_batch(f.data);
  BaselineOptions bopt;
  bopt.loss = f.loss == "logistic" ? LossKind::Logistic : LossKind::SquaredError;
  bopt.probes = f.probes;
  bopt.seed = f.seed;
  const Batch* data = f.data.empty() ? nullptr : &batch;
  const ScoreVector scores = compute_scores(n.arch, n.theta, crit, method, data, bopt);

  PruneOptions popt;
  popt.edges_only = f.edges_only;
  popt.iterative = f.iterative;
  if (f.iterative) {
    popt.rescore = [&](const ParamVector& t) {
      return compute_scores(n.arch, t, crit, method, data, bopt);
    };
  }
  const PruneAmount amount =
      count_given ? PruneAmount::of_count(f.count) : PruneAmount::of_fraction(f.amount);
  const PruneResult r = apply_prune(n.arch, n.theta, scores, amount, popt);

  json j;
  j["criterion"] = to_string(crit);
  j["method"] = scores.method;
  std::string bits;
  for (auto k : r.mask.keep()) bits += k ? '1' : '0';
  j["mask"] = bits;
  json pruned = json::array();
  for (CoordIndex c : r.mask.pruned()) pruned.push_back(n.arch.coord_name(c));
  j["pruned"] = pruned;
  json table = json::array();
  for (CoordIndex c = 0; c < n.theta.size(); ++c) {
    table.push_back(json{{"coord", n.arch.coord_name(c)},
                         {"value", n.theta[c]},
                         {"score", scores.values[c]},
                         {"kept", r.mask.keeps(c)}});
  }
  j["scores"] = table;
  if (!f.output.empty()) save_network(f.output, n.arch, r.theta);
  out << j.dump(2) << '\n';
  return 0;
}

int run_rescale(const Flags& f, std::ostream& out) {
  const Network n = load_network(f.net);
  const RescalePreset preset = RescalePreset::parse(f.preset);
  const Rescaling lambda = random_rescaling(n.arch, f.seed, preset, f.include_kpool);
  emit(out, f.output, network_to_string(n.arch, rescale(n.arch, n.theta, lambda)));
  return 0;
}

int run_normalize(const Flags& f, std::ostream& out) {
  const Network n = load_network(f.net);
  emit(out, f.output,
       network_to_string(n.arch, normalize(n.arch, n.theta, {.include_kpool = f.include_kpool})));
  return 0;
}

int run_verify(const Flags& f, std::ostream& out) {
  std::vector<BoundVariant> variants;
  if (f.variant == "both") {
    variants = {BoundVariant::Main, BoundVariant::Split};
  } else {
    variants = {parse_variant(f.variant)};
  }
  std::mt19937_64 rng(f.seed);
  std::size_t held = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.cases; ++i) {
    const Network n = random_dag(rng);
    const ParamVector t2 = same_sign_partner(n.theta, rng);
    const auto x = random_input(n.arch, rng);
    bool ok = true;
    for (BoundVariant v : variants) {
      const BoundReport r = verify_bound(n.arch, n.theta, t2, x, v);
      ok = ok && r.holds;
      worst = std::min(worst, r.slack);
    }
    held += ok;
  }
  out << held << "/" << f.cases << " hold\n";
  if (f.cases) out << "worst slack " << format_number(worst) << '\n';
  return held == f.cases ? 0 : 1;
}

int run_witness(const Flags& f, std::ostream& out) {
  if (f.counterexample == !f.equality.empty()) {
    throw CLI::ValidationError("witness", "give exactly one of --equality or --counterexample");
  }
  if (f.counterexample) {
    const WitnessReport w = sign_counterexample(f.witness_x);
    out << "path-metric " << format_number(w.path_metric) << '\n';
    out << "output gap " << format_number(w.report.lhs) << '\n';
    out << "rhs " << format_number(w.report.rhs) << '\n';
    return 0;
  }
  const double d = f.equality[0];
  if (d < 1 || d != std::floor(d)) {
    throw Error(ErrorKind::InvalidConfig, "path length d must be a positive integer");
  }
  const WitnessReport w =
      equality_witness(static_cast<std::size_t>(d), f.equality[1], f.equality[2], f.equality[3]);
  out << "lhs " << format_number(w.report.lhs) << '\n';
  out << "rhs " << format_number(w.report.rhs) << '\n';
  out << "slack " << format_number(w.report.slack) << '\n';
  return 0;
}

int run_experiment_cmd(const Flags& f, std::ostream& out) {
  ExperimentConfig cfg;
  if (!f.config.empty()) cfg = parse_experiment_config(read_file(f.config));
  cfg.seed = f.seed;
  const ExperimentReport r = run_experiment(cfg);
  if (!f.output.empty()) write_file(f.output, report_to_json(r));
  if (f.table) {
    out << report_table(r);
  } else if (f.output.empty()) {
    out << report_to_json(r);
  }
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path-lifting tools for DAG-ReLU networks", "pathlift"};
  app.require_subcommand(1);
  Flags f;

  auto* eval = app.add_subcommand("eval", "Evaluate a network at an input");
  eval->add_option("network", f.net, "Network file")->required()->check(CLI::ExistingFile);
  eval->add_option("--x", f.x, "Input values, comma separated")->required()->delimiter(',');
  eval->add_flag("--trace", f.trace, "Print every neuron value");

  auto* paths = app.add_subcommand("paths", "Dump the path-lifting table");
  paths->add_option("network", f.net, "Network file")->required()->check(CLI::ExistingFile);
  paths->add_option("--x", f.x, "Also report activations and incidence at this input")
      ->delimiter(',');

  auto* pn = app.add_subcommand("pathnorm", "Print ||Phi(theta)||_q^q");
  pn->add_option("network", f.net, "Network file")->required()->check(CLI::ExistingFile);
  pn->add_option("--q", f.q, "Exponent q >= 1")->check(CLI::Range(1.0, 1e300));

  auto* pm = app.add_subcommand("pathmetric", "Path-metric bounds between two networks");
  pm->add_option("network", f.net, "First network")->required()->check(CLI::ExistingFile);
  pm->add_option("network2", f.net2, "Second network")->required()->check(CLI::ExistingFile);
  pm->add_flag("--lower", f.lower, "Difference of path-norms");
  pm->add_flag("--exact", f.exact, "Exact value under certified dominance");
  pm->add_flag("--upper", f.upper, "Coarse normalized-parameter bound");
  pm->add_flag("--upper-refined", f.upper_refined, "Refined bound");
  pm->add_flag("--oracle", f.oracle, "Enumerate paths");
  pm->add_option("--q", f.q, "Exponent for the upper bounds")->check(CLI::Range(1.0, 1e300));

  auto* pr = app.add_subcommand("prune", "Score and prune a network");
  pr->add_option("network", f.net, "Network file")->required()->check(CLI::ExistingFile);
  pr->add_option("--criterion", f.criterion, "pathmag|magnitude|obd|obd-hutchinson");
  pr->add_option("--method", f.method, "autodiff|diff|brute (pathmag only)");
  auto* amount = pr->add_option("--amount", f.amount, "Fraction of candidates to prune");
  auto* count = pr->add_option("--count", f.count, "Number of candidates to prune");
  amount->excludes(count);
  pr->add_flag("--iterative", f.iterative, "Re-score after every removal");
  pr->add_flag("--edges-only", f.edges_only, "Never prune biases");
  pr->add_option("--data", f.data, "Batch file for OBD")->check(CLI::ExistingFile);
  pr->add_option("--loss", f.loss, "squared|logistic")
      ->check(CLI::IsMember({"squared", "logistic"}));
  pr->add_option("--probes", f.probes, "Hutchinson probes");
  auto* prune_seed = pr->add_option("--seed", f.seed, "Probe seed (obd-hutchinson)");
  pr->add_option("-o,--output", f.output, "Write the pruned network here");

  auto* rs = app.add_subcommand("rescale", "Apply a random rescaling");
  rs->add_option("network", f.net, "Network file")->required()->check(CLI::ExistingFile);
  rs->add_option("--seed", f.seed, "Seed")->required();
  rs->add_option("--preset", f.preset, "fixed|loguniform:LMAX");
  rs->add_flag("--include-kpool", f.include_kpool, "Rescale k-max-pool neurons too");
  rs->add_option("-o,--output", f.output, "Output file (default stdout)");

  auto* nm = app.add_subcommand("normalize", "Normalize hidden neurons");
  nm->add_option("network", f.net, "Network file")->required()->check(CLI::ExistingFile);
  nm->add_flag("--include-kpool", f.include_kpool, "Normalize k-max-pool neurons too");
  nm->add_option("-o,--output", f.output, "Output file (default stdout)");

  auto* vl = app.add_subcommand("verify-lipschitz", "Randomized check of the Lipschitz bound");
  vl->add_option("--seed", f.seed, "Seed")->required();
  vl->add_option("--cases", f.cases, "Number of random cases");
  vl->add_option("--variant", f.variant, "main|split|both")
      ->check(CLI::IsMember({"main", "split", "both"}));

  auto* wt = app.add_subcommand("witness", "Equality witness or sign counterexample");
  wt->add_option("--equality", f.equality, "d a b x0")->expected(4);
  wt->add_flag("--counterexample", f.counterexample, "Opposite-sign chain");
  wt->add_option("--x", f.witness_x, "Input for the counterexample");

  auto* ex = app.add_subcommand("experiment", "Train, rescale, prune, rewind, fine-tune");
  ex->add_option("--seed", f.seed, "Seed")->required();
  ex->add_option("--config", f.config, "Config file")->check(CLI::ExistingFile);
  ex->add_option("-o,--output", f.output, "Write the JSON report here");
  ex->add_flag("--table", f.table, "Print the flat table");

  std::vector<const char*> argv{"pathlift"};
  // "--upper:refined" is accepted as a spelling of --upper-refined.
  static const std::string kRefined = "--upper-refined";
  for (const auto& a : args) argv.push_back(a == "--upper:refined" ? kRefined.c_str() : a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*eval) return run_eval(f, out);
    if (*paths) return run_paths(f, out);
    if (*pn) {
      const Network n = load_network(f.net);
      out << format_number(path_norm_fast(n.arch, n.theta, f.q)) << '\n';
      return 0;
    }
    if (*pm) return run_pathmetric(f, out);
    if (*pr) return run_prune(f, prune_seed->count() > 0, count->count() > 0, out);
    if (*rs) return run_rescale(f, out);
    if (*nm) return run_normalize(f, out);
    if (*vl) return run_verify(f, out);
    if (*wt) return run_witness(f, out);
    if (*ex) return run_experiment_cmd(f, out);
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace pathlift
