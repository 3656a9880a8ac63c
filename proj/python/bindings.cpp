#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pathlift/cli.hpp"
#include "pathlift/errors.hpp"
#include "pathlift/experiment.hpp"
#include "pathlift/io.hpp"
#include "pathlift/lipschitz.hpp"
#include "pathlift/metrics.hpp"
#include "pathlift/paths.hpp"
#include "pathlift/pruning.hpp"
#include "pathlift/transforms.hpp"

namespace py = pybind11;
using namespace pathlift;

namespace {

std::vector<double> coords(const ParamVector& t) { return {t.values().begin(), t.values().end()}; }

Network with_theta(const Network& n, std::vector<double> theta) {
  ParamVector t(std::move(theta));
  check_params(n.arch, t);
  return {n.arch, std::move(t)};
}

py::dict bound_dict(const BoundReport& r) {
  py::dict d;
  d["lhs"] = r.lhs;
  d["rhs"] = r.rhs;
  d["holds"] = r.holds;
  d["slack"] = r.slack;
  d["variant"] = to_string(r.variant);
  d["source"] = to_string(r.source);
  return d;
}

py::dict witness_dict(const WitnessReport& w) {
  py::dict d = bound_dict(w.report);
  d["path_metric"] = w.path_metric;
  d["x"] = w.x;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Path-lifting tools for DAG ReLU networks";

  static py::exception<Error> exc(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = exc;
      py::object inst = err(std::string(e.what()));
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(exc.ptr(), inst.ptr());
    }
  });

  py::class_<Network>(m, "Network")
      .def_static("from_json", [](const std::string& s) { return parse_network(s); })
      .def_static("load", &load_network)
      .def("to_json", [](const Network& n) { return network_to_string(n.arch, n.theta); })
      .def("save", [](const Network& n, const std::string& p) { save_network(p, n.arch, n.theta); })
      .def_property_readonly("theta", [](const Network& n) { return coords(n.theta); })
      .def("with_theta", &with_theta)
      .def_property_readonly("coord_names",
                             [](const Network& n) {
                               std::vector<std::string> out;
                               for (CoordIndex c = 0; c < n.arch.num_coords(); ++c) out.push_back(n.arch.coord_name(c));
                               return out;
                             })
      .def_property_readonly("inputs",
                             [](const Network& n) {
                               std::vector<std::string> out;
                               for (auto v : n.arch.inputs()) out.push_back(n.arch.id(v));
                               return out;
                             })
      .def_property_readonly("outputs",
                             [](const Network& n) {
                               std::vector<std::string> out;
                               for (auto v : n.arch.outputs()) out.push_back(n.arch.id(v));
                               return out;
                             })
      .def("forward", [](const Network& n, const std::vector<double>& x) { return forward(n.arch, n.theta, x); })
      .def("__repr__", [](const Network& n) {
        return "<Network neurons=" + std::to_string(n.arch.num_neurons()) +
               " coords=" + std::to_string(n.arch.num_coords()) + ">";
      });

  m.def("path_norm", [](const Network& n, double q) { return path_norm_fast(n.arch, n.theta, q); },
        py::arg("net"), py::arg("q") = 1.0);
  m.def("path_count", [](const Network& n) { return count_paths(n.arch); });
  m.def("path_lifting", [](const Network& n) {
    const PathLifting pl = path_lifting(n.arch, n.theta);
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t i = 0; i < pl.paths.size(); ++i) out.emplace_back(path_string(n.arch, pl.paths[i]), pl.values[i]);
    return out;
  });
  m.def("linearized_output",
        [](const Network& n, const std::vector<double>& x) { return linearized_output(n.arch, n.theta, x); });

  m.def("path_metric", [](const Network& a, const Network& b) {
    const PathMetricReport r = path_metric_report(a.arch, a.theta, b.theta);
    py::dict d;
    d["lower"] = r.lower;
    d["exact"] = r.exact ? py::cast(*r.exact) : py::none();
    d["certificate"] = to_string(r.certificate);
    d["upper_coarse"] = r.upper_coarse;
    d["upper_refined"] = r.upper_refined;
    d["oracle"] = r.oracle ? py::cast(*r.oracle) : py::none();
    return d;
  });

  m.def("path_mag_scores",
        [](const Network& n, const std::string& method) {
          return path_mag_scores(n.arch, n.theta, parse_method(method)).values;
        },
        py::arg("net"), py::arg("method") = "autodiff");
  m.def("grad_path_norm", [](const Network& n) { return grad_path_norm(n.arch, n.theta); });

  m.def("prune",
        [](const Network& n, const std::string& criterion, double amount, bool edges_only) {
          const ScoreVector s = compute_scores(n.arch, n.theta, parse_criterion(criterion));
          PruneOptions opt;
          opt.edges_only = edges_only;
          const PruneResult r = apply_prune(n.arch, n.theta, s, PruneAmount::of_fraction(amount), opt);
          std::vector<bool> keep(r.mask.keep().begin(), r.mask.keep().end());
          return std::make_pair(keep, Network{n.arch, r.theta});
        },
        py::arg("net"), py::arg("criterion") = "pathmag", py::arg("amount") = 0.5,
        py::arg("edges_only") = false);

  m.def("rescale_random",
        [](const Network& n, std::uint64_t seed, const std::string& preset, bool include_kpool) {
          const Rescaling l = random_rescaling(n.arch, seed, RescalePreset::parse(preset), include_kpool);
          return Network{n.arch, rescale(n.arch, n.theta, l)};
        },
        py::arg("net"), py::arg("seed"), py::arg("preset") = "fixed", py::arg("include_kpool") = false);
  m.def("normalize",
        [](const Network& n, bool include_kpool) {
          return Network{n.arch, normalize(n.arch, n.theta, {include_kpool})};
        },
        py::arg("net"), py::arg("include_kpool") = false);

  m.def("verify_bound",
        [](const Network& a, const Network& b, const std::vector<double>& x, const std::string& variant) {
          return bound_dict(verify_bound(a.arch, a.theta, b.theta, x, parse_variant(variant)));
        },
        py::arg("net"), py::arg("net2"), py::arg("x"), py::arg("variant") = "main");
  m.def("equality_witness", [](std::size_t d, double a, double b, double x0) {
    return witness_dict(equality_witness(d, a, b, x0));
  });
  m.def("sign_counterexample", [](double x) { return witness_dict(sign_counterexample(x)); },
        py::arg("x") = 1.0);

  m.def("run_experiment_json", [](const std::string& config_json) {
    ExperimentConfig c = parse_experiment_config(config_json);
    py::gil_scoped_release release;
    return report_to_json(run_experiment(c));
  });

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = dispatch(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
