#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "pathlift/cli.hpp"
#include "pathlift/io.hpp"
#include "support.hpp"

using namespace pathlift;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream o, e;
  int c = dispatch(args, o, e);
  return {c, o.str(), e.str()};
}

std::string fixture(const std::string& name) { return std::string(PATHLIFT_FIXTURES) + "/" + name; }

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(5.0) == "5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-2.5e-300) == "-2.5e-300");
}

TEST_CASE("pathnorm and eval") {
  auto r = run({"pathnorm", fixture("net_a.json")});
  CHECK(r.code == 0);
  CHECK(r.out == "5\n");
  CHECK(run({"pathnorm", fixture("net_d.json")}).out == "5\n");
  CHECK(run({"eval", fixture("net_a.json"), "--x", "1"}).out.find("3") != std::string::npos);
  CHECK(run({"eval", fixture("net_d.json"), "--x", "1,1"}).out.find("2") != std::string::npos);
  // wrong input size is a domain error
  CHECK(run({"eval", fixture("net_d.json"), "--x", "1"}).code == 1);
}

TEST_CASE("pathmetric flags") {
  const auto a = fixture("net_a.json"), p = fixture("net_a_pruned.json");
  CHECK(run({"pathmetric", a, p, "--exact"}).out == "3\n");
  CHECK(run({"pathmetric", a, p, "--lower"}).out == "3\n");
  CHECK(run({"pathmetric", a, p, "--upper"}).out == "24\n");
  CHECK(run({"pathmetric", a, p, "--oracle"}).out == "3\n");
  CHECK(run({"pathmetric", a, p, "--upper:refined"}).code == 0);
  auto rep = run({"pathmetric", a, p});
  CHECK(rep.out.find("\"upper_coarse\"") != std::string::npos);
}

TEST_CASE("prune writes a mask and a network") {
  auto tmp = std::filesystem::temp_directory_path() / "pathlift_cli_pruned.json";
  auto r = run({"prune", fixture("net_a.json"), "--criterion", "pathmag", "--method", "brute",
                "--amount", "0.5", "--edges-only", "-o", tmp.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"mask\": \"1010111\"") != std::string::npos);
  auto n = load_network(tmp.string());
  CHECK(n.theta[1] == 0.0);
  CHECK(n.theta[3] == 0.0);
  std::filesystem::remove(tmp);
}

TEST_CASE("witness and verify") {
  auto c = run({"witness", "--counterexample"});
  CHECK(c.code == 0);
  CHECK(c.out.find("path-metric 0\n") != std::string::npos);
  CHECK(c.out.find("output gap 1\n") != std::string::npos);
  auto e = run({"witness", "--equality", "2", "2", "1", "1"});
  CHECK(e.out.find("lhs 3\n") != std::string::npos);
  CHECK(e.out.find("rhs 3\n") != std::string::npos);
  auto v = run({"verify-lipschitz", "--seed", "7", "--cases", "100"});
  CHECK(v.code == 0);
  CHECK(v.out.find("100/100 hold") != std::string::npos);
}

TEST_CASE("usage and domain errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"rescale", fixture("net_a.json")}).code == 2);
  CHECK(run({"verify-lipschitz"}).code == 2);
  CHECK(run({"experiment"}).code == 2);
  CHECK(run({"pathnorm", "/nonexistent.json"}).code == 2);
  CHECK(run({"prune", fixture("net_a.json"), "--criterion", "obd"}).code == 1);
  CHECK(run({"pathmetric", fixture("net_a.json"), fixture("net_d.json"), "--oracle"}).code == 1);
  auto r = run({"rescale", fixture("net_a.json"), "--seed", "3"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"neurons\"") != std::string::npos);
}
