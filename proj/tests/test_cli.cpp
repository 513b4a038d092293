// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "../tools/cli.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace eternal::cli;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "eternal_run");
  std::vector<char *> argv;
  for (auto &a : args)
    argv.push_back(a.data());
  std::ostringstream out, err;
  Result r;
  r.code = eternal::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json manifest(const std::string &stem) { return nlohmann::json::parse(slurp(stem + ".manifest.json")); }

// removes every file a run listed, then its manifest
void cleanup(const std::string &stem) {
  nlohmann::json m = manifest(stem);
  for (const auto &p : m["outputs"])
    std::remove(p.get<std::string>().c_str());
  std::remove((stem + ".manifest.json").c_str());
}

bool has_rule(const std::vector<Violation> &v, const std::string &rule) {
  for (const auto &x : v)
    if (x.rule == rule)
      return true;
  return false;
}

} // namespace

TEST_CASE("validate examples") {
  RunConfig c;
  CHECK(validate(c).empty());
  c.grid.n = 2;
  auto v = validate(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == "grid.n ≥ 3");
  CHECK(v[0].field == "grid.n");
  CHECK(v[0].value == "2");
  c = RunConfig{};
  c.time.h = 0.0;
  CHECK(has_rule(validate(c), "time.h > 0"));
  c.time.h = -1.0;
  CHECK(has_rule(validate(c), "time.h > 0"));
  c = RunConfig{};
  c.c_range = "0.8:-0.5";
  v = validate(c);
  REQUIRE(v.size() == 1);
  CHECK(v[0].message() == "bifurcate.c_range = 0.8:-0.5 violates lo:hi with lo < hi");
}

TEST_CASE("parse_range") {
  double lo = 0, hi = 0;
  CHECK(parse_range("-0.5:0.8", lo, hi));
  CHECK(lo == -0.5);
  CHECK(hi == 0.8);
  CHECK_FALSE(parse_range("0.8:-0.5", lo, hi));
  CHECK_FALSE(parse_range("1:1", lo, hi));
  CHECK_FALSE(parse_range("abc", lo, hi));
  CHECK_FALSE(parse_range("1:2:3", lo, hi));
}

TEST_CASE("equilibria past the fold exit 1") {
  auto r = invoke({"equilibria", "--phi", "gauss-quad", "--c", "0.9", "--out", "cli_none.csv"});
  CHECK(r.code == 1);
  CHECK(r.err.find("necessary/matching conditions not met; 0 equilibria") != std::string::npos);
  auto m = manifest("cli_none");
  CHECK(m["status"] == "failure");
  cleanup("cli_none");
}

TEST_CASE("configuration errors exit 2 naming the field") {
  auto r = invoke({"bifurcate", "--c-range", "0.8:-0.5", "--out", "cli_bad.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("bifurcate.c_range") != std::string::npos);

  r = invoke({"equilibria", "--no-such-flag", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("--no-such-flag") != std::string::npos);

  r = invoke({"--config", "does_not_exist.ini", "equilibria"});
  CHECK(r.code == 2);

  r = invoke({"evolve", "--n", "2"});
  CHECK(r.code == 2);
  CHECK(r.err.find("grid.n ≥ 3") != std::string::npos);

  r = invoke({"evolve", "--h", "0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("time.h > 0") != std::string::npos);

  r = invoke({});
  CHECK(r.code == 2);

  {
    std::ofstream("cli_unknown.ini") << "[grid]\nn = 1001\nspacing = 3\n";
  }
  r = invoke({"--config", "cli_unknown.ini", "equilibria"});
  CHECK(r.code == 2);
  CHECK(r.err.find("grid.spacing") != std::string::npos);

  {
    std::ofstream("cli_unknown.ini") << "[grid]\nn = many\n";
  }
  r = invoke({"--config", "cli_unknown.ini", "equilibria"});
  CHECK(r.code == 2);
  CHECK(r.err.find("grid.n") != std::string::npos);
  std::remove("cli_unknown.ini");
}

TEST_CASE("help and version") {
  auto r = invoke({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("bifurcate") != std::string::npos);
  r = invoke({"--version"});
  CHECK(r.code == 0);
  CHECK(r.out.find(kVersion) != std::string::npos);
}

TEST_CASE("equilibria at c = 0.4: outputs, headers, manifest") {
  auto r = invoke({"equilibria", "--c", "0.4", "--out", "cli_eq.csv"});
  REQUIRE(r.code == 0);
  auto res = nlohmann::json::parse(r.out);
  CHECK(res["n_equilibria"] == 2);
  auto m = manifest("cli_eq");
  CHECK(m["status"] == "ok");
  CHECK(m["software"]["version"] == kVersion);
  CHECK(m["config"]["phi"]["c"] == 0.4);
  CHECK(m["config"]["command"] == "equilibria");
  // manifests round-trip
  CHECK(nlohmann::json::parse(m.dump()) == m);
  REQUIRE(m["outputs"].is_array());
  CHECK(m["outputs"].size() >= 5);
  for (const auto &p : m["outputs"]) {
    std::string path = p.get<std::string>();
    std::string body = slurp(path);
    REQUIRE_FALSE(body.empty());
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
      std::string first = body.substr(0, body.find('\n'));
      CHECK_MESSAGE(first.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos, path);
    } else {
      CHECK(nlohmann::json::accept(body));
    }
  }
  std::string first = slurp("cli_eq.csv");
  CHECK(first.rfind("index,f0,fp0,residual,n_unstable\n", 0) == 0);

  // identical config gives bit-identical files
  std::vector<std::string> before;
  for (const auto &p : m["outputs"])
    before.push_back(slurp(p.get<std::string>()));
  std::string man = slurp("cli_eq.manifest.json");
  REQUIRE(invoke({"equilibria", "--c", "0.4", "--out", "cli_eq.csv"}).code == 0);
  for (std::size_t k = 0; k < before.size(); ++k)
    CHECK(slurp(m["outputs"][k].get<std::string>()) == before[k]);
  CHECK(slurp("cli_eq.manifest.json") == man);
  cleanup("cli_eq");
}

TEST_CASE("config precedence: flags over file over defaults") {
  {
    std::ofstream("cli_prec.ini") << "[grid]\nn = 1001\nx_max = 25\n[phi]\nc = 0.4\n[run]\nout = cli_prec.csv\n";
  }
  REQUIRE(invoke({"--config", "cli_prec.ini", "equilibria", "--n", "1501"}).code == 0);
  auto m = manifest("cli_prec");
  CHECK(m["config"]["grid"]["n"] == 1501);  // flag
  CHECK(m["config"]["grid"]["x_max"] == 25.0); // file
  CHECK(m["config"]["phi"]["c"] == 0.4);    // file
  CHECK(m["config"]["grid"]["x_min"] == -30.0); // default
  // flags may also precede the file
  REQUIRE(invoke({"--n", "1201", "--config", "cli_prec.ini", "equilibria"}).code == 0);
  nlohmann::json m2 = manifest("cli_prec");
  CHECK(m2["config"]["grid"]["n"] == 1201);
  cleanup("cli_prec");
  std::remove("cli_prec.ini");
}

TEST_CASE("evolve: scalar blow-up") {
  auto r = invoke({"evolve", "--phi", "constant", "--P", "0", "--u0", "-1", "--h", "1e-3", "--t-end", "3", "--n", "301",
                   "--out", "cli_ev.csv"});
  REQUIRE(r.code == 0);
  auto res = nlohmann::json::parse(r.out);
  REQUIRE(res.contains("blowup"));
  CHECK(res["blowup"]["t_star"].get<double>() == doctest::Approx(1.0).epsilon(0.02));
  std::string body = slurp("cli_ev.csv");
  CHECK(body.substr(0, body.find('\n')).find('t') != std::string::npos);
  cleanup("cli_ev");
}

TEST_CASE("spectrum of the lower equilibrium at c = 0") {
  auto r = invoke({"spectrum", "--c", "0", "--index", "0", "--out", "cli_sp.csv"});
  REQUIRE(r.code == 0);
  auto res = nlohmann::json::parse(r.out);
  CHECK(res["n_positive"] == 2);
  CHECK(slurp("cli_sp.csv").rfind("index,eigenvalue\n", 0) == 0);
  cleanup("cli_sp");
  r = invoke({"spectrum", "--c", "0", "--index", "7", "--out", "cli_sp.csv"});
  CHECK(r.code == 1);
  cleanup("cli_sp");
}

TEST_CASE("blowup: constant fence") {
  auto r = invoke({"blowup", "--eps", "2", "--T", "1", "--n", "301", "--out", "cli_bl.csv"});
  REQUIRE(r.code == 0);
  auto res = nlohmann::json::parse(r.out);
  CHECK(res["violation_time"].get<double>() == doctest::Approx(0.5).epsilon(0.02));
  CHECK(res["fence_respected"] == true);
  CHECK(slurp("cli_bl.csv").rfind("t,J,w_l1\n", 0) == 0);
  cleanup("cli_bl");
}

TEST_CASE("bifurcate with the default window reproduces the diagram events") {
  auto r = invoke({"bifurcate", "--phi", "gauss-quad", "--c-range", "-0.5:0.8", "--out", "cli_bif.csv"});
  REQUIRE(r.code == 0);
  auto res = nlohmann::json::parse(r.out);
  int folds = 0, pitchforks = 0, ends = 0;
  for (const auto &e : res["events"]) {
    double c = e["c"].get<double>();
    if (e["kind"] == "fold") {
      ++folds;
      CHECK(std::fabs(c - 0.7706) <= 0.02);
    } else if (e["kind"] == "pitchfork") {
      ++pitchforks;
      CHECK(std::fabs(c - 0.0501) <= 0.01);
    } else {
      ++ends;
    }
  }
  CHECK(folds == 1);
  CHECK(pitchforks == 1);
  CHECK(ends == 3);
  CHECK(slurp("cli_bif.csv").rfind("c,f0,fp0,n_unstable,smallest_abs_eig,branch_id\n", 0) == 0);
  CHECK(slurp("cli_bif_events.csv").rfind("kind,c,branch_id\n", 0) == 0);
  cleanup("cli_bif");
}
