// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace eternal::cli {

inline constexpr const char *kVersion = "0.1.0";

struct RunConfig {
  std::string command = "bifurcate";

  struct {
    double x_min = -30.0;
    double x_max = 30.0;
    std::size_t n = 3001;
  } grid;

  struct {
    std::string family = "gauss-quad";
    double c = 0.0;
    double P = 1.0;
    std::string file; // tabulated values (x,value)
  } phi;

  struct {
    double h = 1e-2;
    double t_end = 10.0;
    double blowup_threshold = 1e6;
  } time;

  struct {
    double x0 = 12.0;     // matching point
    double step = 1e-3;   // shooting step
    double newton_tol = 1e-10;
    double fate_tol = 1e-3;
  } solver;

  // evolve
  double u0 = 0.0;
  std::string u0_file;
  // bifurcate
  std::string c_range = "-0.5:0.8";
  double ds = 5e-3;
  std::string seed_branch = "all";
  // spectrum / frontier: equilibrium index in increasing f0 order (−1: command default)
  int index = -1;
  // heteroclinic
  double eps = 0.5;
  // frontier
  std::string direction = "gaussian";
  double width = 10.0;
  double amplitude = 0.1;
  double lo = -3.0, hi = -2.0;
  double tol = 1e-3;
  double horizon = 50.0;
  // blowup
  std::string fence_f = "zero";       // zero | equilibrium
  std::string fence_h = "constant";   // constant | gaussian | shifted
  double fence_eps = 1.0;
  double fence_x0 = 0.0;
  double fence_T = 2.0;
  double fence_beta = 0.1;

  int threads = 0;
  std::string out = "out.csv";
  std::string config_file;
};

struct Violation {
  std::string field, value, rule;
  std::string message() const { return field + " = " + value + " violates " + rule; }
};

std::vector<Violation> validate(const RunConfig &cfg);

// lo:hi with lo < hi
bool parse_range(const std::string &s, double &lo, double &hi);

// INI file with sections grid, phi, time, solver, evolve, bifurcate, spectrum,
// heteroclinic, frontier, blowup, run; unknown keys throw ConfigError naming them
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
void load_config_file(const std::string &path, RunConfig &cfg);

nlohmann::json to_json(const RunConfig &cfg);

// exit codes: 0 success, 1 computational failure, 2 configuration error
int main(int argc, char **argv, std::ostream &out, std::ostream &err);
int run(const RunConfig &cfg, std::ostream &out, std::ostream &err);

} // namespace eternal::cli
