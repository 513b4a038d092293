// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/potential.hpp"

#include <array>
#include <optional>
#include <string>

namespace eternal {

// f' and f'' = f² − φ(x); x is the independent variable.
struct PhaseState {
  double f = 0.0;
  double fp = 0.0;
  double x = 0.0;
};

struct PhaseOutcome {
  bool global = true; // false: |f| passed the guard before x_target
  PhaseState state;   // final state, or last finite state before the guard tripped
  double x_blow = 0.0;
};

PhaseOutcome integrate_phase(PhaseState s, double x_target, double step, const Potential &phi,
                             double guard = 1e6);

enum class NegativeForcing {
  reject, // throw when φ(x) < 0
  drop,   // omit the ⅔φ^{3/2} term
  signed_power, // use −⅔|φ|^{3/2}
};

// H = ⅓f³ − ½f'² − fφ + ⅔φ^{3/2}
double hamiltonian(const PhaseState &s, const Potential &phi,
                   NegativeForcing neg = NegativeForcing::reject);

enum class TailOrder { leading, corrected };
enum class Side { plus, minus };

// Slope of the decaying 6/(x−d)² tail through f at x0. x0 > 0 is the right tail,
// x0 < 0 the mirrored left tail (slope sign flips).
double asymptotic_bc(double f, double x0, const Potential &phi, TailOrder order = TailOrder::leading);

struct SeriesTail {
  double d = 0.0;
  double K = 0.0;
  double R = 0.0;
  double alpha = 0.0;
  double M = 0.0;
  double log_M = 0.0; // M itself overflows for fast-decaying φ
  std::vector<double> A;
  bool valid = false;       // M < 8(α+2)(α−5)R^{α−4}
  bool a1_bounded = false;  // A_1 ≤ 8R
  double max_ratio = 0.0;   // max A_{k+1}/A_k over k ≥ 2
};

struct SlowDecay : std::runtime_error {
  SlowDecay() : std::runtime_error("decay too slow for series bound") {}
};

// Fits |φ(x)| ≤ M/(x−d)^α on [x_tail, x_tail + span] by least squares in log-log,
// then raises M so the bound holds at every sample.
SeriesTail series_tail(double d, double K, const Potential &phi, int order, double x_tail = 12.0,
                       double span = 20.0);

struct ZCurve {
  double x0 = 0.0;
  Side side = Side::plus;
  std::vector<std::array<double, 2>> points; // (f, f') at x = 0
  std::vector<double> seeds;                 // tail value f(±x0) for each point
  std::vector<std::size_t> breaks;           // indices starting a new connected piece
  double resolution = 0.0;                   // largest in-piece gap between consecutive points
};

struct NoGlobalSeeds : std::runtime_error {
  NoGlobalSeeds() : std::runtime_error("no global seeds") {}
};

std::vector<double> default_f_samples(std::size_t count = 400, double lo = 1e-4, double hi = 5.0);

// Seeds are refined until consecutive survivors are closer than resolution_target in the
// (f, f') plane (0 disables refinement) and the edge of the survivor set is bisected.
ZCurve trace_Z(double x0, const Potential &phi, const std::vector<double> &f_samples,
               Side side = Side::plus, double step = 1e-3, double guard = 1e6,
               double resolution_target = 0.01);

struct NecessaryCondition {
  bool passes = false;
  double integral = 0.0;
  bool window_test = true; // true: no window [A,B] violates the slope bound
  double worst_window_margin = 0.0;
};

NecessaryCondition necessary_condition(const Potential &phi, const Grid &g = Grid());

struct EquilibriumSolution {
  GridFunction profile;
  double f0 = 0.0;
  double fp0 = 0.0;
  double residual = 0.0;
  std::optional<int> n_unstable;
  double seed_left = 0.0;  // f(−x0)
  double seed_right = 0.0; // f(+x0)
  double param = 0.0;
  bool refined = true;
  double mismatch = 0.0;
  bool tangential = false;
};

struct MatchOptions {
  double x0 = 12.0;
  double step = 1e-3;
  double guard = 1e6;
  Grid grid;
  std::vector<double> f_samples = default_f_samples();
  int newton_iterations = 50;
  double newton_tol = 1e-11;
  double merge_distance = 1e-4;
  double transversal_angle = 1e-3;
  double resolution = 0.01;
};

struct EquilibriumSearch {
  std::vector<EquilibriumSolution> solutions;
  std::vector<EquilibriumSolution> unrefined;
  NecessaryCondition condition;
  std::string reason;
  ZCurve z_plus;
  ZCurve z_minus;
  bool possible_missed = false; // curves closer than resolution without crossing
};

// Shooting from both tails to x = 0. For parametric potentials the parameter can be
// overridden per call without rebuilding the lattice tables.
class Matcher {
public:
  explicit Matcher(const Potential &phi, double x0 = 12.0, double step = 1e-3, double guard = 1e6);

  const Potential &potential() const { return phi_; }
  double x0() const { return x0_; }
  double step() const { return step_; }

  // f and f' at x = 0 from the tail seed a on the given side, or nullopt if the orbit is not
  // global on the way in
  std::optional<PhaseState> shoot(Side side, double a, double p) const;
  std::optional<PhaseState> shoot(Side side, double a) const { return shoot(side, a, phi_.param()); }
  // (f_L(0) − f_R(0), f'_L(0) − f'_R(0))
  std::optional<std::array<double, 2>> mismatch(double p, double aL, double aR) const;

  // dense RK4 record of the shot (x ascending), used to build profiles
  std::vector<PhaseState> record(Side side, double a, double p) const;

  // assembles the solution through the given seeds on grid g, polishes it on the
  // discrete equation and fills f0/fp0/residual
  EquilibriumSolution assemble(double p, double aL, double aR, const Grid &g) const;

  // 2-D Newton in the tail seeds at fixed parameter
  struct Refined {
    bool converged = false;
    double aL = 0.0, aR = 0.0;
    double mismatch = 0.0;
    int iterations = 0;
  };
  Refined refine(double p, double aL, double aR, int max_iter = 50, double tol = 1e-11) const;

private:
  Potential phi_;
  double x0_, step_, guard_;
  std::size_t steps_;
  // φ on the half-step lattice: plus side x = x0 − k·step/2, minus side x = −x0 + k·step/2
  std::vector<double> base_plus_, slope_plus_, base_minus_, slope_minus_;
  std::optional<PhaseState> run(Side side, double a, double p, std::vector<PhaseState> *out) const;
};

EquilibriumSearch find_equilibria(const Potential &phi, const MatchOptions &opt = {});

// sup |diff2(f) − f² + φ|
double equilibrium_residual(const GridFunction &f, const Potential &phi);

// Newton on the discrete equation with the end values held; returns the final sup residual
// of the interior equations
double polish_equilibrium(GridFunction &f, const Potential &phi, int max_iter = 20, double tol = 1e-13);

void write_zcurve_csv(const std::string &path, const ZCurve &z);
void write_equilibrium_json(const std::string &path, const EquilibriumSolution &s);

} // namespace eternal
