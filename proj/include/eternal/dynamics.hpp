// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/imex.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>

namespace eternal {

// Perturbation direction added to an equilibrium.
struct Direction {
  enum class Kind { gaussian, eigenmix };
  Kind kind = Kind::gaussian;
  double width = 10.0; // gaussian: e^{−x²/width}
  double theta = 0.0;  // eigenmix: e1 cos θ + e2 sin θ

  static Direction gaussian(double width) { return {Kind::gaussian, width, 0.0}; }
  static Direction eigenmix(double theta) { return {Kind::eigenmix, 10.0, theta}; }
};

// Discrete equilibrium near f with the end values replaced; the steady state of a clamped
// run whose initial data has these ends.
GridFunction boundary_consistent(const GridFunction &f, double left, double right, const Potential &phi);

// e1, e2: unit eigenfunctions of the two smallest positive eigenvalues (ascending)
struct UnstablePair {
  GridFunction e1, e2;
  double lambda1 = 0.0, lambda2 = 0.0;
};
UnstablePair unstable_pair(const GridFunction &f_eq);

GridFunction direction_field(const GridFunction &f_eq, const Direction &d);

Trajectory evolve_perturbed(const GridFunction &f_eq, double A, const Direction &d, const Potential &phi,
                            double h, double t_end, const EvolveOptions &opt = {});

struct FateReport {
  enum class Verdict { converged, blowup, undecided };
  Verdict verdict = Verdict::undecided;
  int index = -1;                   // converged: equilibrium index
  double sup_dist = std::nan("");   // converged: worst distance over the trailing window
  double t_star = std::nan("");     // blowup
  double horizon = 0.0;
};
std::string verdict_name(FateReport::Verdict v);

// converged ⇔ sup distance to one equilibrium below tol over the final 10% of the horizon
FateReport classify_fate(const Trajectory &traj, const std::vector<GridFunction> &equilibria, double tol = 1e-3);

struct FrontierOptions {
  enum class Vary { amplitude, angle };
  Vary vary = Vary::amplitude;
  double amplitude = 0.1; // fixed A when the angle varies
  double h = 1e-2;
  int max_doublings = 4;
  double fate_tol = 1e-3;
  EvolveOptions evolve;
  // empty → all equilibria of phi on the grid of f_eq; either way they are made
  // boundary-consistent with f_eq before classification
  std::vector<GridFunction> equilibria;
};

struct FrontierResult {
  double value = 0.0; // midpoint of the final bracket
  double lo = 0.0, hi = 0.0;
  FateReport fate_lo, fate_hi;
  bool undecided = false;
  double horizon = 0.0; // horizon in use at the end
  int iterations = 0;
};

struct NoBracket : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bisection on the initial-condition parameter p ↦ u0(p) until |hi − lo| < tol.
FrontierResult frontier_bisect(const std::function<GridFunction(double)> &initial, const Reaction &G,
                               const std::vector<GridFunction> &equilibria, double lo, double hi, double tol,
                               double horizon, const FrontierOptions &opt);

FrontierResult frontier_search(const GridFunction &f_eq, const Direction &d, double lo, double hi, double tol,
                               const Potential &phi, double horizon, const FrontierOptions &opt = {});

struct FunnelBreach : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Heteroclinic {
  Trajectory traj; // times shifted so that u(0, x=0) is the midpoint of f_minus(0), f_plus(0)
  double shift = 0.0;
  double max_breach = 0.0; // worst excursion outside [f_minus, f_plus]
};

Heteroclinic construct_heteroclinic(const GridFunction &f_minus, const GridFunction &f_plus, const Potential &phi,
                                    double eps, double h, double t_end, const EvolveOptions &opt = {});

// first time the sup distance to f exceeds radius (NaN if never)
double leave_time(const Trajectory &traj, const GridFunction &f, double radius);

struct VariationalCheck {
  bool monotone = true;
  double max_increase = 0.0; // largest step of A(u(t)) against the flow direction
  double max_decrease = 0.0; // largest step along it
  double energy_vs_action_gap = 0.0;
  double action_drop = 0.0;  // A(start) − A(end)
  double energy = 0.0;
};
VariationalCheck verify_variational(const Trajectory &traj, const Potential &phi);

struct FujitaOptions {
  double h = 1e-3;
  bool nonlinear = true;
  double nonlinear_horizon_factor = 1.5; // multiples of violation_time (or of T without one)
  double blowup_threshold = 1e6;
  // relative slack on t_star ≤ violation_time; covers the extrapolation error in the
  // equality case f ≡ 0, h ≡ −ε
  double fence_tol = 1e-3;
};

struct FujitaDiagnostic {
  std::vector<double> times, J, w_l1;
  std::optional<double> violation_time;
  double mass_after_one_step = 0.0;
  // nonlinear run at h, h/2, h/4 and the h → 0 extrapolation
  std::vector<double> t_star_raw;
  std::optional<double> t_star;
  bool fence_respected = true; // t_star ≤ violation_time when both exist
};

// w_t = w_xx − 2fw from a unit delta at x0; J = ⟨w, h_init⟩; violation where −J ∫₀ᵗ ds/‖w‖₁ > 1.
// The nonlinear problem u_t = u_xx − 2fu − u² starts from h_init.
FujitaDiagnostic fujita_experiment(const GridFunction &f, const GridFunction &h_init, double x0, double T,
                                   const FujitaOptions &opt = {});

// Blow-up time of the clamped IMEX run, estimated as t + 1/max|u| at the first step with
// h·max|u| ≥ 0.01 and confirmed by max|u| passing threshold; nullopt if it stays bounded.
std::optional<double> blowup_time(const GridFunction &u0, double h, double horizon, const Reaction &G,
                                  double threshold = 1e6);

// T + a·h + b·h·ln h through three (h, t) samples
double extrapolate_blowup(const std::vector<double> &h, const std::vector<double> &t);

struct ViolationSetup {
  double beta = 0.0, K = 0.0, gamma = 0.0;
  double x1 = 0.0, x0 = 0.0;
  bool tail_level_ok = false, shift_ok = false;
  double norm_inf = 0.0, norm_1 = 0.0;
  GridFunction h;
};

// Shifted negative gaussian −β e^{−β^{3/2}(x−x0)²} with x1, x0 found by scanning the grid.
ViolationSetup violation_initial_condition(const GridFunction &f, double beta = 0.1, double K = 2.0);

void write_fujita_csv(const std::string &path, const FujitaDiagnostic &d);

} // namespace eternal
