// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/potential.hpp"
#include "eternal/trajectory.hpp"

#include <limits>

namespace eternal {

// G(u) = Σ_k a_k(x) u^k, coefficients sampled on the grid.
class Reaction {
public:
  Reaction() = default;
  Reaction(const Grid &g, std::vector<GridFunction> coefficients);
  // −u² + φ
  static Reaction flagship(const Grid &g, const Potential &phi);
  // −2f·w (linearization about f, without the quadratic term)
  static Reaction linear(const GridFunction &minus_coeff_of_w);
  // −2f·u − u²: the perturbation equation about an equilibrium f
  static Reaction perturbation(const GridFunction &f);

  const Grid &grid() const { return grid_; }
  std::size_t degree() const { return degree_; }
  const GridFunction &coefficient(std::size_t k) const { return coeffs_[k]; }
  const std::vector<GridFunction> &coefficients() const { return coeffs_; }

  GridFunction eval(const GridFunction &u) const;
  // u + h G(u)
  void explicit_step(const GridFunction &u, double h, GridFunction &out) const;
  // g_∞(z) = Σ ‖a_k‖_∞ z^k
  double majorant(double z) const;
  std::vector<double> majorant_coefficients() const;

private:
  Grid grid_;
  std::size_t degree_ = 0;
  std::vector<GridFunction> coeffs_;
  std::vector<double> packed_; // coeffs_ laid out row-major for the kernels
};

enum class Boundary {
  open,    // data outside the grid is zero
  clamped, // end nodes are held at the input's end values
};

// (I − hΔ)^{-1} on the grid: two-pass recursive filter with the exact discrete
// decay ratio of the three-point Laplacian.
GridFunction resolvent(const GridFunction &f, double h, Boundary bc = Boundary::open);
// discrete decay ratio and kernel normalization for spacing dx and step h
double resolvent_ratio(double dx, double h);
// O(n²) evaluation of (1/(2√h))∫ f(y) e^{−|x−y|/√h} dy by trapezoid quadrature
GridFunction resolvent_quadrature(const GridFunction &f, double h);

GridFunction imex_step(const GridFunction &u, double h, const Reaction &G,
                       Boundary bc = Boundary::clamped);

struct EvolveOptions {
  double blowup_threshold = 1e6;
  std::size_t stride = 0; // 0 → keep about target_snapshots
  std::size_t target_snapshots = 500;
  Boundary bc = Boundary::clamped;
};

Trajectory evolve(const GridFunction &u0, double h, double t_end, const Reaction &G,
                  const EvolveOptions &opt = {});

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Time for y' = g_∞(y), y(0) = B, to reach 10·B (level 1 when B = 0).
// kUnbounded when the majorant never gets there.
double a_priori_horizon(double B, const Reaction &G);

struct ConvergenceRow {
  double h = 0.0;
  double distance = 0.0; // ‖u_h(T) − u_{h/2}(T)‖₂
  double ratio = 0.0;    // distance / next distance; NaN on the last row
};

struct ConvergenceBlowup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<ConvergenceRow> convergence_study(const GridFunction &u0, double T,
                                              const std::vector<double> &h_list, const Reaction &G);

void write_trajectory_csv(const std::string &path, const Trajectory &traj);
void write_trajectory_meta(const std::string &path, const Trajectory &traj, double t_end);

} // namespace eternal
