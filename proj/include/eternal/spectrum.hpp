// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/trajectory.hpp"

#include <optional>

namespace eternal {

// H = d²/dx² − W(x), discretized on the interior nodes with zero far-field values.
struct SchrodingerOp {
  Grid grid;
  GridFunction W;
  double essential_edge = 0.0; // −lim W
  double W_limit = 0.0;

  SchrodingerOp() = default;
  // W_limit is the declared value of W at ±∞; checked against the end values within tol
  SchrodingerOp(GridFunction W, double W_limit = 0.0, double tol = 0.1);
  static SchrodingerOp linearization(const GridFunction &f, double f_limit = 0.0);

  std::size_t dim() const { return grid.n - 2; }
  // number of eigenvalues of the discrete operator strictly greater than lambda
  std::size_t count_above(double lambda) const;
  // k-th largest eigenvalue (k = 0 is the top one), by bisection
  double eigenvalue_from_top(std::size_t k, double rel_tol = 1e-15) const;
  // inverse iteration; returns values on the full grid (zero at the ends), unit L²
  GridFunction eigenvector(double lambda) const;
  double residual(double lambda, const GridFunction &v) const; // ‖Hv − λv‖₂ / ‖v‖₂
  double gershgorin_upper() const;
  double gershgorin_lower() const;
  SchrodingerOp enlarged(double factor) const;
};

struct SpectrumReport {
  std::vector<double> eigenvalues; // decreasing, all above edge − margin
  std::vector<GridFunction> eigenfunctions;
  std::vector<char> edge_ambiguous;
  std::vector<double> residuals;
  std::vector<int> sign_changes;
  int n_positive = 0;
  bool ambiguous = false;      // some eigenvalue within margin of 0 or of the edge
  bool truncation_stable = true;
  double margin = 0.0;
  bool oscillation_ok = true;  // eigenfunction j (from the top) has j sign changes
};

struct EigOptions {
  double margin = -1.0;        // < 0: 1e-3 · max|W|, at least 1e-6
  bool check_truncation = true;
  bool eigenvectors = true;
};

SpectrumReport eigs_above_edge(const SchrodingerOp &op, const EigOptions &opt = {});

// sign changes ignoring entries below rel·max|v|
int count_sign_changes(const GridFunction &v, double rel = 1e-8);

struct PositiveCount {
  int count = 0;
  bool ambiguous = false;
};

PositiveCount count_positive(const GridFunction &f);

// eigenvalue of the truncated discrete operator closest to 0, continuum states included
double smallest_abs_eigenvalue(const SchrodingerOp &op);
SpectrumReport unstable_spectrum(const GridFunction &f, bool eigenvectors = true);

struct ConnectingDimension {
  int dim = 0;
  bool ambiguous = false;
};

ConnectingDimension connecting_dimension(const GridFunction &f_minus, const GridFunction &f_plus);

struct OrbitSpectrum {
  std::vector<double> times;
  std::vector<std::vector<double>> lambdas; // top-k per sampled time
  std::vector<int> n_positive;
  // gaps between adjacent discrete eigenvalues (both above the edge margin); inf when
  // fewer than two. Truncated continuum states pair up across barriers and are excluded.
  std::vector<double> gaps;
  double min_gap = 0.0;
  double min_gap_all = 0.0; // over all adjacent top-k pairs, continuum included
};

OrbitSpectrum spectrum_along_orbit(const Trajectory &traj, std::size_t k, std::size_t stride);

void write_spectrum_csv(const std::string &path, const SpectrumReport &r);
void write_orbit_spectrum_csv(const std::string &path, const OrbitSpectrum &s);

} // namespace eternal
