// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace eternal {

struct Grid {
  double x_min = -30.0;
  double x_max = 30.0;
  std::size_t n = 3001;

  Grid() = default;
  Grid(double lo, double hi, std::size_t count);

  double dx() const { return (x_max - x_min) / static_cast<double>(n - 1); }
  double x(std::size_t i) const;
  std::vector<double> coords() const;
  // index of the node closest to x, clamped to the grid
  std::size_t nearest(double x) const;
  Grid refined() const { return Grid(x_min, x_max, 2 * n - 1); }
  Grid enlarged(double factor) const;

  bool operator==(const Grid &o) const = default;
};

class GridFunction {
public:
  GridFunction() = default;
  explicit GridFunction(const Grid &g, double fill = 0.0);
  GridFunction(const Grid &g, std::vector<double> values);
  static GridFunction sample(const Grid &g, const std::function<double(double)> &f);

  const Grid &grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double> &values() const { return values_; }
  std::vector<double> &values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double &operator[](std::size_t i) { return values_[i]; }
  const double *data() const { return values_.data(); }
  double *data() { return values_.data(); }

  bool all_finite() const;
  // linear interpolation; constant extension beyond the ends
  double at(double x) const;

  GridFunction &operator+=(const GridFunction &o);
  GridFunction &operator-=(const GridFunction &o);
  GridFunction &operator*=(double s);

private:
  Grid grid_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction &b);
GridFunction operator-(GridFunction a, const GridFunction &b);
GridFunction operator*(double s, GridFunction a);

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

struct NonFiniteField : std::runtime_error {
  NonFiniteField() : std::runtime_error("non-finite field") {}
};

Norms norms(const GridFunction &f);
double sup_distance(const GridFunction &a, const GridFunction &b);
double trapezoid(const GridFunction &f);

// central differences inside, second-order one-sided stencils at both ends
GridFunction diff2(const GridFunction &f);
GridFunction diff1(const GridFunction &f);

class Potential;
struct Trajectory;

struct ActionValue {
  double value = 0.0;
  bool non_decaying = false;
};

// A(f) = ∫ ½f'² + ⅓f³ − fφ dx
ActionValue action(const GridFunction &f, const Potential &phi, double tail_tol = 1e-3);

// Hook for G(u) = Σ a_i u^i with constant coefficients: ∫ ½f'² − Σ a_i f^{i+1}/(i+1) dx.
// a = (φ, 0, −1) gives back action().
ActionValue polynomial_action(const GridFunction &f, const std::vector<GridFunction> &a,
                              double tail_tol = 1e-3);

struct EnergyUndefined : std::runtime_error {
  EnergyUndefined() : std::runtime_error("energy undefined after blow-up") {}
};

// E = ½∫∫ u_t² + (u_xx − u² + φ)² dx dt
double energy(const Trajectory &traj, const Potential &phi);

void write_csv(std::ostream &os, const GridFunction &f);
void write_csv(const std::string &path, const GridFunction &f);
GridFunction read_csv(std::istream &is);
GridFunction read_csv(const std::string &path);

} // namespace eternal
