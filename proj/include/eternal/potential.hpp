// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/grid.hpp"

#include <memory>
#include <string>

namespace eternal {

enum class Family { GaussianQuadratic, Gaussian, Constant, Tabulated };

std::string family_name(Family f);
Family parse_family(const std::string &s); // throws std::invalid_argument

// The forcing φ. Closed-form families are affine in their parameter p:
// φ(x; p) = base(x) + p·slope(x).
class Potential {
public:
  static Potential gaussian_quadratic(double c); // (x² − c)e^{−x²/2}
  static Potential gaussian(double c);           // c·e^{−x²/2}
  static Potential constant(double P);
  // Values outside the table are linearly blended to the declared limit A
  // over one table spacing, then held at A.
  static Potential tabulated(GridFunction table, double limit, double tol = 1e-6);

  Family family() const { return family_; }
  double param() const { return param_; }
  double limit() const; // value at ±∞
  bool parametric() const { return family_ != Family::Tabulated; }
  Potential with_param(double p) const;

  double operator()(double x) const;
  double base(double x) const;
  double slope(double x) const;
  GridFunction sample(const Grid &g) const;

  bool even() const { return family_ != Family::Tabulated; }
  std::string describe() const;

private:
  Family family_ = Family::Constant;
  double param_ = 0.0;
  std::shared_ptr<const GridFunction> table_;
  double limit_ = 0.0;
};

} // namespace eternal
