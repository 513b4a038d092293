// SPDX-License-Identifier: Apache-2.0
#include "eternal/potential.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eternal {

std::string family_name(Family f) {
  switch (f) {
  case Family::GaussianQuadratic:
    return "gauss-quad";
  case Family::Gaussian:
    return "gauss";
  case Family::Constant:
    return "constant";
  case Family::Tabulated:
    return "tabulated";
  }
  return "?";
}

Family parse_family(const std::string &s) {
  if (s == "gauss-quad" || s == "gaussian-quadratic")
    return Family::GaussianQuadratic;
  if (s == "gauss" || s == "gaussian")
    return Family::Gaussian;
  if (s == "constant")
    return Family::Constant;
  if (s == "tabulated")
    return Family::Tabulated;
  throw std::invalid_argument("unknown potential family '" + s + "'");
}

Potential Potential::gaussian_quadratic(double c) {
  Potential p;
  p.family_ = Family::GaussianQuadratic;
  p.param_ = c;
  return p;
}

Potential Potential::gaussian(double c) {
  Potential p;
  p.family_ = Family::Gaussian;
  p.param_ = c;
  return p;
}

Potential Potential::constant(double P) {
  Potential p;
  p.family_ = Family::Constant;
  p.param_ = P;
  p.limit_ = P;
  return p;
}

Potential Potential::tabulated(GridFunction table, double limit, double tol) {
  if (!table.all_finite())
    throw std::invalid_argument("tabulated potential has non-finite values");
  if (std::fabs(table.values().front() - limit) > tol || std::fabs(table.values().back() - limit) > tol)
    throw std::invalid_argument("tabulated potential does not reach its declared limit at the grid ends");
  Potential p;
  p.family_ = Family::Tabulated;
  p.limit_ = limit;
  p.table_ = std::make_shared<const GridFunction>(std::move(table));
  return p;
}

double Potential::limit() const {
  switch (family_) {
  case Family::Constant:
    return param_;
  case Family::Tabulated:
    return limit_;
  default:
    return 0.0;
  }
}

Potential Potential::with_param(double p) const {
  switch (family_) {
  case Family::GaussianQuadratic:
    return gaussian_quadratic(p);
  case Family::Gaussian:
    return gaussian(p);
  case Family::Constant:
    return constant(p);
  case Family::Tabulated:
    break;
  }
  throw std::logic_error("tabulated potential has no parameter");
}

double Potential::base(double x) const {
  switch (family_) {
  case Family::GaussianQuadratic:
    return x * x * std::exp(-0.5 * x * x);
  case Family::Gaussian:
  case Family::Constant:
    return 0.0;
  case Family::Tabulated: {
    const Grid &g = table_->grid();
    double dx = g.dx();
    if (x < g.x_min) {
      double w = std::min(1.0, (g.x_min - x) / dx);
      return (1.0 - w) * table_->values().front() + w * limit_;
    }
    if (x > g.x_max) {
      double w = std::min(1.0, (x - g.x_max) / dx);
      return (1.0 - w) * table_->values().back() + w * limit_;
    }
    return table_->at(x);
  }
  }
  return 0.0;
}

double Potential::slope(double x) const {
  switch (family_) {
  case Family::GaussianQuadratic:
    return -std::exp(-0.5 * x * x);
  case Family::Gaussian:
    return std::exp(-0.5 * x * x);
  case Family::Constant:
    return 1.0;
  case Family::Tabulated:
    return 0.0;
  }
  return 0.0;
}

double Potential::operator()(double x) const {
  switch (family_) {
  case Family::GaussianQuadratic:
    return (x * x - param_) * std::exp(-0.5 * x * x);
  case Family::Gaussian:
    return param_ * std::exp(-0.5 * x * x);
  case Family::Constant:
    return param_;
  case Family::Tabulated:
    return base(x);
  }
  return 0.0;
}

GridFunction Potential::sample(const Grid &g) const {
  GridFunction r(g);
  for (std::size_t i = 0; i < g.n; ++i)
    r[i] = (*this)(g.x(i));
  return r;
}

std::string Potential::describe() const {
  std::ostringstream os;
  os << family_name(family_);
  if (parametric())
    os << '(' << param_ << ')';
  else
    os << "(limit " << limit_ << ')';
  return os.str();
}

} // namespace eternal
