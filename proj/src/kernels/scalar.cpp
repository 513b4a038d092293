// SPDX-License-Identifier: Apache-2.0
#include "eternal/kernels.hpp"

#include <cmath>

namespace eternal::kernels {
namespace {

double sum_abs(const double *a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += std::fabs(a[i]);
  return s;
}

double sum_sq(const double *a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i] * a[i];
  return s;
}

double dot(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

double max_abs(const double *a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::fabs(a[i]);
    if (!(v <= m))
      m = v; // propagates NaN
  }
  return m;
}

double max_abs_diff(const double *a, const double *b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::fabs(a[i] - b[i]);
    if (!(v <= m))
      m = v;
  }
  return m;
}

void reaction_step(const double *u, const double *coef, std::size_t degree, std::size_t n, double h,
                   double *out) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = coef[degree * n + i];
    for (std::size_t k = degree; k-- > 0;)
      acc = acc * u[i] + coef[k * n + i];
    out[i] = u[i] + h * acc;
  }
}

void central_diff2(const double *a, std::size_t n, double inv_dx2, double *out) {
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = (a[i - 1] - 2.0 * a[i] + a[i + 1]) * inv_dx2;
}

} // namespace

const Table &scalar() {
  static const Table t{sum_abs, sum_sq, dot, max_abs, max_abs_diff, reaction_step, central_diff2,
                       "scalar"};
  return t;
}

} // namespace eternal::kernels
