// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>

namespace eternal::kernels {

// Per-node polynomial coefficients are stored row-major: coef[k * n + i] is a_k(x_i).
struct Table {
  double (*sum_abs)(const double *a, std::size_t n);
  double (*sum_sq)(const double *a, std::size_t n);
  double (*dot)(const double *a, const double *b, std::size_t n);
  double (*max_abs)(const double *a, std::size_t n);
  double (*max_abs_diff)(const double *a, const double *b, std::size_t n);
  // out_i = u_i + h * sum_k coef[k*n+i] * u_i^k
  void (*reaction_step)(const double *u, const double *coef, std::size_t degree, std::size_t n,
                        double h, double *out);
  // out_i = (a_{i-1} - 2 a_i + a_{i+1}) * inv_dx2 for 1 <= i < n-1; ends untouched
  void (*central_diff2)(const double *a, std::size_t n, double inv_dx2, double *out);
  const char *name;
};

const Table &scalar();
const Table *avx2(); // nullptr when not compiled in or unsupported by the cpu

// Selected once; ETERNAL_ISA=scalar forces the reference kernels.
const Table &active();
std::string active_name();

} // namespace eternal::kernels
