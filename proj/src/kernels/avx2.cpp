// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 -mfma; only reached after a runtime cpu check.
#include "eternal/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace eternal::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  alignas(32) double t[4];
  _mm256_store_pd(t, v);
  double m = t[0];
  for (int k = 1; k < 4; ++k)
    if (!(t[k] <= m))
      m = t[k];
  return m;
}

const __m256d kAbsMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));

double sum_abs(const double *a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_loadu_pd(a + i), kAbsMask));
  double s = hsum(acc);
  for (; i < n; ++i)
    s += std::fabs(a[i]);
  return s;
}

double sum_sq(const double *a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i)
    s += a[i] * a[i];
  return s;
}

double dot(const double *a, const double *b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

// NaN handling: _mm256_max_pd returns the second operand when either is NaN,
// so the running max is passed second and a NaN lane is tracked separately.
double max_abs(const double *a, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  __m256d bad = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_and_pd(_mm256_loadu_pd(a + i), kAbsMask);
    bad = _mm256_or_pd(bad, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
    m = _mm256_max_pd(v, m);
  }
  if (_mm256_movemask_pd(bad))
    return std::nan("");
  double r = hmax(m);
  for (; i < n; ++i) {
    double v = std::fabs(a[i]);
    if (!(v <= r))
      r = v;
  }
  return r;
}

double max_abs_diff(const double *a, const double *b, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  __m256d bad = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_and_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)), kAbsMask);
    bad = _mm256_or_pd(bad, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
    m = _mm256_max_pd(v, m);
  }
  if (_mm256_movemask_pd(bad))
    return std::nan("");
  double r = hmax(m);
  for (; i < n; ++i) {
    double v = std::fabs(a[i] - b[i]);
    if (!(v <= r))
      r = v;
  }
  return r;
}

void reaction_step(const double *u, const double *coef, std::size_t degree, std::size_t n, double h,
                   double *out) {
  const __m256d hv = _mm256_set1_pd(h);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(u + i);
    __m256d acc = _mm256_loadu_pd(coef + degree * n + i);
    for (std::size_t k = degree; k-- > 0;)
      acc = _mm256_fmadd_pd(acc, x, _mm256_loadu_pd(coef + k * n + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(hv, acc, x));
  }
  for (; i < n; ++i) {
    double acc = coef[degree * n + i];
    for (std::size_t k = degree; k-- > 0;)
      acc = std::fma(acc, u[i], coef[k * n + i]);
    out[i] = std::fma(h, acc, u[i]);
  }
}

void central_diff2(const double *a, std::size_t n, double inv_dx2, double *out) {
  if (n < 3)
    return;
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d s = _mm256_set1_pd(inv_dx2);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    __m256d l = _mm256_loadu_pd(a + i - 1);
    __m256d c = _mm256_loadu_pd(a + i);
    __m256d r = _mm256_loadu_pd(a + i + 1);
    __m256d v = _mm256_sub_pd(_mm256_add_pd(l, r), _mm256_mul_pd(two, c));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(v, s));
  }
  for (; i + 1 < n; ++i)
    out[i] = (a[i - 1] - 2.0 * a[i] + a[i + 1]) * inv_dx2;
}

} // namespace

const Table *avx2() {
  static const Table t{sum_abs, sum_sq, dot, max_abs, max_abs_diff, reaction_step, central_diff2,
                       "avx2"};
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma"))
    return nullptr;
  return &t;
}

} // namespace eternal::kernels
