// SPDX-License-Identifier: Apache-2.0
#include "eternal/spectrum.hpp"

#include "eternal/kernels.hpp"
#include "eternal/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace eternal {

SchrodingerOp::SchrodingerOp(GridFunction w, double limit, double tol)
    : grid(w.grid()), W(std::move(w)), essential_edge(-limit), W_limit(limit) {
  if (!W.all_finite())
    throw std::invalid_argument("schrodinger: W must be finite");
  if (std::fabs(W.values().front() - limit) > tol || std::fabs(W.values().back() - limit) > tol)
    throw std::invalid_argument("schrodinger: W does not approach its declared limit at the ends");
}

SchrodingerOp SchrodingerOp::linearization(const GridFunction &f, double f_limit) {
  return SchrodingerOp(2.0 * f, 2.0 * f_limit);
}

std::size_t SchrodingerOp::count_above(double lambda) const {
  const std::size_t n = grid.n;
  const double inv = 1.0 / (grid.dx() * grid.dx());
  const double e2 = inv * inv;
  std::size_t below = 0;
  double q = 1.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double d = -2.0 * inv - W[i] - lambda;
    q = (i == 1) ? d : d - e2 / q;
    if (q == 0.0)
      q = -std::numeric_limits<double>::min();
    if (q < 0.0)
      ++below;
  }
  return dim() - below;
}

double SchrodingerOp::gershgorin_upper() const {
  const double inv = 1.0 / (grid.dx() * grid.dx());
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < grid.n; ++i)
    m = std::max(m, -2.0 * inv - W[i] + 2.0 * inv);
  return m;
}

double SchrodingerOp::gershgorin_lower() const {
  const double inv = 1.0 / (grid.dx() * grid.dx());
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < grid.n; ++i)
    m = std::min(m, -2.0 * inv - W[i] - 2.0 * inv);
  return m;
}

double SchrodingerOp::eigenvalue_from_top(std::size_t k, double rel_tol) const {
  if (k >= dim())
    throw std::out_of_range("eigenvalue index beyond operator dimension");
  double lo = gershgorin_lower() - 1.0, hi = gershgorin_upper() + 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (count_above(mid) >= k + 1)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= rel_tol * std::max(std::fabs(lo), std::fabs(hi)))
      break;
  }
  return 0.5 * (lo + hi);
}

namespace {

double l2_interior(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v)
    s += x * x;
  return std::sqrt(s);
}

} // namespace

GridFunction SchrodingerOp::eigenvector(double lambda) const {
  const std::size_t m = dim();
  const double inv = 1.0 / (grid.dx() * grid.dx());
  // tiny shift keeps the factorization away from an exact zero pivot
  const double sigma = lambda + 1e-13 * std::max(1.0, std::fabs(lambda));
  std::vector<double> diag(m), c(m), x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    diag[i] = -2.0 * inv - W[i + 1] - sigma;
    x[i] = 1.0 + 0.25 * std::sin(0.37 * static_cast<double>(i));
  }
  // LU of the shifted tridiagonal matrix
  std::vector<double> piv(m);
  piv[0] = diag[0];
  for (std::size_t i = 1; i < m; ++i) {
    double p = piv[i - 1];
    if (std::fabs(p) < 1e-300)
      p = 1e-300;
    c[i] = inv / p;
    piv[i] = diag[i] - c[i] * inv;
  }
  for (int it = 0; it < 4; ++it) {
    y[0] = x[0];
    for (std::size_t i = 1; i < m; ++i)
      y[i] = x[i] - c[i] * y[i - 1];
    auto safe = [](double p) { return std::fabs(p) < 1e-300 ? 1e-300 : p; };
    x[m - 1] = y[m - 1] / safe(piv[m - 1]);
    for (std::size_t i = m - 1; i-- > 0;)
      x[i] = (y[i] - inv * x[i + 1]) / safe(piv[i]);
    double nr = l2_interior(x);
    for (double &v : x)
      v /= nr;
  }
  // sign: first significant entry from the left is positive
  double mx = 0.0;
  for (double v : x)
    mx = std::max(mx, std::fabs(v));
  double sgn = 1.0;
  for (double v : x)
    if (std::fabs(v) > 1e-3 * mx) {
      sgn = v > 0 ? 1.0 : -1.0;
      break;
    }
  GridFunction out(grid, 0.0);
  double s = 1.0 / std::sqrt(grid.dx());
  for (std::size_t i = 0; i < m; ++i)
    out[i + 1] = sgn * s * x[i];
  return out;
}

double SchrodingerOp::residual(double lambda, const GridFunction &v) const {
  const double inv = 1.0 / (grid.dx() * grid.dx());
  double r2 = 0.0, v2 = 0.0;
  for (std::size_t i = 1; i + 1 < grid.n; ++i) {
    double hv = (v[i - 1] - 2.0 * v[i] + v[i + 1]) * inv - W[i] * v[i];
    double d = hv - lambda * v[i];
    r2 += d * d;
    v2 += v[i] * v[i];
  }
  return std::sqrt(r2 / v2);
}

SchrodingerOp SchrodingerOp::enlarged(double factor) const {
  Grid g = grid.enlarged(factor);
  GridFunction w(g, W_limit);
  for (std::size_t i = 0; i < g.n; ++i) {
    double x = g.x(i);
    if (x >= grid.x_min && x <= grid.x_max)
      w[i] = W.at(x);
  }
  SchrodingerOp op;
  op.grid = g;
  op.W = std::move(w);
  op.W_limit = W_limit;
  op.essential_edge = essential_edge;
  return op;
}

int count_sign_changes(const GridFunction &v, double rel) {
  double mx = kernels::active().max_abs(v.data(), v.size());
  int changes = 0;
  int last = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::fabs(v[i]) <= rel * mx)
      continue;
    int s = v[i] > 0 ? 1 : -1;
    if (last != 0 && s != last)
      ++changes;
    last = s;
  }
  return changes;
}

namespace {

double default_margin(const SchrodingerOp &op) {
  double mw = kernels::active().max_abs(op.W.data(), op.W.size());
  return std::max(1e-6, 1e-3 * mw);
}

std::vector<double> eigenvalues_above(const SchrodingerOp &op, double level) {
  std::size_t K = op.count_above(level);
  std::vector<double> ev(K);
  for (std::size_t k = 0; k < K; ++k)
    ev[k] = op.eigenvalue_from_top(k);
  return ev;
}

} // namespace

SpectrumReport eigs_above_edge(const SchrodingerOp &op, const EigOptions &opt) {
  SpectrumReport r;
  r.margin = opt.margin > 0.0 ? opt.margin : default_margin(op);
  const double edge = op.essential_edge;
  r.eigenvalues = eigenvalues_above(op, edge - r.margin);
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
    double lam = r.eigenvalues[k];
    bool amb = lam <= edge + r.margin;
    r.edge_ambiguous.push_back(amb ? 1 : 0);
    if (std::fabs(lam) <= r.margin)
      r.ambiguous = true;
    if (!amb && lam > r.margin)
      ++r.n_positive;
    if (amb && edge >= -r.margin)
      r.ambiguous = true;
  }
  if (opt.eigenvectors) {
    r.eigenfunctions.resize(r.eigenvalues.size());
    r.residuals.resize(r.eigenvalues.size());
    r.sign_changes.resize(r.eigenvalues.size());
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) {
      r.eigenfunctions[k] = op.eigenvector(r.eigenvalues[k]);
      r.residuals[k] = op.residual(r.eigenvalues[k], r.eigenfunctions[k]);
      r.sign_changes[k] = count_sign_changes(r.eigenfunctions[k]);
      if (r.sign_changes[k] != static_cast<int>(k))
        r.oscillation_ok = false;
    }
  }
  if (opt.check_truncation) {
    SchrodingerOp big = op.enlarged(1.5);
    double level = edge + r.margin;
    std::size_t a = op.count_above(level), b = big.count_above(level);
    r.truncation_stable = a == b;
    if (r.truncation_stable)
      for (std::size_t k = 0; k < a; ++k)
        if (big.eigenvalue_from_top(k) < r.eigenvalues[k] - 1e-6)
          r.truncation_stable = false;
  }
  return r;
}

SpectrumReport unstable_spectrum(const GridFunction &f, bool eigenvectors) {
  EigOptions opt;
  opt.eigenvectors = eigenvectors;
  return eigs_above_edge(SchrodingerOp::linearization(f), opt);
}

PositiveCount count_positive(const GridFunction &f) {
  EigOptions opt;
  opt.eigenvectors = false;
  opt.check_truncation = false;
  SpectrumReport r = eigs_above_edge(SchrodingerOp::linearization(f), opt);
  return {r.n_positive, r.ambiguous};
}

double smallest_abs_eigenvalue(const SchrodingerOp &op) {
  std::size_t K = op.count_above(0.0);
  double best = std::numeric_limits<double>::infinity();
  if (K > 0)
    best = std::fabs(op.eigenvalue_from_top(K - 1));
  if (K < op.dim())
    best = std::min(best, std::fabs(op.eigenvalue_from_top(K)));
  return best;
}

ConnectingDimension connecting_dimension(const GridFunction &f_minus, const GridFunction &f_plus) {
  PositiveCount a = count_positive(f_minus);
  PositiveCount b = count_positive(f_plus);
  return {a.count - b.count, a.ambiguous || b.ambiguous};
}

OrbitSpectrum spectrum_along_orbit(const Trajectory &traj, std::size_t k, std::size_t stride) {
  if (traj.blowup)
    throw std::invalid_argument("spectrum_along_orbit: trajectory blew up");
  if (stride == 0)
    stride = 1;
  OrbitSpectrum s;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.size(); i += stride)
    idx.push_back(i);
  s.times.resize(idx.size());
  s.lambdas.resize(idx.size());
  s.n_positive.resize(idx.size());
  s.gaps.resize(idx.size());
  parallel_for(idx.size(), [&](std::size_t j) {
    const GridFunction &u = traj.snapshots[idx[j]];
    SchrodingerOp op(2.0 * u, 0.0, std::numeric_limits<double>::infinity());
    s.times[j] = traj.times[idx[j]];
    std::vector<double> lam(k);
    for (std::size_t q = 0; q < k; ++q)
      lam[q] = op.eigenvalue_from_top(q);
    const double margin = default_margin(op);
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q + 1 < k && lam[q + 1] > margin; ++q)
      gap = std::min(gap, lam[q] - lam[q + 1]);
    s.lambdas[j] = lam;
    s.gaps[j] = gap;
    s.n_positive[j] = static_cast<int>(op.count_above(margin));
  });
  s.min_gap = std::numeric_limits<double>::infinity();
  s.min_gap_all = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.lambdas.size(); ++j) {
    s.min_gap = std::min(s.min_gap, s.gaps[j]);
    for (std::size_t q = 0; q + 1 < s.lambdas[j].size(); ++q)
      s.min_gap_all = std::min(s.min_gap_all, s.lambdas[j][q] - s.lambdas[j][q + 1]);
  }
  return s;
}

void write_spectrum_csv(const std::string &path, const SpectrumReport &r) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  os << "index,eigenvalue\n" << std::setprecision(17);
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k)
    os << k << ',' << r.eigenvalues[k] << '\n';
}

void write_orbit_spectrum_csv(const std::string &path, const OrbitSpectrum &s) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  std::size_t k = s.lambdas.empty() ? 0 : s.lambdas.front().size();
  os << 't';
  for (std::size_t q = 0; q < k; ++q)
    os << ",lambda_" << q + 1;
  os << ",min_gap\n" << std::setprecision(17);
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    os << s.times[j];
    for (double v : s.lambdas[j])
      os << ',' << v;
    os << ',' << s.gaps[j] << '\n';
  }
}

} // namespace eternal
