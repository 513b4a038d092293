// SPDX-License-Identifier: Apache-2.0
#include "eternal/equilibrium.hpp"

#include "eternal/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace eternal {

namespace {

const double kSqrt23 = std::sqrt(2.0 / 3.0);

template <class Phi> inline void rk4(double &f, double &fp, double x, double h, const Phi &phi) {
  double p0 = phi(x), p1 = phi(x + 0.5 * h), p2 = phi(x + h);
  double k1f = fp, k1p = f * f - p0;
  double f2 = f + 0.5 * h * k1f, q2 = fp + 0.5 * h * k1p;
  double k2f = q2, k2p = f2 * f2 - p1;
  double f3 = f + 0.5 * h * k2f, q3 = fp + 0.5 * h * k2p;
  double k3f = q3, k3p = f3 * f3 - p1;
  double f4 = f + h * k3f, q4 = fp + h * k3p;
  double k4f = q4, k4p = f4 * f4 - p2;
  f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
  fp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
}

double adaptive_step(double step, double f) {
  double a = std::fabs(f);
  if (a <= 10.0)
    return step;
  return std::min(0.5 * step, 0.05 * std::sqrt(6.0 / a));
}

} // namespace

PhaseOutcome integrate_phase(PhaseState s, double x_target, double step, const Potential &phi,
                             double guard) {
  if (!(step > 0.0))
    throw std::invalid_argument("integrate_phase: step must be positive");
  const double dir = x_target >= s.x ? 1.0 : -1.0;
  auto ph = [&](double x) { return phi(x); };
  PhaseOutcome out;
  while (dir * (x_target - s.x) > 0.0) {
    double h = adaptive_step(step, s.f);
    double remaining = std::fabs(x_target - s.x);
    bool last = h >= remaining * (1.0 - 1e-12);
    if (last)
      h = remaining;
    double f = s.f, fp = s.fp;
    rk4(f, fp, s.x, dir * h, ph);
    if (!std::isfinite(f) || !std::isfinite(fp) || std::fabs(f) > guard) {
      out.global = false;
      out.state = s;
      out.x_blow = s.x + dir * h;
      return out;
    }
    s.f = f;
    s.fp = fp;
    s.x = last ? x_target : s.x + dir * h;
  }
  out.state = s;
  out.x_blow = std::numeric_limits<double>::quiet_NaN();
  return out;
}

double hamiltonian(const PhaseState &s, const Potential &phi, NegativeForcing neg) {
  double p = phi(s.x);
  double last = 0.0;
  if (p >= 0.0) {
    last = 2.0 / 3.0 * std::pow(p, 1.5);
  } else {
    switch (neg) {
    case NegativeForcing::reject:
      throw std::invalid_argument("hamiltonian: negative forcing");
    case NegativeForcing::drop:
      last = 0.0;
      break;
    case NegativeForcing::signed_power:
      last = -2.0 / 3.0 * std::pow(-p, 1.5);
      break;
    }
  }
  return s.f * s.f * s.f / 3.0 - 0.5 * s.fp * s.fp - s.f * p + last;
}

namespace {

// right-tail slope for forcing psi at y0 > 0
template <class Psi>
double right_tail_slope(double f, double y0, const Psi &psi, double psi_limit, TailOrder order) {
  double lead = -kSqrt23 * std::pow(f, 1.5);
  if (order == TailOrder::leading)
    return lead;
  const double L = std::sqrt(6.0 / f); // y0 − d
  const double d = y0 - L;
  auto integrand = [&](double s) {
    double r = s - d;
    return psi(s) / (r * r * r);
  };
  using boost::math::quadrature::gauss_kronrod;
  double I = 0.0;
  if (psi_limit != 0.0) {
    I = gauss_kronrod<double, 61>::integrate(integrand, y0, std::numeric_limits<double>::infinity(), 15,
                                             1e-13);
  } else {
    double cut = y0;
    while (cut < y0 + 1e3 && std::fabs(psi(cut)) >= 1e-14)
      cut += 0.5;
    if (cut > y0)
      I = gauss_kronrod<double, 61>::integrate(integrand, y0, cut, 15, 1e-13);
  }
  return lead + L * L * L * I;
}

} // namespace

double asymptotic_bc(double f, double x0, const Potential &phi, TailOrder order) {
  if (!(f > 0.0))
    throw std::invalid_argument("asymptotic_bc: f must be positive (tail ansatz invalid)");
  if (x0 >= 0.0)
    return right_tail_slope(f, x0, [&](double s) { return phi(s); }, phi.limit(), order);
  return -right_tail_slope(f, -x0, [&](double s) { return phi(-s); }, phi.limit(), order);
}

SeriesTail series_tail(double d, double K, const Potential &phi, int order, double x_tail,
                       double span) {
  if (order < 1)
    throw std::invalid_argument("series_tail: order >= 1 required");
  SeriesTail st;
  st.d = d;
  st.K = K;
  st.R = x_tail - d;
  if (!(st.R > 0.0))
    throw std::invalid_argument("series_tail: tail start must lie right of the pole");
  const int m = 200;
  std::vector<double> lx, ly;
  for (int j = 0; j < m; ++j) {
    double x = x_tail + span * j / (m - 1);
    double v = std::fabs(phi(x));
    if (v > 0.0 && std::isfinite(v)) {
      lx.push_back(std::log(x - d));
      ly.push_back(std::log(v));
    }
  }
  if (lx.empty()) {
    st.alpha = std::numeric_limits<double>::infinity();
    st.M = 0.0;
    st.log_M = -std::numeric_limits<double>::infinity();
  } else {
    if (lx.size() < 2)
      throw SlowDecay();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    st.alpha = -sxy / sxx;
    if (!(st.alpha > 5.0))
      throw SlowDecay();
    st.log_M = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lx.size(); ++i)
      st.log_M = std::max(st.log_M, ly[i] + st.alpha * lx[i]);
    st.M = std::exp(st.log_M); // may overflow to inf; log_M is authoritative
  }
  const double logR = std::log(st.R);
  double A1 = std::fabs(K);
  if (std::isfinite(st.alpha) && std::isfinite(st.log_M)) {
    A1 += std::exp(st.log_M - std::log((2.0 + st.alpha) * (st.alpha - 5.0)) - (st.alpha - 5.0) * logR);
    st.valid = st.log_M < std::log(8.0 * (st.alpha + 2.0) * (st.alpha - 5.0)) + (st.alpha - 4.0) * logR;
  } else {
    st.valid = true;
  }
  st.A.assign(order, 0.0);
  st.A[0] = A1;
  for (int k = 2; k <= order; ++k) {
    double s = 0.0;
    for (int mm = 1; mm <= k - 1; ++mm)
      s += st.A[mm - 1] * st.A[k - mm - 1];
    st.A[k - 1] = s / ((k + 6.0) * (k - 1.0));
  }
  st.a1_bounded = A1 <= 8.0 * st.R;
  st.max_ratio = 0.0;
  for (int k = 2; k < order; ++k)
    if (st.A[k - 1] > 0.0)
      st.max_ratio = std::max(st.max_ratio, st.A[k] / st.A[k - 1]);
  return st;
}

std::vector<double> default_f_samples(std::size_t count, double lo, double hi) {
  std::vector<double> s(count);
  double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    s[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  return s;
}

// ---------------------------------------------------------------- Matcher

Matcher::Matcher(const Potential &phi, double x0, double step, double guard)
    : phi_(phi), x0_(x0), step_(step), guard_(guard) {
  if (!(x0 > 0.0) || !(step > 0.0))
    throw std::invalid_argument("matcher: x0 and step must be positive");
  steps_ = static_cast<std::size_t>(std::llround(x0 / step));
  step_ = x0 / static_cast<double>(steps_);
  const std::size_t m = 2 * steps_ + 1;
  base_plus_.resize(m);
  slope_plus_.resize(m);
  base_minus_.resize(m);
  slope_minus_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    double off = 0.5 * step_ * static_cast<double>(k);
    double xp = x0_ - off, xm = -x0_ + off;
    if (phi_.parametric()) {
      base_plus_[k] = phi_.base(xp);
      slope_plus_[k] = phi_.slope(xp);
      base_minus_[k] = phi_.base(xm);
      slope_minus_[k] = phi_.slope(xm);
    } else {
      base_plus_[k] = phi_(xp);
      base_minus_[k] = phi_(xm);
      slope_plus_[k] = slope_minus_[k] = 0.0;
    }
  }
}

std::optional<PhaseState> Matcher::run(Side side, double a, double p,
                                       std::vector<PhaseState> *out) const {
  if (!(a > 0.0))
    return std::nullopt;
  const bool plus = side == Side::plus;
  const double dir = plus ? -1.0 : 1.0;
  const double *B = plus ? base_plus_.data() : base_minus_.data();
  const double *S = plus ? slope_plus_.data() : slope_minus_.data();
  double f = a;
  double fp = plus ? -kSqrt23 * std::pow(a, 1.5) : kSqrt23 * std::pow(a, 1.5);
  double x = plus ? x0_ : -x0_;
  const double h = dir * step_;
  if (out) {
    out->clear();
    out->push_back({f, fp, x});
  }
  for (std::size_t j = 0; j < steps_; ++j) {
    if (std::fabs(f) > 10.0) {
      Potential q = phi_.parametric() ? phi_.with_param(p) : phi_;
      PhaseState s{f, fp, x};
      if (!out) {
        PhaseOutcome o = integrate_phase(s, 0.0, step_, q, guard_);
        if (!o.global)
          return std::nullopt;
        return o.state;
      }
      // fine steps with recording
      while (s.x * dir < 0.0) {
        double hh = std::min(adaptive_step(step_, s.f), std::fabs(s.x));
        PhaseOutcome o = integrate_phase(s, s.x + dir * hh, hh, q, guard_);
        if (!o.global)
          return std::nullopt;
        s = o.state;
        out->push_back(s);
      }
      return s;
    }
    const std::size_t k = 2 * j;
    const double p0 = B[k] + p * S[k], p1 = B[k + 1] + p * S[k + 1], p2 = B[k + 2] + p * S[k + 2];
    double k1f = fp, k1p = f * f - p0;
    double f2 = f + 0.5 * h * k1f, q2 = fp + 0.5 * h * k1p;
    double k2f = q2, k2p = f2 * f2 - p1;
    double f3 = f + 0.5 * h * k2f, q3 = fp + 0.5 * h * k2p;
    double k3f = q3, k3p = f3 * f3 - p1;
    double f4 = f + h * k3f, q4 = fp + h * k3p;
    double k4f = q4, k4p = f4 * f4 - p2;
    f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    fp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    x = (j + 1 == steps_) ? 0.0 : x + h;
    if (!std::isfinite(f) || !std::isfinite(fp) || std::fabs(f) > guard_)
      return std::nullopt;
    if (out)
      out->push_back({f, fp, x});
  }
  return PhaseState{f, fp, 0.0};
}

std::optional<PhaseState> Matcher::shoot(Side side, double a, double p) const {
  return run(side, a, p, nullptr);
}

std::vector<PhaseState> Matcher::record(Side side, double a, double p) const {
  std::vector<PhaseState> v;
  if (!run(side, a, p, &v))
    throw std::runtime_error("matcher: shot is not global");
  if (side == Side::plus)
    std::reverse(v.begin(), v.end());
  return v;
}

std::optional<std::array<double, 2>> Matcher::mismatch(double p, double aL, double aR) const {
  auto L = shoot(Side::minus, aL, p);
  if (!L)
    return std::nullopt;
  auto R = shoot(Side::plus, aR, p);
  if (!R)
    return std::nullopt;
  return std::array<double, 2>{L->f - R->f, L->fp - R->fp};
}

Matcher::Refined Matcher::refine(double p, double aL, double aR, int max_iter, double tol) const {
  Refined r;
  r.aL = aL;
  r.aR = aR;
  auto F = mismatch(p, aL, aR);
  if (!F) {
    r.mismatch = std::numeric_limits<double>::infinity();
    return r;
  }
  auto nrm = [](const std::array<double, 2> &v) { return std::max(std::fabs(v[0]), std::fabs(v[1])); };
  double fn = nrm(*F);
  for (int it = 0; it < max_iter; ++it) {
    r.iterations = it;
    if (fn < tol) {
      r.converged = true;
      break;
    }
    double dL = 1e-7 * aL, dR = 1e-7 * aR;
    auto FL = mismatch(p, aL + dL, aR);
    auto FR = mismatch(p, aL, aR + dR);
    if (!FL || !FR) {
      FL = mismatch(p, aL - dL, aR);
      FR = mismatch(p, aL, aR - dR);
      if (!FL || !FR)
        break;
      dL = -dL;
      dR = -dR;
    }
    double j00 = ((*FL)[0] - (*F)[0]) / dL, j10 = ((*FL)[1] - (*F)[1]) / dL;
    double j01 = ((*FR)[0] - (*F)[0]) / dR, j11 = ((*FR)[1] - (*F)[1]) / dR;
    double det = j00 * j11 - j01 * j10;
    if (det == 0.0 || !std::isfinite(det))
      break;
    double sL = -(j11 * (*F)[0] - j01 * (*F)[1]) / det;
    double sR = -(-j10 * (*F)[0] + j00 * (*F)[1]) / det;
    double lam = 1.0;
    bool moved = false;
    for (int h = 0; h < 30; ++h, lam *= 0.5) {
      double nL = aL + lam * sL, nR = aR + lam * sR;
      if (!(nL > 0.0) || !(nR > 0.0))
        continue;
      auto Fn = mismatch(p, nL, nR);
      if (!Fn)
        continue;
      double nn = nrm(*Fn);
      if (nn < fn || nn < tol) {
        aL = nL;
        aR = nR;
        F = Fn;
        fn = nn;
        moved = true;
        break;
      }
    }
    if (!moved)
      break;
  }
  r.aL = aL;
  r.aR = aR;
  r.mismatch = fn;
  r.converged = fn < tol;
  // stagnation at roundoff level is accepted
  if (!r.converged && fn < 1e-8)
    r.converged = true;
  return r;
}

namespace {

double hermite(const PhaseState &a, const PhaseState &b, double x) {
  double h = b.x - a.x;
  double t = (x - a.x) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * a.f + (t3 - 2 * t2 + t) * h * a.fp + (-2 * t3 + 3 * t2) * b.f +
         (t3 - t2) * h * b.fp;
}

double interp_path(const std::vector<PhaseState> &path, double x) {
  auto it = std::lower_bound(path.begin(), path.end(), x,
                             [](const PhaseState &s, double v) { return s.x < v; });
  if (it == path.begin())
    return path.front().f;
  if (it == path.end())
    return path.back().f;
  return hermite(*(it - 1), *it, x);
}

} // namespace

EquilibriumSolution Matcher::assemble(double p, double aL, double aR, const Grid &g) const {
  Potential q = phi_.parametric() ? phi_.with_param(p) : phi_;
  auto left = record(Side::minus, aL, p);
  auto right = record(Side::plus, aR, p);
  const double dL = x0_ - std::sqrt(6.0 / aL);
  const double dR = x0_ - std::sqrt(6.0 / aR);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    double x = g.x(i);
    if (x > x0_) {
      f[i] = 6.0 / ((x - dR) * (x - dR));
    } else if (x < -x0_) {
      f[i] = 6.0 / ((-x - dL) * (-x - dL));
    } else if (x < 0.0) {
      f[i] = interp_path(left, x);
    } else if (x > 0.0) {
      f[i] = interp_path(right, x);
    } else {
      f[i] = 0.5 * (left.back().f + right.front().f);
    }
  }
  EquilibriumSolution s;
  polish_equilibrium(f, q);
  s.profile = std::move(f);
  s.f0 = 0.5 * (left.back().f + right.front().f);
  s.fp0 = 0.5 * (left.back().fp + right.front().fp);
  s.residual = equilibrium_residual(s.profile, q);
  s.seed_left = aL;
  s.seed_right = aR;
  s.param = p;
  s.mismatch = std::max(std::fabs(left.back().f - right.front().f),
                        std::fabs(left.back().fp - right.front().fp));
  return s;
}

double equilibrium_residual(const GridFunction &f, const Potential &phi) {
  GridFunction r = diff2(f);
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    m = std::max(m, std::fabs(r[i] - f[i] * f[i] + phi(f.grid().x(i))));
  return m;
}

double polish_equilibrium(GridFunction &f, const Potential &phi, int max_iter, double tol) {
  const std::size_t n = f.size();
  const double dx = f.grid().dx();
  const double inv = 1.0 / (dx * dx);
  GridFunction ph = phi.sample(f.grid());
  std::vector<double> F(n), diag(n), cp(n), dp(n);
  double res = 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    res = 0.0;
    double scale = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      F[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) * inv - f[i] * f[i] + ph[i];
      res = std::max(res, std::fabs(F[i]));
      scale = std::max(scale, std::fabs(f[i]));
    }
    if (res < tol * (1.0 + scale) || it == max_iter)
      break;
    // tridiagonal solve J δ = −F on interior nodes, δ = 0 at the ends
    for (std::size_t i = 1; i + 1 < n; ++i)
      diag[i] = -2.0 * inv - 2.0 * f[i];
    cp[1] = inv / diag[1];
    dp[1] = -F[1] / diag[1];
    for (std::size_t i = 2; i + 1 < n; ++i) {
      double m = diag[i] - inv * cp[i - 1];
      cp[i] = inv / m;
      dp[i] = (-F[i] - inv * dp[i - 1]) / m;
    }
    std::vector<double> delta(n, 0.0);
    delta[n - 2] = dp[n - 2];
    for (std::size_t i = n - 2; i-- > 1;)
      delta[i] = dp[i] - cp[i] * delta[i + 1];
    // backtracking: near a fold the Jacobian is almost singular and a full step can land
    // on a different branch
    GridFunction trial = f;
    bool accepted = false;
    for (double lam = 1.0; lam > 1e-3; lam *= 0.5) {
      double r = 0.0;
      for (std::size_t i = 1; i + 1 < n; ++i)
        trial[i] = f[i] + lam * delta[i];
      for (std::size_t i = 1; i + 1 < n; ++i)
        r = std::max(r, std::fabs((trial[i - 1] - 2.0 * trial[i] + trial[i + 1]) * inv - trial[i] * trial[i] + ph[i]));
      if (r < res) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
    f = std::move(trial);
  }
  return res;
}

// ---------------------------------------------------------------- Z curves

ZCurve trace_Z(double x0, const Potential &phi, const std::vector<double> &f_samples, Side side,
               double step, double guard, double resolution_target) {
  if (!(x0 > 0.0))
    throw std::invalid_argument("trace_Z: x0 must be positive");
  Matcher m(phi, x0, step, guard);
  std::vector<double> a = f_samples;
  std::vector<std::optional<PhaseState>> ends(a.size());
  parallel_for(a.size(), [&](std::size_t i) { ends[i] = m.shoot(side, a[i]); });

  auto gap = [](const PhaseState &p, const PhaseState &q) { return std::hypot(p.f - q.f, p.fp - q.fp); };
  // refinement only where equilibria can live; far out the curve runs off to the blow-up edge
  auto in_box = [](const PhaseState &p) { return std::fabs(p.f) <= 10.0 && std::fabs(p.fp) <= 10.0; };
  // Refinement rounds: split survivor intervals wider than the target, and bisect toward the
  // edge of the survivor set.
  const std::size_t cap = 20 * std::max<std::size_t>(f_samples.size(), 50);
  for (int round = 0; round < 14 && resolution_target > 0.0; ++round) {
    std::vector<double> extra;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
      bool s0 = ends[i].has_value(), s1 = ends[i + 1].has_value();
      if (s0 && s1 && gap(*ends[i], *ends[i + 1]) > resolution_target && in_box(*ends[i]) &&
          in_box(*ends[i + 1]))
        extra.push_back(std::sqrt(a[i] * a[i + 1]));
      else if (s0 != s1 && a[i + 1] - a[i] > 1e-9 * a[i])
        extra.push_back(std::sqrt(a[i] * a[i + 1]));
    }
    if (extra.empty() || a.size() + extra.size() > cap)
      break;
    std::vector<std::optional<PhaseState>> more(extra.size());
    parallel_for(extra.size(), [&](std::size_t i) { more[i] = m.shoot(side, extra[i]); });
    std::vector<double> na;
    std::vector<std::optional<PhaseState>> ne;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      na.push_back(a[i]);
      ne.push_back(ends[i]);
      while (j < extra.size() && i + 1 < a.size() && extra[j] > a[i] && extra[j] < a[i + 1]) {
        na.push_back(extra[j]);
        ne.push_back(more[j]);
        ++j;
      }
    }
    a.swap(na);
    ends.swap(ne);
  }

  ZCurve z;
  z.x0 = x0;
  z.side = side;
  bool prev = false;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (!ends[i]) {
      prev = false;
      continue;
    }
    if (!prev)
      z.breaks.push_back(z.points.size());
    else {
      auto &q = z.points.back();
      z.resolution = std::max(z.resolution, std::hypot(ends[i]->f - q[0], ends[i]->fp - q[1]));
    }
    z.points.push_back({ends[i]->f, ends[i]->fp});
    z.seeds.push_back(a[i]);
    prev = true;
  }
  if (z.points.empty())
    throw NoGlobalSeeds();
  return z;
}

NecessaryCondition necessary_condition(const Potential &phi, const Grid &g) {
  NecessaryCondition nc;
  GridFunction v = phi.sample(g);
  nc.integral = trapezoid(v);
  double absint = 0.0;
  for (std::size_t i = 0; i < g.n; ++i)
    absint += std::fabs(v[i]);
  absint *= g.dx();
  nc.passes = nc.integral > 1e-9 * absint;

  // windowed test on a coarsened lattice
  const std::size_t stride = std::max<std::size_t>(1, g.n / 600);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.n; i += stride)
    idx.push_back(i);
  if (idx.back() != g.n - 1)
    idx.push_back(g.n - 1);
  const std::size_t m = idx.size();
  std::vector<double> cum(g.n, 0.0);
  for (std::size_t i = 1; i < g.n; ++i)
    cum[i] = cum[i - 1] + 0.5 * g.dx() * (v[i - 1] + v[i]);
  std::vector<double> supL(g.n), supR(g.n);
  double lim = std::fabs(phi.limit());
  double run = lim;
  for (std::size_t i = 0; i < g.n; ++i)
    supL[i] = run = std::max(run, std::fabs(v[i]));
  run = lim;
  for (std::size_t i = g.n; i-- > 0;)
    supR[i] = run = std::max(run, std::fabs(v[i]));
  const double k = std::sqrt(8.0 / 3.0);
  nc.worst_window_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      std::size_t A = idx[a], B = idx[b];
      double lhs = -(cum[B] - cum[A]);
      double rhs = k * (std::pow(supL[A], 0.75) + std::pow(supR[B], 0.75));
      nc.worst_window_margin = std::max(nc.worst_window_margin, lhs - rhs);
    }
  nc.window_test = !(nc.worst_window_margin > 0.0);
  return nc;
}

namespace {

struct Hit {
  double aL, aR;
  bool tangential;
};

double angle_between(double ux, double uy, double vx, double vy) {
  double c = std::fabs(ux * vy - uy * vx) / (std::hypot(ux, uy) * std::hypot(vx, vy));
  return std::asin(std::min(1.0, c));
}

std::vector<std::pair<std::size_t, std::size_t>> pieces(const ZCurve &z) {
  std::vector<std::pair<std::size_t, std::size_t>> r;
  for (std::size_t k = 0; k < z.breaks.size(); ++k) {
    std::size_t lo = z.breaks[k];
    std::size_t hi = k + 1 < z.breaks.size() ? z.breaks[k + 1] : z.points.size();
    r.emplace_back(lo, hi);
  }
  return r;
}

double seg_point_dist(const std::array<double, 2> &p, const std::array<double, 2> &a,
                      const std::array<double, 2> &b) {
  double vx = b[0] - a[0], vy = b[1] - a[1];
  double L2 = vx * vx + vy * vy;
  double t = L2 > 0 ? std::clamp(((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / L2, 0.0, 1.0) : 0.0;
  return std::hypot(p[0] - a[0] - t * vx, p[1] - a[1] - t * vy);
}

} // namespace

EquilibriumSearch find_equilibria(const Potential &phi, const MatchOptions &opt) {
  EquilibriumSearch out;
  if (phi.limit() != 0.0) {
    if (phi.family() != Family::Constant)
      throw std::invalid_argument("find_equilibria: tail ansatz requires decaying forcing");
    // autonomous forcing: the spatially constant equilibria
    double P = phi.param();
    out.condition.integral = P * (opt.grid.x_max - opt.grid.x_min);
    out.condition.passes = P > 0.0;
    if (P <= 0.0) {
      out.reason = "necessary/matching conditions not met; 0 equilibria";
      return out;
    }
    for (double s : {-std::sqrt(P), std::sqrt(P)}) {
      EquilibriumSolution e;
      e.profile = GridFunction(opt.grid, s);
      e.f0 = s;
      e.fp0 = 0.0;
      e.residual = equilibrium_residual(e.profile, phi);
      e.param = P;
      out.solutions.push_back(std::move(e));
    }
    return out;
  }

  out.condition = necessary_condition(phi, opt.grid);
  if (!out.condition.passes || !out.condition.window_test) {
    out.reason = "necessary/matching conditions not met; 0 equilibria";
    return out;
  }
  try {
    out.z_plus = trace_Z(opt.x0, phi, opt.f_samples, Side::plus, opt.step, opt.guard, opt.resolution);
    out.z_minus = trace_Z(opt.x0, phi, opt.f_samples, Side::minus, opt.step, opt.guard, opt.resolution);
  } catch (const NoGlobalSeeds &) {
    out.reason = "necessary/matching conditions not met; 0 equilibria (no global seeds)";
    return out;
  }

  const ZCurve &zp = out.z_plus, &zm = out.z_minus;
  std::vector<Hit> hits;
  // Pairs of segments passing within the sampling resolution without crossing: near a fold
  // the two curves are almost tangent and a crossing can hide between samples.
  const double near_tol = opt.resolution;
  struct Near {
    double dist;
    std::size_t i, j;
  };
  std::vector<Near> near;
  std::vector<std::pair<std::size_t, std::size_t>> crossing_idx;
  for (auto [p0, p1] : pieces(zp))
    for (auto [m0, m1] : pieces(zm))
      for (std::size_t i = p0; i + 1 < p1; ++i)
        for (std::size_t j = m0; j + 1 < m1; ++j) {
          const auto &a = zp.points[i], &b = zp.points[i + 1];
          const auto &c = zm.points[j], &d = zm.points[j + 1];
          double rx = b[0] - a[0], ry = b[1] - a[1];
          double sx = d[0] - c[0], sy = d[1] - c[1];
          double den = rx * sy - ry * sx;
          bool crossed = false;
          if (den != 0.0) {
            double t = ((c[0] - a[0]) * sy - (c[1] - a[1]) * sx) / den;
            double u = ((c[0] - a[0]) * ry - (c[1] - a[1]) * rx) / den;
            if (t >= 0.0 && t < 1.0 && u >= 0.0 && u < 1.0) {
              crossed = true;
              double aR = zp.seeds[i] + t * (zp.seeds[i + 1] - zp.seeds[i]);
              double aL = zm.seeds[j] + u * (zm.seeds[j + 1] - zm.seeds[j]);
              hits.push_back({aL, aR, angle_between(rx, ry, sx, sy) <= opt.transversal_angle});
              crossing_idx.emplace_back(i, j);
            }
          }
          if (!crossed && std::fabs(a[0]) <= 10.0 && std::fabs(a[1]) <= 10.0) {
            double dmin = std::min({seg_point_dist(a, c, d), seg_point_dist(b, c, d),
                                    seg_point_dist(c, a, b), seg_point_dist(d, a, b)});
            if (dmin < near_tol)
              near.push_back({dmin, i, j});
          }
        }

  std::sort(near.begin(), near.end(), [](const Near &x, const Near &y) { return x.dist < y.dist; });
  std::size_t n_cross = hits.size();
  near.erase(std::remove_if(near.begin(), near.end(),
                            [&](const Near &q) {
                              for (auto [ci, cj] : crossing_idx)
                                if (q.i + 6 >= ci && q.i <= ci + 6 && q.j + 6 >= cj && q.j <= cj + 6)
                                  return true;
                              return false;
                            }),
             near.end());
  for (std::size_t k = 0; k < near.size() && k < 16; ++k) {
    out.possible_missed = true;
    hits.push_back({zm.seeds[near[k].j], zp.seeds[near[k].i], true});
  }

  Matcher m(phi, opt.x0, opt.step, opt.guard);
  std::vector<EquilibriumSolution> found(hits.size());
  std::vector<char> ok(hits.size(), 0);
  parallel_for(hits.size(), [&](std::size_t k) {
    auto r = m.refine(phi.param(), hits[k].aL, hits[k].aR, opt.newton_iterations, opt.newton_tol);
    if (r.converged) {
      found[k] = m.assemble(phi.param(), r.aL, r.aR, opt.grid);
      found[k].tangential = hits[k].tangential;
      ok[k] = 1;
    } else {
      EquilibriumSolution e;
      e.refined = false;
      e.seed_left = r.aL;
      e.seed_right = r.aR;
      e.mismatch = r.mismatch;
      e.tangential = hits[k].tangential;
      e.param = phi.param();
      found[k] = std::move(e);
    }
  });
  for (std::size_t k = 0; k < hits.size(); ++k) {
    if (!ok[k]) {
      if (k < n_cross)
        out.unrefined.push_back(std::move(found[k]));
      continue;
    }
    bool dup = false;
    for (auto &s : out.solutions)
      if (std::hypot(s.f0 - found[k].f0, s.fp0 - found[k].fp0) < opt.merge_distance) {
        dup = true;
        break;
      }
    if (!dup)
      out.solutions.push_back(std::move(found[k]));
  }
  std::sort(out.solutions.begin(), out.solutions.end(), [](const auto &a, const auto &b) {
    return a.f0 != b.f0 ? a.f0 < b.f0 : a.fp0 < b.fp0;
  });
  if (out.solutions.empty())
    out.reason = "necessary/matching conditions not met; 0 equilibria";
  return out;
}

void write_zcurve_csv(const std::string &path, const ZCurve &z) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  os << "f,fp\n" << std::setprecision(17);
  for (const auto &p : z.points)
    os << p[0] << ',' << p[1] << '\n';
}

void write_equilibrium_json(const std::string &path, const EquilibriumSolution &s) {
  nlohmann::ordered_json j;
  j["f0"] = s.f0;
  j["fp0"] = s.fp0;
  j["residual"] = s.residual;
  if (s.n_unstable)
    j["n_unstable"] = *s.n_unstable;
  else
    j["n_unstable"] = nullptr;
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  os << j.dump(2) << '\n';
}

} // namespace eternal
