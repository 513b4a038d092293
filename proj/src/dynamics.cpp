// SPDX-License-Identifier: Apache-2.0
#include "eternal/dynamics.hpp"

#include "eternal/equilibrium.hpp"
#include "eternal/kernels.hpp"
#include "eternal/parallel.hpp"
#include "eternal/spectrum.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>

namespace eternal {

GridFunction boundary_consistent(const GridFunction &f, double left, double right, const Potential &phi) {
  GridFunction out = f;
  out[0] = left;
  out[out.size() - 1] = right;
  polish_equilibrium(out, phi);
  return out;
}

UnstablePair unstable_pair(const GridFunction &f_eq) {
  SpectrumReport r = unstable_spectrum(f_eq, true);
  if (r.n_positive < 2)
    throw std::invalid_argument("eigenmix needs at least two positive eigenvalues");
  // eigenvalues come in decreasing order; positives first
  std::size_t k1 = static_cast<std::size_t>(r.n_positive) - 1, k2 = k1 - 1;
  return {r.eigenfunctions[k1], r.eigenfunctions[k2], r.eigenvalues[k1], r.eigenvalues[k2]};
}

GridFunction direction_field(const GridFunction &f_eq, const Direction &d) {
  const Grid &g = f_eq.grid();
  if (d.kind == Direction::Kind::gaussian) {
    if (!(d.width > 0.0))
      throw std::invalid_argument("gaussian width must be positive");
    GridFunction out(g);
    for (std::size_t i = 0; i < g.n; ++i) {
      double x = g.x(i);
      out[i] = std::exp(-x * x / d.width);
    }
    return out;
  }
  UnstablePair p = unstable_pair(f_eq);
  return std::cos(d.theta) * p.e1 + std::sin(d.theta) * p.e2;
}

Trajectory evolve_perturbed(const GridFunction &f_eq, double A, const Direction &d, const Potential &phi, double h,
                            double t_end, const EvolveOptions &opt) {
  GridFunction u0 = f_eq + A * direction_field(f_eq, d);
  return evolve(u0, h, t_end, Reaction::flagship(f_eq.grid(), phi), opt);
}

std::string verdict_name(FateReport::Verdict v) {
  switch (v) {
  case FateReport::Verdict::converged:
    return "converged";
  case FateReport::Verdict::blowup:
    return "blowup";
  case FateReport::Verdict::undecided:
    return "undecided";
  }
  return "?";
}

FateReport classify_fate(const Trajectory &traj, const std::vector<GridFunction> &equilibria, double tol) {
  if (equilibria.empty())
    throw std::invalid_argument("classify_fate needs at least one equilibrium");
  FateReport r;
  r.horizon = traj.times.empty() ? 0.0 : traj.times.back();
  if (traj.blowup) {
    r.verdict = FateReport::Verdict::blowup;
    r.t_star = traj.blowup->t_star;
    return r;
  }
  const double start = 0.9 * r.horizon;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < equilibria.size(); ++j) {
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k)
      if (traj.times[k] >= start)
        worst = std::max(worst, sup_distance(traj.snapshots[k], equilibria[j]));
    if (worst < best) {
      best = worst;
      r.index = static_cast<int>(j);
    }
  }
  r.sup_dist = best;
  if (best < tol)
    r.verdict = FateReport::Verdict::converged;
  else
    r.index = -1;
  return r;
}

namespace {
bool same_fate(const FateReport &a, const FateReport &b) {
  return a.verdict == b.verdict && (a.verdict != FateReport::Verdict::converged || a.index == b.index);
}
bool undecided(const FateReport &a) { return a.verdict == FateReport::Verdict::undecided; }
} // namespace

FrontierResult frontier_bisect(const std::function<GridFunction(double)> &initial, const Reaction &G,
                               const std::vector<GridFunction> &equilibria, double lo, double hi, double tol,
                               double horizon, const FrontierOptions &opt) {
  auto probe = [&](double p, double H) {
    return classify_fate(evolve(initial(p), opt.h, H, G, opt.evolve), equilibria, opt.fate_tol);
  };
  FrontierResult r;
  r.lo = lo;
  r.hi = hi;
  double H = horizon;
  std::vector<FateReport> ends(2);
  parallel_for(2, [&](std::size_t k) { ends[k] = probe(k == 0 ? lo : hi, H); });
  for (int d = 0; d < opt.max_doublings && (undecided(ends[0]) || undecided(ends[1])); ++d) {
    H *= 2.0;
    parallel_for(2, [&](std::size_t k) { ends[k] = probe(k == 0 ? lo : hi, H); });
  }
  r.fate_lo = ends[0];
  r.fate_hi = ends[1];
  r.horizon = H;
  if (undecided(ends[0]) || undecided(ends[1])) {
    r.undecided = true;
    r.value = 0.5 * (lo + hi);
    return r;
  }
  if (same_fate(ends[0], ends[1]))
    throw NoBracket("no bracket");
  while (std::fabs(r.hi - r.lo) >= tol) {
    double mid = 0.5 * (r.lo + r.hi);
    FateReport fm = probe(mid, H);
    for (int d = 0; d < opt.max_doublings && undecided(fm); ++d) {
      H *= 2.0;
      fm = probe(mid, H);
    }
    ++r.iterations;
    r.horizon = H;
    if (undecided(fm)) {
      r.undecided = true;
      break;
    }
    if (same_fate(fm, r.fate_lo)) {
      r.lo = mid;
      r.fate_lo = fm;
    } else {
      r.hi = mid;
      r.fate_hi = fm;
    }
  }
  r.value = 0.5 * (r.lo + r.hi);
  return r;
}

FrontierResult frontier_search(const GridFunction &f_eq, const Direction &d, double lo, double hi, double tol,
                               const Potential &phi, double horizon, const FrontierOptions &opt) {
  std::vector<GridFunction> eqs = opt.equilibria;
  if (eqs.empty()) {
    MatchOptions mo;
    mo.grid = f_eq.grid();
    for (const auto &s : find_equilibria(phi, mo).solutions)
      eqs.push_back(s.profile);
    if (eqs.empty())
      eqs.push_back(f_eq);
  }
  Reaction G = Reaction::flagship(f_eq.grid(), phi);
  // the clamped stepper holds the ends of the initial data, which are those of f_eq
  for (auto &e : eqs)
    e = boundary_consistent(e, f_eq[0], f_eq[f_eq.size() - 1], phi);
  std::function<GridFunction(double)> initial;
  if (opt.vary == FrontierOptions::Vary::amplitude) {
    GridFunction g = direction_field(f_eq, d);
    initial = [f_eq, g](double A) { return f_eq + A * g; };
  } else {
    UnstablePair p = unstable_pair(f_eq);
    double A = opt.amplitude;
    initial = [f_eq, p, A](double th) { return f_eq + A * (std::cos(th) * p.e1 + std::sin(th) * p.e2); };
  }
  return frontier_bisect(initial, G, eqs, lo, hi, tol, horizon, opt);
}

Heteroclinic construct_heteroclinic(const GridFunction &f_minus, const GridFunction &f_plus, const Potential &phi,
                                    double eps, double h, double t_end, const EvolveOptions &opt) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("eps must lie in (0, 1)");
  for (std::size_t i = 0; i < f_minus.size(); ++i)
    if (f_minus[i] > f_plus[i] + 1e-12)
      throw std::invalid_argument("f_minus must lie below f_plus");
  GridFunction u0 = f_minus + eps * (f_plus - f_minus);
  Heteroclinic out;
  out.traj = evolve(u0, h, t_end, Reaction::flagship(f_minus.grid(), phi), opt);
  for (const auto &u : out.traj.snapshots)
    for (std::size_t i = 0; i < u.size(); ++i)
      out.max_breach = std::max({out.max_breach, f_minus[i] - u[i], u[i] - f_plus[i]});
  if (out.traj.blowup || !(out.max_breach <= 1e-6))
    throw FunnelBreach("funnel breach");

  const std::size_t i0 = f_minus.grid().nearest(0.0);
  const double mid = 0.5 * (f_minus[i0] + f_plus[i0]);
  const auto &T = out.traj.times;
  for (std::size_t k = 0; k < T.size(); ++k) {
    double a = out.traj.snapshots[k][i0] - mid;
    if (a == 0.0) {
      out.shift = T[k];
      break;
    }
    if (k + 1 < T.size()) {
      double b = out.traj.snapshots[k + 1][i0] - mid;
      if (a * b < 0.0) {
        out.shift = T[k] + (T[k + 1] - T[k]) * a / (a - b);
        break;
      }
    }
  }
  for (auto &t : out.traj.times)
    t -= out.shift;
  return out;
}

double leave_time(const Trajectory &traj, const GridFunction &f, double radius) {
  for (std::size_t k = 0; k < traj.size(); ++k)
    if (sup_distance(traj.snapshots[k], f) > radius)
      return traj.times[k];
  return std::nan("");
}

VariationalCheck verify_variational(const Trajectory &traj, const Potential &phi) {
  VariationalCheck r;
  std::vector<double> A(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k)
    A[k] = action(traj.snapshots[k], phi).value;
  for (std::size_t k = 0; k + 1 < A.size(); ++k) {
    double d = A[k + 1] - A[k];
    if (d > 1e-6 * (1.0 + std::fabs(A[k])))
      r.monotone = false;
    r.max_increase = std::max(r.max_increase, d);
    r.max_decrease = std::max(r.max_decrease, -d);
  }
  r.energy = energy(traj, phi);
  r.action_drop = A.front() - A.back();
  r.energy_vs_action_gap = std::fabs(r.energy - r.action_drop);
  return r;
}

namespace {
double weighted_dot(const GridFunction &a, const GridFunction &b) {
  const double dx = a.grid().dx();
  double s = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    s += (i == 0 || i + 1 == n ? 0.5 : 1.0) * a[i] * b[i];
  return s * dx;
}
} // namespace

std::optional<double> blowup_time(const GridFunction &u0, double h, double horizon, const Reaction &G,
                                  double threshold) {
  const std::size_t steps = static_cast<std::size_t>(std::llround(horizon / h));
  const auto &K = kernels::active();
  GridFunction u = u0;
  std::optional<double> estimate;
  for (std::size_t k = 1; k <= steps; ++k) {
    u = imex_step(u, h, G, Boundary::clamped);
    double t = static_cast<double>(k) * h;
    double m = K.max_abs(u.data(), u.size());
    if (!std::isfinite(m))
      return estimate ? estimate : std::optional<double>(t);
    // once u² dominates, the remaining time of u' = −u² from level m is 1/m
    if (!estimate && m * h >= 0.01)
      estimate = t + 1.0 / m;
    if (m > threshold)
      return estimate ? estimate : std::optional<double>(t);
  }
  return std::nullopt;
}

double extrapolate_blowup(const std::vector<double> &h, const std::vector<double> &t) {
  if (h.size() != 3 || t.size() != 3)
    throw std::invalid_argument("extrapolation needs three samples");
  double M[3][4];
  for (int i = 0; i < 3; ++i) {
    M[i][0] = 1.0;
    M[i][1] = h[i];
    M[i][2] = h[i] * std::log(h[i]);
    M[i][3] = t[i];
  }
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(M[r][c]) > std::fabs(M[p][c]))
        p = r;
    for (int k = 0; k < 4; ++k)
      std::swap(M[c][k], M[p][k]);
    for (int r = 0; r < 3; ++r) {
      if (r == c)
        continue;
      double m = M[r][c] / M[c][c];
      for (int k = c; k < 4; ++k)
        M[r][k] -= m * M[c][k];
    }
  }
  return M[0][3] / M[0][0];
}

FujitaDiagnostic fujita_experiment(const GridFunction &f, const GridFunction &h_init, double x0, double T,
                                   const FujitaOptions &opt) {
  const Grid &g = f.grid();
  for (std::size_t i = 0; i < g.n; ++i) {
    if (h_init[i] > 0.0)
      throw std::invalid_argument("h_init must be nonpositive");
    if (f[i] < -1e-12)
      throw std::invalid_argument("f must be nonnegative");
  }
  if (!(T > 0.0) || !(opt.h > 0.0))
    throw std::invalid_argument("fujita_experiment: T and h must be positive");

  FujitaDiagnostic d;
  GridFunction w(g, 0.0);
  w[g.nearest(x0)] = 1.0 / g.dx();
  Reaction L = Reaction::linear(-2.0 * f);
  const std::size_t steps = static_cast<std::size_t>(std::llround(T / opt.h));
  d.times.reserve(steps + 1);
  d.J.reserve(steps + 1);
  d.w_l1.reserve(steps + 1);
  double I = 0.0, prev_g = -1.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    if (k > 0)
      w = imex_step(w, opt.h, L, Boundary::open);
    double t = static_cast<double>(k) * opt.h;
    double J = weighted_dot(w, h_init);
    double m = norms(w).l1;
    if (k > 0)
      I += 0.5 * opt.h * (1.0 / d.w_l1.back() + 1.0 / m);
    d.times.push_back(t);
    d.J.push_back(J);
    d.w_l1.push_back(m);
    if (k == 1)
      d.mass_after_one_step = m;
    double gk = -J * I - 1.0;
    if (k > 0 && !d.violation_time && gk > 0.0)
      d.violation_time = t - opt.h * gk / (gk - prev_g);
    prev_g = gk;
  }

  if (opt.nonlinear) {
    double horizon = opt.nonlinear_horizon_factor * (d.violation_time ? *d.violation_time : T);
    Reaction P = Reaction::perturbation(f);
    // the 1/m estimate needs the trigger level 0.01/h well above the initial data
    const double hn = std::min(opt.h, 1e-3 / std::max(norms(h_init).linf, 1e-12));
    std::vector<double> hs{hn, hn / 2, hn / 4};
    std::vector<std::optional<double>> ts(3);
    parallel_for(3, [&](std::size_t k) { ts[k] = blowup_time(h_init, hs[k], horizon, P, opt.blowup_threshold); });
    bool all = true;
    for (const auto &t : ts) {
      if (t)
        d.t_star_raw.push_back(*t);
      else
        all = false;
    }
    if (all)
      d.t_star = extrapolate_blowup(hs, d.t_star_raw);
    if (d.violation_time)
      d.fence_respected = d.t_star && *d.t_star <= *d.violation_time * (1.0 + opt.fence_tol);
  }
  return d;
}

ViolationSetup violation_initial_condition(const GridFunction &f, double beta, double K) {
  if (!(beta > 0.0) || !(K > 1.0))
    throw std::invalid_argument("violation setup needs beta > 0 and K > 1");
  const Grid &g = f.grid();
  ViolationSetup s;
  s.beta = beta;
  s.K = K;
  s.gamma = std::sqrt(beta / (27.0 * K));
  std::size_t i1 = 0;
  while (i1 < g.n && f[i1] <= s.gamma)
    ++i1;
  s.tail_level_ok = i1 > 0;
  s.x1 = i1 < g.n ? g.x(i1) : g.x_max;
  const double fmax = norms(f).linf;
  const double t_max = 1.0 / (4.0 * s.gamma * s.gamma);
  auto shift_holds = [&](double x0) {
    for (int k = 1; k <= 400; ++k) {
      double t = t_max * k / 400.0;
      if (!(std::sqrt(t) * fmax * std::erfc((s.x1 - x0) / (2.0 * std::sqrt(t))) < s.gamma))
        return false;
    }
    return true;
  };
  s.x0 = g.x_min;
  for (std::size_t i = i1; i-- > 0;) {
    if (shift_holds(g.x(i))) {
      s.x0 = g.x(i);
      s.shift_ok = true;
      break;
    }
  }
  const double a = std::pow(beta, 1.5);
  s.h = GridFunction(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    double y = g.x(i) - s.x0;
    s.h[i] = -beta * std::exp(-a * y * y);
  }
  Norms n = norms(s.h);
  s.norm_inf = n.linf;
  s.norm_1 = n.l1;
  return s;
}

void write_fujita_csv(const std::string &path, const FujitaDiagnostic &d) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  os << "t,J,w_l1\n" << std::setprecision(17);
  for (std::size_t k = 0; k < d.times.size(); ++k)
    os << d.times[k] << ',' << d.J[k] << ',' << d.w_l1[k] << '\n';
}

} // namespace eternal
