// SPDX-License-Identifier: Apache-2.0
#include "eternal/bifurcation.hpp"

#include "eternal/parallel.hpp"
#include "eternal/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace eternal {

std::string event_name(EventKind k) {
  switch (k) {
  case EventKind::fold:
    return "fold";
  case EventKind::pitchfork:
    return "pitchfork";
  case EventKind::end:
    return "end";
  }
  return "?";
}

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

bool solve3(Mat3 A, Vec3 b, Vec3 &x) {
  for (int c = 0; c < 3; ++c) {
    int p = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(A[r][c]) > std::fabs(A[p][c]))
        p = r;
    if (A[p][c] == 0.0 || !std::isfinite(A[p][c]))
      return false;
    std::swap(A[p], A[c]);
    std::swap(b[p], b[c]);
    for (int r = c + 1; r < 3; ++r) {
      double m = A[r][c] / A[c][c];
      for (int k = c; k < 3; ++k)
        A[r][k] -= m * A[c][k];
      b[r] -= m * b[c];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 3; ++k)
      s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return true;
}

bool solve2(double a, double b, double c, double d, double r0, double r1, double &x0, double &x1) {
  double det = a * d - b * c;
  if (det == 0.0 || !std::isfinite(det))
    return false;
  x0 = (d * r0 - b * r1) / det;
  x1 = (-c * r0 + a * r1) / det;
  return true;
}

double nrm2(const std::array<double, 2> &F) { return std::max(std::fabs(F[0]), std::fabs(F[1])); }

} // namespace

double ContinuationSystem::fd_step(std::size_t, const std::array<double, 2> &u) const {
  (void)u;
  return 1e-7;
}

std::optional<std::array<double, 2>> ContinuationSystem::solve(double c, std::array<double, 2> u) const {
  auto e = eval(c, u);
  if (!e)
    return std::nullopt;
  double fn = nrm2(e->F);
  for (int it = 0; it < 40 && fn > 1e-11; ++it) {
    std::array<double, 2> col[2];
    for (std::size_t j = 0; j < 2; ++j) {
      auto v = u;
      double h = fd_step(j, u);
      v[j] += h;
      auto ej = eval(c, v);
      if (!ej) {
        v[j] -= 2 * h;
        h = -h;
        ej = eval(c, v);
        if (!ej)
          return std::nullopt;
      }
      col[j] = {(ej->F[0] - e->F[0]) / h, (ej->F[1] - e->F[1]) / h};
    }
    double d0, d1;
    if (!solve2(col[0][0], col[1][0], col[0][1], col[1][1], -e->F[0], -e->F[1], d0, d1))
      return std::nullopt;
    bool moved = false;
    for (double lam = 1.0; lam > 1e-6; lam *= 0.5) {
      std::array<double, 2> v{u[0] + lam * d0, u[1] + lam * d1};
      auto ev = eval(c, v);
      if (ev && nrm2(ev->F) < fn) {
        u = v;
        e = ev;
        fn = nrm2(ev->F);
        moved = true;
        break;
      }
    }
    if (!moved)
      break;
  }
  if (fn > 1e-8)
    return std::nullopt;
  return u;
}

// ------------------------------------------------------------ matching system

MatchingSystem::MatchingSystem(const Potential &family, double x0, double step, Grid grid)
    : matcher_(family, x0, step), grid_(grid) {
  if (!family.parametric())
    throw std::invalid_argument("continuation needs a parametric potential family");
}

std::optional<ContinuationSystem::Eval> MatchingSystem::eval(double c, const std::array<double, 2> &u) const {
  auto L = matcher_.shoot(Side::minus, u[0], c);
  if (!L)
    return std::nullopt;
  auto R = matcher_.shoot(Side::plus, u[1], c);
  if (!R)
    return std::nullopt;
  return Eval{{L->f - R->f, L->fp - R->fp}, 0.5 * (L->f + R->f), 0.5 * (L->fp + R->fp)};
}

double MatchingSystem::fd_step(std::size_t, const std::array<double, 2> &u) const {
  return 1e-7 * std::max(std::min(u[0], u[1]), 1e-12);
}

EquilibriumSolution MatchingSystem::solution(const BranchPoint &p) const {
  return matcher_.assemble(p.c, p.u[0], p.u[1], grid_);
}

void MatchingSystem::annotate(BranchPoint &p) const {
  EquilibriumSolution s = solution(p);
  SchrodingerOp op = SchrodingerOp::linearization(s.profile);
  EigOptions eo;
  eo.eigenvectors = false;
  eo.check_truncation = false;
  SpectrumReport r = eigs_above_edge(op, eo);
  // strict sign count so that jumps sit exactly where an eigenvalue crosses 0
  p.n_unstable = static_cast<int>(op.count_above(0.0));
  p.ambiguous = r.ambiguous;
  p.smallest_abs_eig = smallest_abs_eigenvalue(op);
}

double MatchingSystem::existence_half_width(const BranchPoint &p, bool right) const {
  Potential q = matcher_.potential().with_param(p.c);
  PhaseState s{p.f0, p.fp0, 0.0};
  double target = right ? 30.0 : -30.0;
  PhaseOutcome o = integrate_phase(s, target, matcher_.step(), q, 10.0);
  return o.global ? target : o.x_blow;
}

BranchPoint MatchingSystem::point_from(const EquilibriumSolution &s) const {
  BranchPoint p;
  p.c = s.param;
  p.f0 = s.f0;
  p.fp0 = s.fp0;
  p.u = {s.seed_left, s.seed_right};
  return p;
}

// ------------------------------------------------------------ constant system

std::optional<ContinuationSystem::Eval> ConstantSystem::eval(double P, const std::array<double, 2> &u) const {
  return Eval{{u[0] * u[0] - P, u[1]}, u[0], u[1]};
}

void ConstantSystem::annotate(BranchPoint &p) const {
  // H = d²/dx² − 2f0 has purely essential spectrum (−∞, −2f0]
  p.n_unstable = p.f0 < 0.0 ? -1 : 0;
  p.smallest_abs_eig = std::nan("");
  p.ambiguous = p.f0 < 0.0;
}

// ------------------------------------------------------------ continuation

namespace {

struct Sample {
  Vec3 y;     // (c, u0, u1)
  Vec3 o;     // (c, f0, fp0)
  std::array<double, 2> F;
};

std::optional<Sample> sample(const ContinuationSystem &sys, const Vec3 &y) {
  auto e = sys.eval(y[0], {y[1], y[2]});
  if (!e)
    return std::nullopt;
  return Sample{y, {y[0], e->f0, e->fp0}, e->F};
}

double dist(const Vec3 &a, const Vec3 &b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

// columns ∂(F0, F1, o1, o2)/∂y_j
bool jacobian(const ContinuationSystem &sys, const Sample &s, std::array<std::array<double, 4>, 3> &J) {
  for (std::size_t j = 0; j < 3; ++j) {
    double h = j == 0 ? 1e-7 * std::max(1.0, std::fabs(s.y[0])) : sys.fd_step(j - 1, {s.y[1], s.y[2]});
    Vec3 y = s.y;
    y[j] += h;
    auto t = sample(sys, y);
    if (!t) {
      y[j] -= 2 * h;
      h = -h;
      t = sample(sys, y);
      if (!t)
        return false;
    }
    J[j] = {(t->F[0] - s.F[0]) / h, (t->F[1] - s.F[1]) / h, (t->o[1] - s.o[1]) / h, (t->o[2] - s.o[2]) / h};
  }
  return true;
}

} // namespace

Branch continue_branch(const ContinuationSystem &sys, const BranchPoint &seed, double c_from, double c_to,
                       const ContinuationOptions &opt) {
  const double c_lo = std::min(c_from, c_to), c_hi = std::max(c_from, c_to);
  auto u0 = sys.solve(seed.c, seed.u);
  if (!u0)
    throw std::runtime_error("continue_branch: seed refinement failed");
  auto s0 = sample(sys, {seed.c, (*u0)[0], (*u0)[1]});
  if (!s0)
    throw std::runtime_error("continue_branch: seed refinement failed");

  auto to_point = [](const Sample &s) {
    BranchPoint p;
    p.c = s.o[0];
    p.f0 = s.o[1];
    p.fp0 = s.o[2];
    p.u = {s.y[1], s.y[2]};
    return p;
  };

  Branch b;
  b.points.push_back(to_point(*s0));

  // initial tangent: null vector of ∂F/∂y, oriented toward c_to
  std::array<std::array<double, 4>, 3> J;
  if (!jacobian(sys, *s0, J))
    throw std::runtime_error("continue_branch: cannot differentiate at seed");
  Vec3 r0{J[0][0], J[1][0], J[2][0]}, r1{J[0][1], J[1][1], J[2][1]};
  Vec3 n{r0[1] * r1[2] - r0[2] * r1[1], r0[2] * r1[0] - r0[0] * r1[2], r0[0] * r1[1] - r0[1] * r1[0]};
  Vec3 dn{n[0], J[0][2] * n[0] + J[1][2] * n[1] + J[2][2] * n[2], J[0][3] * n[0] + J[1][3] * n[1] + J[2][3] * n[2]};
  double L = std::sqrt(dn[0] * dn[0] + dn[1] * dn[1] + dn[2] * dn[2]);
  if (!(L > 0.0))
    throw std::runtime_error("continue_branch: degenerate tangent at seed");
  double orient = (c_to >= c_from ? 1.0 : -1.0) * (dn[0] >= 0.0 ? 1.0 : -1.0);
  Vec3 tau, dy;
  for (int k = 0; k < 3; ++k) {
    tau[k] = orient * dn[k] / L;
    dy[k] = orient * n[k] / L; // y-displacement per unit observed arclength
  }

  Sample cur = *s0;
  double ds = opt.ds;
  while (b.points.size() < opt.max_points) {
    Vec3 y{cur.y[0] + ds * dy[0], cur.y[1] + ds * dy[1], cur.y[2] + ds * dy[2]};
    std::optional<Sample> s = sample(sys, y);
    bool ok = false;
    int it = 0;
    for (; s && it < opt.newton_max; ++it) {
      double N = (s->o[0] - cur.o[0]) * tau[0] + (s->o[1] - cur.o[1]) * tau[1] + (s->o[2] - cur.o[2]) * tau[2] - ds;
      if (nrm2(s->F) < opt.newton_tol && std::fabs(N) < 1e-9 * std::max(1.0, ds * 1e3)) {
        ok = true;
        break;
      }
      std::array<std::array<double, 4>, 3> Jn;
      if (!jacobian(sys, *s, Jn))
        break;
      Mat3 A;
      for (int j = 0; j < 3; ++j) {
        A[0][j] = Jn[j][0];
        A[1][j] = Jn[j][1];
        double dc = j == 0 ? 1.0 : 0.0;
        A[2][j] = dc * tau[0] + Jn[j][2] * tau[1] + Jn[j][3] * tau[2];
      }
      Vec3 rhs{-s->F[0], -s->F[1], -N}, d{};
      if (!solve3(A, rhs, d))
        break;
      Vec3 yn{s->y[0] + d[0], s->y[1] + d[1], s->y[2] + d[2]};
      s = sample(sys, yn);
    }
    if (!ok) {
      ds *= 0.5;
      if (ds < opt.ds_min) {
        b.terminated_by_failure = true;
        break;
      }
      continue;
    }
    const double fp_prev = cur.o[2];
    double step = dist(s->o, cur.o);
    if (!(step > 0.0)) {
      b.terminated_by_failure = true;
      break;
    }
    for (int k = 0; k < 3; ++k) {
      tau[k] = (s->o[k] - cur.o[k]) / step;
      dy[k] = (s->y[k] - cur.y[k]) / step;
    }
    cur = *s;
    b.points.push_back(to_point(cur));
    if (cur.o[0] < c_lo || cur.o[0] > c_hi)
      break;
    if (opt.stop_on_symmetry && (std::fabs(cur.o[2]) < opt.symmetry_tol || cur.o[2] * fp_prev < 0.0))
      break;
    if (it <= 3)
      ds = std::min(opt.ds, ds * 1.5);
  }

  if (opt.annotate)
    parallel_for(b.points.size(), [&](std::size_t k) { sys.annotate(b.points[k]); });
  std::size_t first = b.points.size() > 5 ? b.points.size() - 5 : 0;
  for (std::size_t k = first; k < b.points.size(); ++k)
    b.existence.push_back({b.points[k].c, sys.existence_half_width(b.points[k], false),
                           sys.existence_half_width(b.points[k], true)});
  if (opt.detect)
    b.events = detect_events(b, &sys);
  return b;
}

namespace {

double arclen(const BranchPoint &a, const BranchPoint &b) {
  return std::sqrt((a.c - b.c) * (a.c - b.c) + (a.f0 - b.f0) * (a.f0 - b.f0) + (a.fp0 - b.fp0) * (a.fp0 - b.fp0));
}

// vertex of the parabola through (s_i, c_i)
double parabola_extremum(double s0, double c0, double s1, double c1, double s2, double c2) {
  double d0 = (c1 - c0) / (s1 - s0), d1 = (c2 - c1) / (s2 - s1);
  double a = (d1 - d0) / (s2 - s0);
  if (a == 0.0)
    return c1;
  double sm = 0.5 * (s0 + s1) - d0 / (2.0 * a);
  return c0 + d0 * (sm - s0) + a * (sm - s0) * (sm - s1);
}

// symmetric solution at parameter c, interpolated from two bracketing branch points
std::optional<BranchPoint> symmetric_at(const ContinuationSystem &sys, const BranchPoint &a, const BranchPoint &b,
                                        double c) {
  double w = (b.c == a.c) ? 0.5 : (c - a.c) / (b.c - a.c);
  std::array<double, 2> g{a.u[0] + w * (b.u[0] - a.u[0]), a.u[1] + w * (b.u[1] - a.u[1])};
  auto u = sys.solve(c, g);
  if (!u)
    return std::nullopt;
  auto e = sys.eval(c, *u);
  BranchPoint p;
  p.c = c;
  p.u = *u;
  p.f0 = e->f0;
  p.fp0 = e->fp0;
  sys.annotate(p);
  return p;
}

// Solutions with prescribed asymmetry u0 − u1 = 2t near a symmetric point: Newton in (c, s).
std::optional<BranchPoint> asymmetric_near(const ContinuationSystem &sys, const BranchPoint &p, double t) {
  double c = p.c, s = 0.5 * (p.u[0] + p.u[1]);
  auto F = [&](double cc, double ss) { return sys.eval(cc, {ss + t, ss - t}); };
  auto e = F(c, s);
  if (!e)
    return std::nullopt;
  for (int it = 0; it < 40 && nrm2(e->F) > 1e-11; ++it) {
    double hc = 1e-7, hs = 1e-7 * std::fabs(s);
    auto ec = F(c + hc, s), es = F(c, s + hs);
    if (!ec || !es)
      return std::nullopt;
    double dc, dsv;
    if (!solve2((ec->F[0] - e->F[0]) / hc, (es->F[0] - e->F[0]) / hs, (ec->F[1] - e->F[1]) / hc,
                (es->F[1] - e->F[1]) / hs, -e->F[0], -e->F[1], dc, dsv))
      return std::nullopt;
    c += dc;
    s += dsv;
    e = F(c, s);
    if (!e)
      return std::nullopt;
  }
  if (nrm2(e->F) > 1e-9)
    return std::nullopt;
  BranchPoint q;
  q.c = c;
  q.u = {s + t, s - t};
  q.f0 = e->f0;
  q.fp0 = e->fp0;
  return q;
}

} // namespace

std::vector<BranchEvent> detect_events(const Branch &b, const ContinuationSystem *sys) {
  std::vector<BranchEvent> ev;
  const auto &P = b.points;
  std::vector<double> s(P.size(), 0.0);
  for (std::size_t k = 1; k < P.size(); ++k)
    s[k] = s[k - 1] + arclen(P[k - 1], P[k]);
  std::vector<char> near_fold(P.size(), 0);
  double fp_max = 0.0;
  for (const auto &p : P)
    fp_max = std::max(fp_max, std::fabs(p.fp0));
  for (std::size_t k = 1; k + 1 < P.size(); ++k) {
    double d0 = P[k].c - P[k - 1].c, d1 = P[k + 1].c - P[k].c;
    // a fork arm turns in c where it meets the symmetric branch; that is the pitchfork
    bool arm_contact = fp_max > 1e-6 && std::fabs(P[k].fp0) < 0.05 * fp_max;
    if (d0 * d1 < 0.0 && !arm_contact) {
      BranchEvent e;
      e.kind = EventKind::fold;
      e.c = parabola_extremum(s[k - 1], P[k - 1].c, s[k], P[k].c, s[k + 1], P[k + 1].c);
      e.branch_id = b.id;
      e.verified = true;
      ev.push_back(e);
      for (std::size_t q = (k >= 2 ? k - 2 : 0); q <= std::min(P.size() - 1, k + 2); ++q)
        near_fold[q] = 1;
    }
  }
  for (std::size_t k = 0; k + 1 < P.size(); ++k) {
    const auto &a = P[k], &c = P[k + 1];
    if (a.n_unstable == c.n_unstable || near_fold[k] || near_fold[k + 1])
      continue;
    if (std::fabs(a.fp0) > 1e-6 || std::fabs(c.fp0) > 1e-6)
      continue;
    BranchEvent e;
    e.kind = EventKind::pitchfork;
    e.branch_id = b.id;
    e.c = 0.5 * (a.c + c.c);
    if (sys) {
      // bisection on the unstable count along the symmetric branch
      double lo = a.c, hi = c.c;
      int nlo = a.n_unstable;
      bool good = true;
      for (int it = 0; it < 40 && std::fabs(hi - lo) > 1e-10; ++it) {
        double mid = 0.5 * (lo + hi);
        auto p = symmetric_at(*sys, a, c, mid);
        if (!p) {
          good = false;
          break;
        }
        if (p->n_unstable == nlo)
          lo = mid;
        else
          hi = mid;
      }
      e.c = 0.5 * (lo + hi);
      if (good) {
        auto sp = symmetric_at(*sys, a, c, e.c);
        if (sp) {
          double t = 1e-4 * 0.5 * (sp->u[0] + sp->u[1]);
          auto q = asymmetric_near(*sys, *sp, t);
          if (q) {
            double d = std::hypot(q->f0 - sp->f0, q->fp0 - sp->fp0);
            e.verified = d < 1e-3 && std::fabs(q->fp0) > 0.0;
            std::ostringstream os;
            os << std::setprecision(6) << "asymmetric solution at c=" << q->c << " fp0=" << q->fp0
               << " distance " << d;
            e.note = os.str();
          }
        }
      }
    }
    ev.push_back(e);
  }
  if (b.terminated_by_failure && !P.empty()) {
    BranchEvent e;
    e.kind = EventKind::end;
    e.c = P.back().c;
    e.branch_id = b.id;
    std::vector<double> m;
    for (const auto &p : P)
      if (std::isfinite(p.smallest_abs_eig))
        m.push_back(p.smallest_abs_eig);
    if (!m.empty()) {
      std::nth_element(m.begin(), m.begin() + m.size() / 2, m.end());
      double med = m[m.size() / 2];
      double last = P.back().smallest_abs_eig;
      std::size_t k0 = P.size() > 6 ? P.size() - 6 : 0;
      bool declining = P[k0].smallest_abs_eig > last;
      e.verified = declining && last < 10.0 * med;
      std::ostringstream os;
      os << std::setprecision(6) << "smallest_abs_eig " << last << " (median " << med << ", "
         << (declining ? "declining" : "not declining") << ")";
      e.note = os.str();
    }
    ev.push_back(e);
  }
  return ev;
}

SeedBranch parse_seed_branch(const std::string &s) {
  if (s == "upper")
    return SeedBranch::upper;
  if (s == "symmetric")
    return SeedBranch::symmetric;
  if (s == "fork+")
    return SeedBranch::fork_plus;
  if (s == "fork-" || s == "fork−")
    return SeedBranch::fork_minus;
  throw std::invalid_argument("unknown seed branch '" + s + "'");
}

std::optional<BranchPoint> seed_point(const MatchingSystem &sys, SeedBranch which, double c) {
  MatchOptions mo;
  mo.x0 = sys.matcher().x0();
  mo.step = sys.matcher().step();
  EquilibriumSearch r = find_equilibria(sys.matcher().potential().with_param(c), mo);
  const EquilibriumSolution *best = nullptr;
  for (const auto &s : r.solutions) {
    bool sym = std::fabs(s.fp0) < 1e-6;
    switch (which) {
    case SeedBranch::upper:
      if (!best || s.f0 > best->f0)
        best = &s;
      break;
    case SeedBranch::symmetric:
      if (sym && (!best || s.f0 < best->f0))
        best = &s;
      break;
    case SeedBranch::fork_plus:
      if (s.fp0 > 1e-6 && (!best || s.fp0 > best->fp0))
        best = &s;
      break;
    case SeedBranch::fork_minus:
      if (s.fp0 < -1e-6 && (!best || s.fp0 < best->fp0))
        best = &s;
      break;
    }
  }
  if (!best)
    return std::nullopt;
  return sys.point_from(*best);
}

Diagram bifurcation_diagram(const Potential &family, double c_lo, double c_hi, const ContinuationOptions &opt) {
  MatchingSystem sys(family);
  Diagram d;
  double c_seed = std::clamp(0.0, c_lo, c_hi);
  auto up = seed_point(sys, SeedBranch::upper, c_seed);
  if (!up)
    return d;
  std::vector<Branch> main(2);
  parallel_for(2, [&](std::size_t k) {
    main[k] = k == 0 ? continue_branch(sys, *up, c_lo, c_hi, opt) : continue_branch(sys, *up, c_hi, c_lo, opt);
  });
  main[0].id = 0;
  main[1].id = 1;
  for (auto &e : main[0].events)
    e.branch_id = 0;
  for (auto &e : main[1].events)
    e.branch_id = 1;
  d.branches.push_back(std::move(main[0]));
  d.branches.push_back(std::move(main[1]));

  // fork arms, seeded just past each verified pitchfork on the side where they exist
  for (const auto &e : d.branches[0].events) {
    if (e.kind != EventKind::pitchfork)
      continue;
    std::optional<BranchPoint> plus, minus;
    for (double off : {0.01, -0.01, 0.003, -0.003}) {
      double c = e.c + off;
      if (c < c_lo || c > c_hi)
        continue;
      plus = seed_point(sys, SeedBranch::fork_plus, c);
      minus = seed_point(sys, SeedBranch::fork_minus, c);
      if (plus && minus)
        break;
    }
    if (!plus || !minus)
      continue;
    std::vector<BranchPoint> seeds{*plus, *minus};
    std::vector<Branch> arms(2);
    parallel_for(2, [&](std::size_t k) {
      ContinuationOptions down = opt;
      down.stop_on_symmetry = true;
      down.detect = false;
      Branch a = continue_branch(sys, seeds[k], c_hi, c_lo, down);
      ContinuationOptions upo = opt;
      upo.detect = false;
      Branch bb = continue_branch(sys, seeds[k], c_lo, c_hi, upo);
      Branch m;
      for (std::size_t q = a.points.size(); q-- > 1;)
        m.points.push_back(a.points[q]);
      m.points.insert(m.points.end(), bb.points.begin(), bb.points.end());
      m.terminated_by_failure = bb.terminated_by_failure;
      m.existence = bb.existence;
      arms[k] = std::move(m);
    });
    for (auto &a : arms) {
      a.id = static_cast<int>(d.branches.size());
      a.events = detect_events(a, &sys);
      for (auto &ev : a.events)
        ev.branch_id = a.id;
      d.branches.push_back(std::move(a));
    }
  }
  return d;
}

void export_diagram(const std::string &points_csv, const std::string &events_csv, const std::vector<Branch> &branches) {
  std::ofstream p(points_csv), e(events_csv);
  if (!p || !e)
    throw std::runtime_error("cannot open diagram output");
  p << "c,f0,fp0,n_unstable,smallest_abs_eig,branch_id\n" << std::setprecision(17);
  e << "kind,c,branch_id\n" << std::setprecision(17);
  for (const auto &b : branches) {
    for (const auto &q : b.points)
      p << q.c << ',' << q.f0 << ',' << q.fp0 << ',' << q.n_unstable << ',' << q.smallest_abs_eig << ',' << b.id
        << '\n';
    for (const auto &ev : b.events)
      e << event_name(ev.kind) << ',' << ev.c << ',' << b.id << '\n';
  }
}

namespace {
std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ','))
    out.push_back(tok);
  return out;
}

double parse_double(const std::string &s) {
  if (s == "nan" || s == "-nan")
    return std::nan("");
  if (s == "inf")
    return std::numeric_limits<double>::infinity();
  return std::stod(s);
}
} // namespace

std::vector<Branch> import_diagram(const std::string &points_csv, const std::string &events_csv) {
  std::ifstream p(points_csv), e(events_csv);
  if (!p || !e)
    throw std::runtime_error("cannot open diagram input");
  std::vector<Branch> out;
  auto branch = [&](int id) -> Branch & {
    for (auto &b : out)
      if (b.id == id)
        return b;
    out.emplace_back();
    out.back().id = id;
    return out.back();
  };
  std::string line;
  std::getline(p, line);
  while (std::getline(p, line)) {
    if (line.empty())
      continue;
    auto f = split(line);
    if (f.size() != 6)
      throw std::runtime_error("diagram csv: malformed row");
    BranchPoint q;
    q.c = parse_double(f[0]);
    q.f0 = parse_double(f[1]);
    q.fp0 = parse_double(f[2]);
    q.n_unstable = std::stoi(f[3]);
    q.smallest_abs_eig = parse_double(f[4]);
    branch(std::stoi(f[5])).points.push_back(q);
  }
  std::getline(e, line);
  while (std::getline(e, line)) {
    if (line.empty())
      continue;
    auto f = split(line);
    if (f.size() != 3)
      throw std::runtime_error("events csv: malformed row");
    BranchEvent ev;
    ev.kind = f[0] == "fold" ? EventKind::fold : f[0] == "pitchfork" ? EventKind::pitchfork : EventKind::end;
    ev.c = parse_double(f[1]);
    ev.branch_id = std::stoi(f[2]);
    branch(ev.branch_id).events.push_back(ev);
  }
  return out;
}

} // namespace eternal
