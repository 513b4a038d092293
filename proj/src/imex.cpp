// SPDX-License-Identifier: Apache-2.0
#include "eternal/imex.hpp"

#include "eternal/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace eternal {

Reaction::Reaction(const Grid &g, std::vector<GridFunction> coefficients)
    : grid_(g), coeffs_(std::move(coefficients)) {
  if (coeffs_.empty())
    coeffs_.emplace_back(g, 0.0);
  for (const auto &c : coeffs_) {
    if (!(c.grid() == g))
      throw std::invalid_argument("reaction coefficient on a different grid");
    if (!c.all_finite())
      throw std::invalid_argument("reaction coefficient not bounded");
  }
  degree_ = coeffs_.size() - 1;
  packed_.reserve(coeffs_.size() * g.n);
  for (const auto &c : coeffs_)
    packed_.insert(packed_.end(), c.values().begin(), c.values().end());
}

Reaction Reaction::flagship(const Grid &g, const Potential &phi) {
  return Reaction(g, {phi.sample(g), GridFunction(g, 0.0), GridFunction(g, -1.0)});
}

Reaction Reaction::linear(const GridFunction &coeff) {
  const Grid &g = coeff.grid();
  return Reaction(g, {GridFunction(g, 0.0), coeff});
}

Reaction Reaction::perturbation(const GridFunction &f) {
  const Grid &g = f.grid();
  return Reaction(g, {GridFunction(g, 0.0), -2.0 * f, GridFunction(g, -1.0)});
}

GridFunction Reaction::eval(const GridFunction &u) const {
  GridFunction out(grid_);
  kernels::active().reaction_step(u.data(), packed_.data(), degree_, grid_.n, 1.0, out.data());
  out -= u;
  return out;
}

void Reaction::explicit_step(const GridFunction &u, double h, GridFunction &out) const {
  kernels::active().reaction_step(u.data(), packed_.data(), degree_, grid_.n, h, out.data());
}

std::vector<double> Reaction::majorant_coefficients() const {
  std::vector<double> m(coeffs_.size());
  for (std::size_t k = 0; k < coeffs_.size(); ++k)
    m[k] = kernels::active().max_abs(coeffs_[k].data(), grid_.n);
  return m;
}

double Reaction::majorant(double z) const {
  auto m = majorant_coefficients();
  double acc = 0.0;
  for (std::size_t k = m.size(); k-- > 0;)
    acc = acc * z + m[k];
  return acc;
}

double resolvent_ratio(double dx, double h) {
  double beta = dx * dx / h;
  double s = std::sqrt(beta + 0.25 * beta * beta);
  return 1.0 / (1.0 + 0.5 * beta + s);
}

namespace {

struct Filter {
  double rho;
  double norm; // (1−ρ)/(1+ρ)
};

Filter make_filter(double dx, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("resolvent: h must be positive");
  double beta = dx * dx / h;
  double s = std::sqrt(beta + 0.25 * beta * beta);
  double d = 1.0 + 0.5 * beta + s;
  double one_minus = (0.5 * beta + s) / d;
  double rho = 1.0 / d;
  return {rho, one_minus / (1.0 + rho)};
}

// r_i = norm·Σ_j ρ^{|i−j|} g_j over j in [lo, hi], zero elsewhere
void convolve(const double *g, std::size_t n, std::size_t lo, std::size_t hi, const Filter &F,
              double *r) {
  std::vector<double> p(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double gi = (i >= lo && i <= hi) ? g[i] : 0.0;
    acc = gi + F.rho * acc;
    p[i] = acc;
  }
  acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double gi = (i >= lo && i <= hi) ? g[i] : 0.0;
    acc = gi + F.rho * acc;
    r[i] = F.norm * (p[i] + acc - gi);
  }
}

GridFunction resolvent_held(const GridFunction &g, double h, double left, double right) {
  const std::size_t n = g.size();
  Filter F = make_filter(g.grid().dx(), h);
  GridFunction r(g.grid());
  convolve(g.data(), n, 1, n - 2, F, r.data());
  const double N = static_cast<double>(n - 1);
  double q = std::pow(F.rho, N);
  double a = left - r[0];
  double b = right - r[n - 1];
  double den = 1.0 - q * q;
  double A = (a - q * b) / den;
  double B = (b - q * a) / den;
  double pa = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    r[i] += A * pa;
    pa *= F.rho;
    if (pa < 1e-300)
      break;
  }
  double pb = 1.0;
  for (std::size_t i = n; i-- > 0;) {
    r[i] += B * pb;
    pb *= F.rho;
    if (pb < 1e-300)
      break;
  }
  r[0] = left;
  r[n - 1] = right;
  return r;
}

} // namespace

GridFunction resolvent(const GridFunction &f, double h, Boundary bc) {
  if (!(h > 0.0))
    throw std::invalid_argument("resolvent: h must be positive");
  if (bc == Boundary::clamped)
    return resolvent_held(f, h, f.values().front(), f.values().back());
  Filter F = make_filter(f.grid().dx(), h);
  GridFunction r(f.grid());
  convolve(f.data(), f.size(), 0, f.size() - 1, F, r.data());
  return r;
}

GridFunction resolvent_quadrature(const GridFunction &f, double h) {
  if (!(h > 0.0))
    throw std::invalid_argument("resolvent: h must be positive");
  const Grid &g = f.grid();
  const double sh = std::sqrt(h);
  const double dx = g.dx();
  GridFunction r(g);
  for (std::size_t i = 0; i < g.n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      double w = (j == 0 || j + 1 == g.n) ? 0.5 : 1.0;
      s += w * f[j] * std::exp(-std::fabs(g.x(i) - g.x(j)) / sh);
    }
    r[i] = s * dx / (2.0 * sh);
  }
  return r;
}

GridFunction imex_step(const GridFunction &u, double h, const Reaction &G, Boundary bc) {
  GridFunction v(u.grid());
  G.explicit_step(u, h, v);
  if (bc == Boundary::clamped)
    return resolvent_held(v, h, u.values().front(), u.values().back());
  return resolvent(v, h, Boundary::open);
}

Trajectory evolve(const GridFunction &u0, double h, double t_end, const Reaction &G,
                  const EvolveOptions &opt) {
  if (!(h > 0.0))
    throw std::invalid_argument("evolve: h must be positive");
  if (!(t_end > 0.0))
    throw std::invalid_argument("evolve: t_end must be positive");
  const std::size_t steps = static_cast<std::size_t>(std::llround(t_end / h));
  std::size_t stride = opt.stride;
  if (stride == 0)
    stride = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, opt.target_snapshots));
  const auto &K = kernels::active();

  Trajectory tr;
  tr.h = h;
  tr.times.push_back(0.0);
  tr.snapshots.push_back(u0);
  GridFunction u = u0;
  for (std::size_t k = 1; k <= steps; ++k) {
    u = imex_step(u, h, G, opt.bc);
    double t = static_cast<double>(k) * h;
    double m = K.max_abs(u.data(), u.size());
    if (!std::isfinite(m) || m > opt.blowup_threshold) {
      tr.times.push_back(t);
      tr.snapshots.push_back(u);
      tr.blowup = Blowup{t, m};
      return tr;
    }
    if (k % stride == 0 || k == steps) {
      tr.times.push_back(t);
      tr.snapshots.push_back(u);
    }
  }
  return tr;
}

namespace {

double quadratic_horizon(double m0, double m1, double m2, double B, double L) {
  auto g = [&](double y) { return m0 + y * (m1 + y * m2); };
  if (!(g(B) > 0.0))
    return kUnbounded;
  if (m2 == 0.0) {
    if (m1 == 0.0)
      return (L - B) / m0;
    return std::log(g(L) / g(B)) / m1;
  }
  double D = m1 * m1 - 4.0 * m0 * m2;
  if (D < 0.0) {
    double s = std::sqrt(-D);
    return 2.0 / s * (std::atan((2.0 * m2 * L + m1) / s) - std::atan((2.0 * m2 * B + m1) / s));
  }
  if (D == 0.0) {
    double y0 = m1 / (2.0 * m2);
    return (1.0 / (B + y0) - 1.0 / (L + y0)) / m2;
  }
  double s = std::sqrt(D);
  auto F = [&](double y) { return std::log((2.0 * m2 * y + m1 - s) / (2.0 * m2 * y + m1 + s)); };
  return (F(L) - F(B)) / s;
}

} // namespace

double a_priori_horizon(double B, const Reaction &G) {
  if (B < 0.0 || !std::isfinite(B))
    throw std::invalid_argument("a_priori_horizon: B must be a finite nonnegative number");
  auto m = G.majorant_coefficients();
  while (m.size() > 1 && m.back() == 0.0)
    m.pop_back();
  const double L = B > 0.0 ? 10.0 * B : 1.0;
  auto g = [&](double y) {
    double acc = 0.0;
    for (std::size_t k = m.size(); k-- > 0;)
      acc = acc * y + m[k];
    return acc;
  };
  if (!(g(B) > 0.0))
    return kUnbounded;
  if (m.size() <= 3) {
    m.resize(3, 0.0);
    return quadratic_horizon(m[0], m[1], m[2], B, L);
  }
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate([&](double y) { return 1.0 / g(y); }, B, L, 15, 1e-12);
}

std::vector<ConvergenceRow> convergence_study(const GridFunction &u0, double T,
                                              const std::vector<double> &h_list, const Reaction &G) {
  if (h_list.size() < 2)
    throw std::invalid_argument("convergence_study needs at least two step sizes");
  for (std::size_t k = 1; k < h_list.size(); ++k)
    if (!(h_list[k] < h_list[k - 1]))
      throw std::invalid_argument("convergence_study: h list must be decreasing");
  std::vector<GridFunction> finals;
  std::string bad;
  for (double h : h_list) {
    EvolveOptions opt;
    opt.target_snapshots = 1;
    Trajectory tr = evolve(u0, h, T, G, opt);
    if (tr.blowup) {
      std::ostringstream os;
      os << (bad.empty() ? "" : ", ") << h;
      bad += os.str();
    }
    finals.push_back(tr.back());
  }
  if (!bad.empty())
    throw ConvergenceBlowup("blow-up before T for h = " + bad);
  std::vector<ConvergenceRow> rows;
  for (std::size_t k = 0; k + 1 < finals.size(); ++k)
    rows.push_back({h_list[k], norms(finals[k] - finals[k + 1]).l2, std::nan("")});
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    rows[k].ratio = rows[k].distance / rows[k + 1].distance;
  return rows;
}

void write_trajectory_csv(const std::string &path, const Trajectory &traj) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  os << "t,x,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto &u = traj.snapshots[k];
    for (std::size_t i = 0; i < u.size(); ++i)
      os << traj.times[k] << ',' << u.grid().x(i) << ',' << u[i] << '\n';
  }
}

void write_trajectory_meta(const std::string &path, const Trajectory &traj, double t_end) {
  nlohmann::ordered_json j;
  j["h"] = traj.h;
  j["t_end"] = t_end;
  if (traj.blowup)
    j["blowup"] = {{"t_star", traj.blowup->t_star}, {"norm_at_stop", traj.blowup->norm_at_stop}};
  else
    j["blowup"] = nullptr;
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  os << j.dump(2) << '\n';
}

} // namespace eternal
