// SPDX-License-Identifier: Apache-2.0
#include "eternal/grid.hpp"

#include "eternal/kernels.hpp"
#include "eternal/potential.hpp"
#include "eternal/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace eternal {

Grid::Grid(double lo, double hi, std::size_t count) : x_min(lo), x_max(hi), n(count) {
  if (!(lo < hi))
    throw std::invalid_argument("grid: x_min < x_max required");
  if (count < 3)
    throw std::invalid_argument("grid: n >= 3 required");
}

double Grid::x(std::size_t i) const {
  if (i + 1 == n)
    return x_max;
  return x_min + static_cast<double>(i) * dx();
}

std::vector<double> Grid::coords() const {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i)
    xs[i] = x(i);
  return xs;
}

std::size_t Grid::nearest(double xv) const {
  double r = std::round((xv - x_min) / dx());
  if (r <= 0.0)
    return 0;
  if (r >= static_cast<double>(n - 1))
    return n - 1;
  return static_cast<std::size_t>(r);
}

Grid Grid::enlarged(double factor) const {
  double mid = 0.5 * (x_min + x_max);
  double half = 0.5 * (x_max - x_min) * factor;
  std::size_t cells = static_cast<std::size_t>(std::llround(2.0 * half / dx()));
  return Grid(mid - half, mid - half + static_cast<double>(cells) * dx(), cells + 1);
}

GridFunction::GridFunction(const Grid &g, double fill) : grid_(g), values_(g.n, fill) {}

GridFunction::GridFunction(const Grid &g, std::vector<double> values)
    : grid_(g), values_(std::move(values)) {
  if (values_.size() != g.n)
    throw std::invalid_argument("grid function length does not match grid");
}

GridFunction GridFunction::sample(const Grid &g, const std::function<double(double)> &f) {
  GridFunction r(g);
  for (std::size_t i = 0; i < g.n; ++i)
    r.values_[i] = f(g.x(i));
  return r;
}

bool GridFunction::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double GridFunction::at(double xv) const {
  if (xv <= grid_.x_min)
    return values_.front();
  if (xv >= grid_.x_max)
    return values_.back();
  double s = (xv - grid_.x_min) / grid_.dx();
  std::size_t i = std::min(static_cast<std::size_t>(s), grid_.n - 2);
  double w = s - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

GridFunction &GridFunction::operator+=(const GridFunction &o) {
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] += o.values_[i];
  return *this;
}

GridFunction &GridFunction::operator-=(const GridFunction &o) {
  for (std::size_t i = 0; i < values_.size(); ++i)
    values_[i] -= o.values_[i];
  return *this;
}

GridFunction &GridFunction::operator*=(double s) {
  for (double &v : values_)
    v *= s;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction &b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction &b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

Norms norms(const GridFunction &f) {
  const auto &k = kernels::active();
  const double *v = f.data();
  std::size_t n = f.size();
  double linf = k.max_abs(v, n);
  if (!std::isfinite(linf))
    throw NonFiniteField();
  double dx = f.grid().dx();
  double l1 = dx * (k.sum_abs(v, n) - 0.5 * (std::fabs(v[0]) + std::fabs(v[n - 1])));
  double s2 = dx * (k.sum_sq(v, n) - 0.5 * (v[0] * v[0] + v[n - 1] * v[n - 1]));
  return {l1, std::sqrt(std::max(0.0, s2)), linf};
}

double sup_distance(const GridFunction &a, const GridFunction &b) {
  return kernels::active().max_abs_diff(a.data(), b.data(), a.size());
}

double trapezoid(const GridFunction &f) {
  const auto &v = f.values();
  double s = 0.0;
  for (double x : v)
    s += x;
  s -= 0.5 * (v.front() + v.back());
  return s * f.grid().dx();
}

GridFunction diff2(const GridFunction &f) {
  GridFunction r(f.grid());
  std::size_t n = f.size();
  double inv = 1.0 / (f.grid().dx() * f.grid().dx());
  kernels::active().central_diff2(f.data(), n, inv, r.data());
  if (n >= 4) {
    r[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * inv;
    r[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * inv;
  } else {
    r[0] = r[1];
    r[n - 1] = r[1];
  }
  return r;
}

GridFunction diff1(const GridFunction &f) {
  GridFunction r(f.grid());
  std::size_t n = f.size();
  double dx = f.grid().dx();
  for (std::size_t i = 1; i + 1 < n; ++i)
    r[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  r[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  r[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  return r;
}

namespace {
bool non_decaying(const GridFunction &f, double tol) {
  return std::fabs(f.values().front()) > tol || std::fabs(f.values().back()) > tol;
}
} // namespace

ActionValue action(const GridFunction &f, const Potential &phi, double tail_tol) {
  GridFunction fp = diff1(f);
  GridFunction dens(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double x = f.grid().x(i);
    double v = f[i];
    dens[i] = 0.5 * fp[i] * fp[i] + v * v * v / 3.0 - v * phi(x);
  }
  return {trapezoid(dens), non_decaying(f, tail_tol)};
}

ActionValue polynomial_action(const GridFunction &f, const std::vector<GridFunction> &a,
                              double tail_tol) {
  GridFunction fp = diff1(f);
  GridFunction dens(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double pot = 0.0;
    double pw = f[i];
    for (std::size_t k = 0; k < a.size(); ++k) {
      pot += a[k][i] * pw / static_cast<double>(k + 1);
      pw *= f[i];
    }
    dens[i] = 0.5 * fp[i] * fp[i] - pot;
  }
  return {trapezoid(dens), non_decaying(f, tail_tol)};
}

double energy(const Trajectory &traj, const Potential &phi) {
  if (traj.blowup)
    throw EnergyUndefined();
  if (traj.size() < 2)
    throw std::invalid_argument("energy needs at least two snapshots");
  const Grid &g = traj.snapshots.front().grid();
  GridFunction ph = phi.sample(g);
  auto residual_sq = [&](const GridFunction &u) {
    GridFunction r = diff2(u);
    for (std::size_t i = 0; i < u.size(); ++i)
      r[i] = r[i] - u[i] * u[i] + ph[i];
    double n2 = norms(r).l2;
    return n2 * n2;
  };
  double total = 0.0;
  double prev_res = residual_sq(traj.snapshots[0]);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    double dt = traj.times[k + 1] - traj.times[k];
    GridFunction ut = traj.snapshots[k + 1] - traj.snapshots[k];
    ut *= 1.0 / dt;
    double n2 = norms(ut).l2;
    double next_res = residual_sq(traj.snapshots[k + 1]);
    total += dt * (n2 * n2 + 0.5 * (prev_res + next_res));
    prev_res = next_res;
  }
  return 0.5 * total;
}

void write_csv(std::ostream &os, const GridFunction &f) {
  os << "x,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i)
    os << f.grid().x(i) << ',' << f[i] << '\n';
}

void write_csv(const std::string &path, const GridFunction &f) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("cannot open " + path);
  write_csv(os, f);
}

GridFunction read_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,value", 0) != 0)
    throw std::runtime_error("grid csv: missing header x,value");
  std::vector<double> xs, vs;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("grid csv: malformed row");
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 3)
    throw std::runtime_error("grid csv: fewer than 3 rows");
  Grid g(xs.front(), xs.back(), xs.size());
  return GridFunction(g, std::move(vs));
}

GridFunction read_csv(const std::string &path) {
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open " + path);
  return read_csv(is);
}

GridFunction Trajectory::at(double t) const {
  if (times.empty())
    throw std::runtime_error("empty trajectory");
  if (t <= times.front())
    return snapshots.front();
  if (t >= times.back())
    return snapshots.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  if (times[k] == t)
    return snapshots[k];
  double w = (t - times[k]) / (times[k + 1] - times[k]);
  GridFunction r = snapshots[k];
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = (1.0 - w) * snapshots[k][i] + w * snapshots[k + 1][i];
  return r;
}

Trajectory Trajectory::reversed() const {
  Trajectory r;
  r.h = h;
  double t_end = times.back();
  for (std::size_t k = times.size(); k-- > 0;) {
    r.times.push_back(t_end - times[k]);
    r.snapshots.push_back(snapshots[k]);
  }
  return r;
}

} // namespace eternal
