// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "eternal/equilibrium.hpp"
#include "eternal/imex.hpp"
#include "support.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

using namespace eternal;
using eternal::testing::equilibria_at;

namespace {

Reaction quadratic_only(const Grid &g) { return Reaction::flagship(g, Potential::constant(0.0)); }

double scalar_rk4(double y, double P, double T, std::size_t steps) {
  auto f = [P](double v) { return -v * v + P; };
  double h = T / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2), k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

} // namespace

TEST_CASE("resolvent preserves constants") {
  Grid g(-30.0, 30.0, 3001);
  const double h = 0.5, c = 2.75;
  GridFunction f(g, c);
  // clamped ends hold the far field: exact everywhere
  GridFunction r = resolvent(f, h, Boundary::clamped);
  for (std::size_t i = 0; i < g.n; ++i)
    CHECK(std::fabs(r[i] - c) < 1e-10 * c);
  // open ends lose the kernel tail e^{−d/√h}/2 beyond the grid
  GridFunction o = resolvent(f, h, Boundary::open);
  const double sh = std::sqrt(h);
  for (std::size_t i = 0; i < g.n; ++i) {
    double d = std::min(g.x(i) - g.x_min, g.x_max - g.x(i));
    if (d >= 10.0 * sh)
      CHECK(std::fabs(o[i] - c) <= 0.5 * c * std::exp(-d / sh) * 1.05 + 1e-13);
    if (d >= 25.0 * sh)
      CHECK(std::fabs(o[i] - c) < 1e-10 * c);
  }
}

TEST_CASE("resolvent of a discrete delta is the exponential kernel") {
  Grid g(-10.0, 10.0, 2001);
  const double h = 0.25, sh = 0.5;
  GridFunction d(g, 0.0);
  std::size_t i0 = g.nearest(0.0);
  d[i0] = 1.0 / g.dx();
  GridFunction fast = resolvent(d, h, Boundary::open);
  GridFunction quad = resolvent_quadrature(d, h);
  double peak = 1.0 / (2.0 * sh);
  for (std::size_t i = 0; i < g.n; ++i) {
    double exact = std::exp(-std::fabs(g.x(i)) / sh) / (2.0 * sh);
    CHECK(std::fabs(quad[i] - exact) < 1e-12);
    // the discrete decay ratio differs from e^{−dx/√h} at O(dx²/h)
    CHECK(std::fabs(fast[i] - exact) < 2e-3 * peak);
  }
}

TEST_CASE("fast resolvent agrees with the direct quadrature on smooth fields") {
  std::mt19937_64 rng(5);
  Grid g(-12.0, 12.0, 601);
  for (double h : {0.01, 0.1, 1.0}) {
    GridFunction f = testing::random_decaying(g, rng);
    GridFunction a = resolvent(f, h, Boundary::open), b = resolvent_quadrature(f, h);
    double scale = norms(f).linf;
    // both discretizations agree to O(dx²/h)
    CHECK(sup_distance(a, b) < 0.2 * scale * g.dx() * g.dx() / h);
  }
}

TEST_CASE("resolvent is an L1 and sup-norm contraction") {
  std::mt19937_64 rng(2024);
  Grid g(-30.0, 30.0, 1201);
  std::uniform_real_distribution<double> H(-4.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    GridFunction f = testing::random_decaying(g, rng);
    double h = std::pow(10.0, H(rng));
    for (Boundary bc : {Boundary::open, Boundary::clamped}) {
      Norms a = norms(resolvent(f, h, bc)), b = norms(f);
      CHECK(a.linf <= b.linf * (1.0 + 1e-10));
      if (bc == Boundary::open)
        CHECK(a.l1 <= b.l1 * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("resolvent rejects nonpositive steps") {
  GridFunction f(Grid(0.0, 1.0, 11), 1.0);
  CHECK_THROWS_AS(resolvent(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(resolvent(f, -1.0), std::invalid_argument);
}

TEST_CASE("imex_step examples") {
  Grid g;
  GridFunction zero(g, 0.0);
  CHECK(norms(imex_step(zero, 1e-3, quadratic_only(g))).linf == 0.0);

  GridFunction m1(g, -1.0);
  GridFunction s = imex_step(m1, 1e-3, quadratic_only(g), Boundary::open);
  CHECK(std::fabs(s[g.nearest(0.0)] - (-1.001)) < 1e-4);
  CHECK(std::fabs(s[g.nearest(10.0)] - s[g.nearest(-10.0)]) < 1e-15);
}

TEST_CASE("an equilibrium is a fixed point of the step up to its residual") {
  const auto &eqs = equilibria_at(-1.2);
  REQUIRE(eqs.size() == 1);
  Potential phi = Potential::gaussian_quadratic(-1.2);
  const GridFunction &f = eqs[0].profile;
  Reaction G = Reaction::flagship(f.grid(), phi);
  GridFunction res = diff2(f);
  for (std::size_t i = 0; i < f.size(); ++i)
    res[i] += -f[i] * f[i] + phi(f.grid().x(i));
  double r = 0.0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i)
    r = std::max(r, std::fabs(res[i]));
  const double h = 1e-3;
  CHECK(sup_distance(imex_step(f, h, G), f) <= 10.0 * h * r + 1e-15);
}

TEST_CASE("spatially constant data follow the scalar ODE to first order") {
  Grid g(-40.0, 40.0, 801);
  const double P = 2.0, y0 = 0.3, T = 0.5;
  Reaction G = Reaction::flagship(g, Potential::constant(P));
  double exact = scalar_rk4(y0, P, T, 20000);
  double err[3];
  for (int k = 0; k < 3; ++k) {
    EvolveOptions o;
    o.bc = Boundary::open;
    Trajectory tr = evolve(GridFunction(g, y0), 0.01 / std::pow(2.0, k), T, G, o);
    err[k] = std::fabs(tr.back()[g.nearest(0.0)] - exact);
  }
  CHECK(err[0] < 5e-3);
  CHECK(err[0] / err[1] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(err[1] / err[2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("evolve: scalar blow-up of u0 = -1") {
  Grid g(-10.0, 10.0, 201);
  Trajectory tr = evolve(GridFunction(g, -1.0), 1e-4, 2.0, quadratic_only(g));
  REQUIRE(tr.blowup.has_value());
  CHECK(tr.blowup->t_star == doctest::Approx(1.0).epsilon(0.05));
  CHECK(tr.blowup->norm_at_stop > 1e6);
  CHECK(tr.times.back() == tr.blowup->t_star);
}

TEST_CASE("evolve: non-finite values terminate the run") {
  Grid g(-5.0, 5.0, 51);
  EvolveOptions o;
  o.blowup_threshold = std::numeric_limits<double>::infinity();
  Trajectory tr = evolve(GridFunction(g, -1.0), 1e-2, 5.0, quadratic_only(g), o);
  REQUIRE(tr.blowup.has_value());
  CHECK(tr.times.back() < 5.0);
}

TEST_CASE("evolve: funnel start at c = 0.4 converges to the upper equilibrium and stays confined") {
  const auto &eqs = equilibria_at(0.4);
  REQUIRE(eqs.size() == 2);
  const GridFunction &fm = eqs[0].profile, &fp = eqs[1].profile;
  Potential phi = Potential::gaussian_quadratic(0.4);
  for (std::size_t i = 0; i < fm.size(); ++i)
    REQUIRE(fm[i] < fp[i]);
  GridFunction u0 = fm + 0.01 * (fp - fm);
  Trajectory tr = evolve(u0, 1e-2, 200.0, Reaction::flagship(fm.grid(), phi));
  CHECK_FALSE(tr.blowup.has_value());
  CHECK(sup_distance(tr.back(), fp) < 1e-2);
  double breach = 0.0;
  for (const auto &s : tr.snapshots)
    for (std::size_t i = 0; i < s.size(); ++i)
      breach = std::max({breach, fm[i] - s[i], s[i] - fp[i]});
  CHECK(breach <= 1e-6);
}

TEST_CASE("trajectory interpolation hits the snapshots exactly") {
  Grid g(-10.0, 10.0, 101);
  GridFunction u0 = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
  EvolveOptions o;
  o.stride = 7;
  Trajectory tr = evolve(u0, 1e-2, 1.0, quadratic_only(g), o);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    GridFunction v = tr.at(tr.times[k]);
    for (std::size_t i = 0; i < g.n; ++i)
      CHECK(v[i] == tr.snapshots[k][i]);
  }
  // midpoint is the average of the neighbours
  GridFunction mid = tr.at(0.5 * (tr.times[1] + tr.times[2]));
  CHECK(mid[50] == doctest::Approx(0.5 * (tr.snapshots[1][50] + tr.snapshots[2][50])));
  for (std::size_t k = 1; k < tr.size(); ++k)
    CHECK(tr.times[k] > tr.times[k - 1]);
}

TEST_CASE("a-priori horizon examples") {
  Grid g(-5.0, 5.0, 11);
  Reaction G = quadratic_only(g);
  double T = a_priori_horizon(1.0, G);
  CHECK(T < 1.0);
  CHECK(T == doctest::Approx(0.9)); // y = 1/(1−t) reaches 10 at t = 0.9
  CHECK(a_priori_horizon(0.0, G) == kUnbounded);
  CHECK_THROWS_AS(a_priori_horizon(-1.0, G), std::invalid_argument);

  Reaction H(g, {GridFunction(g, 1.0), GridFunction(g, 0.0), GridFunction(g, -1.0)});
  double Th = a_priori_horizon(1.0, H);
  CHECK(Th <= M_PI / 4.0);
  // y = tan(t + π/4) reaches 10 at atan(10) − π/4
  CHECK(Th == doctest::Approx(std::atan(10.0) - M_PI / 4.0));

  // cubic majorant goes through quadrature: y' = y³ from 1 to 10 takes ½(1 − 1/100)
  Reaction C(g, {GridFunction(g, 0.0), GridFunction(g, 0.0), GridFunction(g, 0.0), GridFunction(g, 1.0)});
  CHECK(a_priori_horizon(1.0, C) == doctest::Approx(0.495));
}

TEST_CASE("runs below the a-priori horizon never trip the guard") {
  std::mt19937_64 rng(8);
  Grid g(-20.0, 20.0, 401);
  for (double c : {-1.2, 0.0, 0.4}) {
    Potential phi = Potential::gaussian_quadratic(c);
    Reaction G = Reaction::flagship(g, phi);
    for (int k = 0; k < 3; ++k) {
      GridFunction u0 = testing::random_decaying(g, rng);
      double B = norms(u0).linf;
      double T = a_priori_horizon(B, G);
      REQUIRE(T > 0.0);
      EvolveOptions o;
      o.blowup_threshold = 10.0 * B;
      Trajectory tr = evolve(u0, 1e-3, std::min(T, 5.0) * 0.99, G, o);
      CHECK_FALSE(tr.blowup.has_value());
    }
  }
}

TEST_CASE("convergence study: first-order self-convergence") {
  Grid g;
  GridFunction u0 = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
  std::vector<double> hs;
  for (double h = 1e-2; h > 0.99e-4; h /= 2.0)
    hs.push_back(h);
  auto rows = convergence_study(u0, 0.1, hs, quadratic_only(g));
  REQUIRE(rows.size() == hs.size() - 1);
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    CHECK(rows[k].ratio >= 1.7);
    CHECK(rows[k].ratio <= 2.3);
    CHECK(rows[k + 1].distance < rows[k].distance);
  }
  CHECK(std::isnan(rows.back().ratio));
}

TEST_CASE("convergence study: fixed point and blow-up") {
  Grid g(-10.0, 10.0, 201);
  auto rows = convergence_study(GridFunction(g, 0.0), 0.1, {1e-2, 5e-3, 2.5e-3}, quadratic_only(g));
  for (const auto &r : rows)
    CHECK(r.distance == 0.0);
  CHECK_THROWS_AS(convergence_study(GridFunction(g, -1.0), 2.0, {1e-2, 5e-3}, quadratic_only(g)),
                  ConvergenceBlowup);
  CHECK_THROWS_AS(convergence_study(GridFunction(g, 0.0), 0.1, {1e-2, 2e-2}, quadratic_only(g)),
                  std::invalid_argument);
}

TEST_CASE("trajectory export") {
  Grid g(-1.0, 1.0, 5);
  Trajectory tr = evolve(GridFunction(g, 0.1), 0.1, 0.3, quadratic_only(g));
  const std::string csv = "imex_traj_test.csv", meta = "imex_traj_test.json";
  write_trajectory_csv(csv, tr);
  write_trajectory_meta(meta, tr, 0.3);
  std::ifstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x,value");
  std::size_t rows = 0;
  while (std::getline(is, line))
    ++rows;
  CHECK(rows == tr.size() * g.n);
  auto j = nlohmann::json::parse(std::ifstream(meta));
  CHECK(j["h"].get<double>() == 0.1);
  CHECK(j["t_end"].get<double>() == 0.3);
  CHECK(j["blowup"].is_null());
  std::remove(csv.c_str());
  std::remove(meta.c_str());
}
