// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "eternal/dynamics.hpp"
#include "eternal/equilibrium.hpp"
#include "eternal/imex.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace eternal;
using eternal::testing::equilibria_at;

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid(1.0, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(Grid(0.0, 1.0, 2), std::invalid_argument);
  Grid g(-2.0, 2.0, 5);
  CHECK(g.dx() == 1.0);
  CHECK(g.x(0) == -2.0);
  CHECK(g.x(4) == 2.0);
  CHECK(g.nearest(0.4) == 2);
  CHECK(g.refined().n == 9);
  CHECK_THROWS_AS(GridFunction(g, std::vector<double>(4, 0.0)), std::invalid_argument);
}

TEST_CASE("norms examples") {
  Grid g(-3.0, 3.0, 61);
  Norms z = norms(GridFunction(g, 0.0));
  CHECK(z.l1 == 0.0);
  CHECK(z.l2 == 0.0);
  CHECK(z.linf == 0.0);

  Norms one = norms(GridFunction(Grid(0.0, 1.0, 101), 1.0));
  CHECK(one.l1 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.l2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(one.linf == 1.0);

  Grid wide(-20.0, 20.0, 4001);
  auto gauss = [](double x) { return std::exp(-x * x / 2.0); };
  double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(gauss, -20.0, 20.0, 15, 1e-14);
  Norms n = norms(GridFunction::sample(wide, gauss));
  CHECK(std::fabs(n.l1 - oracle) < 1e-6);
  CHECK(std::fabs(n.l1 - std::sqrt(2.0 * M_PI)) < 1e-6);
}

TEST_CASE("norms reject non-finite values") {
  GridFunction f(Grid(0.0, 1.0, 11), 0.0);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(norms(f), NonFiniteField);
  f[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH(norms(f), "non-finite field");
}

TEST_CASE("norms are absolutely homogeneous") {
  std::mt19937_64 rng(3);
  Grid g(-10.0, 10.0, 401);
  for (double a : {-7.5, -1.0, -1e-3, 0.0, 0.25, 3.0, 1e4}) {
    GridFunction f = testing::random_decaying(g, rng);
    Norms n = norms(f), m = norms(a * f);
    CHECK(std::fabs(m.l1 - std::fabs(a) * n.l1) <= 1e-12 * (1.0 + std::fabs(a) * n.l1));
    CHECK(std::fabs(m.l2 - std::fabs(a) * n.l2) <= 1e-12 * (1.0 + std::fabs(a) * n.l2));
    CHECK(std::fabs(m.linf - std::fabs(a) * n.linf) <= 1e-12 * (1.0 + std::fabs(a) * n.linf));
  }
}

TEST_CASE("diff2 examples") {
  Grid g(-1.0, 1.0, 21);
  GridFunction d = diff2(GridFunction::sample(g, [](double x) { return x * x; }));
  for (std::size_t i = 0; i < g.n; ++i)
    CHECK(std::fabs(d[i] - 2.0) < 1e-10);

  GridFunction c = diff2(GridFunction(g, 5.0));
  for (std::size_t i = 0; i < g.n; ++i)
    CHECK(std::fabs(c[i]) < 1e-10);

  Grid h(0.0, 5.0, 2001);
  GridFunction f = GridFunction::sample(h, [](double x) { return 6.0 / ((x + 10.0) * (x + 10.0)); });
  GridFunction r = diff2(f);
  for (std::size_t i = 0; i < h.n; ++i)
    CHECK(std::fabs(r[i] - f[i] * f[i]) < 1e-5);
}

TEST_CASE("diff2 annihilates affine functions") {
  for (auto [a, b] : {std::pair{0.0, 0.0}, {3.0, -2.0}, {-1e3, 7.0}, {0.5, 1e4}}) {
    Grid g(-4.0, 9.0, 131);
    GridFunction d = diff2(GridFunction::sample(g, [a = a, b = b](double x) { return a * x + b; }));
    for (std::size_t i = 0; i < g.n; ++i)
      CHECK(std::fabs(d[i]) < 1e-10 * (1.0 + std::fabs(a) + std::fabs(b)));
  }
}

TEST_CASE("action of the zero field vanishes") {
  Grid g;
  for (double c : {-1.2, 0.0, 0.4})
    CHECK(action(GridFunction(g, 0.0), Potential::gaussian_quadratic(c)).value == 0.0);
}

TEST_CASE("action flags non-decaying fields") {
  Grid g(-10.0, 10.0, 201);
  ActionValue a = action(GridFunction(g, 1.0), Potential::gaussian_quadratic(0.0));
  CHECK(a.non_decaying);
  CHECK(std::isfinite(a.value));
  CHECK_FALSE(action(GridFunction::sample(g, [](double x) { return std::exp(-x * x); }),
                     Potential::gaussian_quadratic(0.0))
                  .non_decaying);
}

TEST_CASE("action of the two equilibria at c = 0.4 against an independent quadrature") {
  const auto &eqs = equilibria_at(0.4);
  REQUIRE(eqs.size() == 2);
  Potential phi = Potential::gaussian_quadratic(0.4);
  double A[2];
  for (int k = 0; k < 2; ++k) {
    const GridFunction &f = eqs[k].profile;
    A[k] = action(f, phi).value;
    // oracle: Gauss–Kronrod on the linear interpolant with the slope taken from diff1
    GridFunction fp = diff1(f);
    auto integrand = [&](double x) {
      double v = f.at(x), d = fp.at(x);
      return 0.5 * d * d + v * v * v / 3.0 - v * phi(x);
    };
    double q = 0.0;
    for (double a = -30.0; a < 30.0 - 1e-9; a += 1.0)
      q += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, a + 1.0, 10, 1e-12);
    CHECK(std::fabs(A[k] - q) < 1e-4 * (1.0 + std::fabs(q)));
  }
  MESSAGE("A(f-) = " << A[0] << ", A(f+) = " << A[1]);
  CHECK(std::fabs(A[0] - A[1]) > 1e-2);
  // the stable equilibrium has the lower action
  CHECK(A[1] < A[0]);
}

TEST_CASE("action converges at second order under refinement") {
  Potential phi = Potential::gaussian_quadratic(0.0);
  auto f = [](double x) { return std::exp(-x * x / 3.0) * (1.0 + 0.3 * x); };
  Grid g(-20.0, 20.0, 401);
  double a1 = action(GridFunction::sample(g, f), phi).value;
  double a2 = action(GridFunction::sample(g.refined(), f), phi).value;
  double a3 = action(GridFunction::sample(g.refined().refined(), f), phi).value;
  double ratio = (a1 - a2) / (a2 - a3);
  CHECK(ratio > 3.5); // order ≥ 2 ⇒ ratio ≈ 4
  CHECK(std::fabs(a2 - a3) < 1e-3);
}

TEST_CASE("polynomial action reduces to the quadratic action") {
  Grid g(-15.0, 15.0, 601);
  Potential phi = Potential::gaussian_quadratic(-0.3);
  GridFunction f = GridFunction::sample(g, [](double x) { return 0.8 * std::exp(-x * x / 4.0); });
  std::vector<GridFunction> a{phi.sample(g), GridFunction(g, 0.0), GridFunction(g, -1.0)};
  CHECK(polynomial_action(f, a).value == doctest::Approx(action(f, phi).value).epsilon(1e-12));
}

TEST_CASE("energy of a trajectory frozen at an equilibrium is zero") {
  const auto &eqs = equilibria_at(0.4);
  REQUIRE(!eqs.empty());
  Trajectory t;
  t.h = 0.1;
  for (int k = 0; k < 5; ++k) {
    t.times.push_back(0.1 * k);
    t.snapshots.push_back(eqs[1].profile);
  }
  CHECK(energy(t, Potential::gaussian_quadratic(0.4)) < 1e-12);
}

TEST_CASE("energy errors") {
  Grid g(-5.0, 5.0, 51);
  Trajectory t;
  t.times = {0.0, 0.1};
  t.snapshots = {GridFunction(g, 0.0), GridFunction(g, 0.0)};
  t.blowup = Blowup{0.1, 1e7};
  CHECK_THROWS_WITH(energy(t, Potential::constant(0.0)), "energy undefined after blow-up");
  t.blowup.reset();
  t.times.resize(1);
  t.snapshots.resize(1);
  CHECK_THROWS_AS(energy(t, Potential::constant(0.0)), std::invalid_argument);
}

TEST_CASE("energy is nonnegative on arbitrary trajectories") {
  std::mt19937_64 rng(17);
  Grid g(-10.0, 10.0, 201);
  for (int k = 0; k < 10; ++k) {
    Trajectory t;
    for (int s = 0; s < 4; ++s) {
      t.times.push_back(0.05 * s);
      t.snapshots.push_back(testing::random_decaying(g, rng));
    }
    CHECK(energy(t, Potential::gaussian_quadratic(0.2)) >= 0.0);
  }
}

TEST_CASE("energy of the heterocline matches the action drop and is refinement stable") {
  const auto &eqs = equilibria_at(0.4);
  REQUIRE(eqs.size() == 2);
  Potential phi = Potential::gaussian_quadratic(0.4);
  EvolveOptions o;
  o.target_snapshots = 3000;
  // a start close to f− so the run covers the whole action drop
  Heteroclinic het = construct_heteroclinic(eqs[0].profile, eqs[1].profile, phi, 1e-3, 1e-2, 300.0, o);
  double dA = action(eqs[0].profile, phi).value - action(eqs[1].profile, phi).value;
  double E = energy(het.traj, phi);
  CHECK(std::fabs(E - dA) <= 0.02 * std::fabs(dA));

  Heteroclinic half = construct_heteroclinic(eqs[0].profile, eqs[1].profile, phi, 1e-3, 5e-3, 300.0, o);
  double E2 = energy(half.traj, phi);
  CHECK(std::fabs(E2 - E) < 0.01 * E);
}

TEST_CASE("energy converges at first order or better in the snapshot spacing") {
  Grid g(-20.0, 20.0, 401);
  Potential phi = Potential::constant(0.0);
  Reaction G = Reaction::flagship(g, phi);
  GridFunction u0 = GridFunction::sample(g, [](double x) { return 0.5 * std::exp(-x * x); });
  double E[3];
  for (int k = 0; k < 3; ++k) {
    EvolveOptions o;
    o.stride = 1;
    E[k] = energy(evolve(u0, 0.01 / std::pow(2.0, k), 1.0, G, o), phi);
  }
  double ratio = (E[0] - E[1]) / (E[1] - E[2]);
  CHECK(ratio > 1.7);
}

TEST_CASE("grid function csv round trip") {
  Grid g(-1.0, 2.0, 7);
  GridFunction f = GridFunction::sample(g, [](double x) { return std::sin(x) / 3.0; });
  std::stringstream ss;
  write_csv(ss, f);
  std::string first;
  std::getline(ss, first);
  CHECK(first == "x,value");
  ss.seekg(0);
  GridFunction r = read_csv(ss);
  CHECK(r.grid().n == g.n);
  for (std::size_t i = 0; i < g.n; ++i)
    CHECK(r[i] == f[i]);
}

TEST_CASE("potential families") {
  CHECK(Potential::gaussian_quadratic(0.3)(1.5) == doctest::Approx((2.25 - 0.3) * std::exp(-1.125)));
  CHECK(Potential::gaussian(2.0)(1.0) == doctest::Approx(2.0 * std::exp(-0.5)));
  CHECK(Potential::constant(4.0)(123.0) == 4.0);
  Grid g(-5.0, 5.0, 11);
  GridFunction tab = GridFunction::sample(g, [](double x) { return 1.0 + std::exp(-x * x); });
  Potential p = Potential::tabulated(tab, 1.0, 1e-6);
  CHECK(p(0.0) == doctest::Approx(2.0));
  CHECK(p(100.0) == 1.0);
  CHECK(p.limit() == 1.0);
  CHECK_THROWS_AS(Potential::tabulated(tab, 0.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(parse_family("cubic"), std::invalid_argument);
}
