// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "eternal/dynamics.hpp"
#include "eternal/spectrum.hpp"
#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

using namespace eternal;
using eternal::testing::equilibria_at;

namespace {

SchrodingerOp poschl_teller(std::size_t n = 2001, double L = 20.0) {
  Grid g(-L, L, n);
  return SchrodingerOp(GridFunction::sample(g, [](double x) { return -2.0 / std::pow(std::cosh(x), 2); }));
}

// dense copy of the interior matrix of d²/dx² − W
Eigen::VectorXd dense_eigenvalues(const SchrodingerOp &op) {
  const std::size_t m = op.dim();
  const double inv = 1.0 / (op.grid.dx() * op.grid.dx());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    A(i, i) = -2.0 * inv - op.W[i + 1];
    if (i + 1 < m)
      A(i, i + 1) = A(i + 1, i) = inv;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse(); // decreasing
}

} // namespace

TEST_CASE("Poschl-Teller well: top eigenvalue 1 with eigenfunction sech") {
  SchrodingerOp op = poschl_teller();
  SpectrumReport r = eigs_above_edge(op);
  REQUIRE(!r.eigenvalues.empty());
  CHECK(std::fabs(r.eigenvalues[0] - 1.0) < 1e-3);
  CHECK(r.n_positive == 1);
  GridFunction s = GridFunction::sample(op.grid, [](double x) { return 1.0 / std::cosh(x); });
  s *= 1.0 / norms(s).l2;
  const GridFunction &v = r.eigenfunctions[0];
  double sign = v[op.grid.nearest(0.0)] > 0.0 ? 1.0 : -1.0;
  CHECK(sup_distance(sign * v, s) < 1e-3);
  CHECK(norms(v).l2 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("constant potential has no discrete eigenvalues above its edge") {
  Grid g(-20.0, 20.0, 801);
  SchrodingerOp op(GridFunction(g, 6.0), 6.0);
  CHECK(op.essential_edge == -6.0);
  SpectrumReport r = eigs_above_edge(op);
  CHECK(r.n_positive == 0);
  for (std::size_t j = 0; j < r.eigenvalues.size(); ++j)
    CHECK(r.edge_ambiguous[j]);
}

TEST_CASE("Sturm bisection agrees with a dense eigensolver on small grids") {
  std::mt19937_64 rng(99);
  for (std::size_t n : {20u, 57u, 120u, 200u}) {
    Grid g(-8.0, 8.0, n);
    GridFunction W = testing::random_decaying(g, rng);
    W[0] = W[n - 1] = 0.0;
    SchrodingerOp op(W, 0.0, 1.0);
    Eigen::VectorXd ref = dense_eigenvalues(op);
    for (std::size_t k = 0; k < op.dim(); ++k)
      CHECK(std::fabs(op.eigenvalue_from_top(k) - ref(k)) < 1e-8 * std::max(1.0, std::fabs(ref(k))));
    // count_above is exact away from eigenvalues
    for (std::size_t k = 0; k + 1 < op.dim(); ++k)
      CHECK(op.count_above(0.5 * (ref(k) + ref(k + 1))) == k + 1);
  }
}

TEST_CASE("report invariants: decreasing, residuals, oscillation counts") {
  for (double c : {-1.2, 0.0, 0.06, 0.4}) {
    for (const auto &e : equilibria_at(c)) {
      SpectrumReport r = unstable_spectrum(e.profile);
      CHECK(r.oscillation_ok);
      CHECK(r.truncation_stable);
      for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) {
        if (j > 0)
          CHECK(r.eigenvalues[j] < r.eigenvalues[j - 1]);
        CHECK(r.residuals[j] <= 1e-8);
        CHECK(r.sign_changes[j] == static_cast<int>(j));
        CHECK(count_sign_changes(r.eigenfunctions[j]) == static_cast<int>(j));
        CHECK(norms(r.eigenfunctions[j]).l2 == doctest::Approx(1.0).epsilon(1e-10));
      }
      int positive = 0;
      for (std::size_t j = 0; j < r.eigenvalues.size(); ++j)
        positive += r.eigenvalues[j] > 0.0 && !r.edge_ambiguous[j];
      CHECK(r.n_positive == positive);
    }
  }
}

TEST_CASE("eigenvalues are monotone under domain enlargement") {
  const auto &e = equilibria_at(0.0).front();
  SchrodingerOp op = SchrodingerOp::linearization(e.profile);
  SchrodingerOp big = op.enlarged(1.5);
  CHECK(big.grid.dx() == doctest::Approx(op.grid.dx()));
  for (std::size_t k = 0; k < 2; ++k) {
    double a = op.eigenvalue_from_top(k), b = big.eigenvalue_from_top(k);
    CHECK(b >= a - 1e-6);
    CHECK(std::fabs(b - a) < 1e-3);
  }
}

TEST_CASE("potential shift moves the spectrum rigidly") {
  const auto &e = equilibria_at(0.0).front();
  SchrodingerOp op = SchrodingerOp::linearization(e.profile);
  for (double s : {-0.75, 0.3, 2.0}) {
    GridFunction W = op.W;
    for (auto &w : W.values())
      w += s;
    SchrodingerOp shifted(W, s);
    for (std::size_t k = 0; k < 4; ++k)
      // bisection resolves to rounding of the diagonal, about ulp(4/dx²)
      CHECK(std::fabs(shifted.eigenvalue_from_top(k) - (op.eigenvalue_from_top(k) - s)) < 1e-10);
  }
}

TEST_CASE("count_positive examples") {
  const auto &single = equilibria_at(-1.2);
  REQUIRE(single.size() == 1);
  PositiveCount p = count_positive(single[0].profile);
  CHECK(p.count == 0);
  CHECK_FALSE(p.ambiguous);

  const auto &zero = equilibria_at(0.0);
  REQUIRE(zero.size() == 2);
  CHECK(count_positive(zero[0].profile).count == 2);
  CHECK(count_positive(zero[1].profile).count == 0);
  SpectrumReport r = unstable_spectrum(zero[0].profile);
  REQUIRE(r.eigenvalues.size() >= 2);
  // a pair of simple eigenvalues
  CHECK(r.eigenvalues[0] - r.eigenvalues[1] > 0.1);
  CHECK(r.eigenvalues[1] > 1e-3);
}

TEST_CASE("count_positive is invariant under grid refinement") {
  Grid g;
  for (double c : {-1.2, 0.0, 0.06, 0.4}) {
    const auto &coarse = equilibria_at(c, g);
    const auto &fine = equilibria_at(c, g.refined());
    REQUIRE(coarse.size() == fine.size());
    for (std::size_t k = 0; k < coarse.size(); ++k)
      CHECK(count_positive(coarse[k].profile).count == count_positive(fine[k].profile).count);
  }
}

TEST_CASE("connecting dimension") {
  const auto &zero = equilibria_at(0.0);
  REQUIRE(zero.size() == 2);
  ConnectingDimension d = connecting_dimension(zero[0].profile, zero[1].profile);
  CHECK(d.dim == 2);
  CHECK_FALSE(d.ambiguous);
  CHECK(connecting_dimension(zero[1].profile, zero[0].profile).dim == -2);
  for (const auto &e : zero)
    CHECK(connecting_dimension(e.profile, e.profile).dim == 0);

  const auto &four = equilibria_at(0.06);
  REQUIRE(four.size() >= 3);
  for (const auto &a : four)
    for (const auto &b : four)
      for (const auto &c : four)
        CHECK(connecting_dimension(a.profile, c.profile).dim ==
              connecting_dimension(a.profile, b.profile).dim + connecting_dimension(b.profile, c.profile).dim);
}

TEST_CASE("spectrum along a frozen orbit is constant") {
  const auto &e = equilibria_at(0.0).front();
  Trajectory t;
  for (int k = 0; k < 4; ++k) {
    t.times.push_back(k);
    t.snapshots.push_back(e.profile);
  }
  OrbitSpectrum s = spectrum_along_orbit(t, 3, 1);
  REQUIRE(s.lambdas.size() == 4);
  for (const auto &l : s.lambdas)
    for (std::size_t q = 0; q < 3; ++q)
      CHECK(l[q] == s.lambdas[0][q]);
  CHECK(s.min_gap > 0.0);
  CHECK(s.min_gap_all > 0.0);
  t.blowup = Blowup{3.0, 1e7};
  CHECK_THROWS_AS(spectrum_along_orbit(t, 3, 1), std::invalid_argument);
}

TEST_CASE("spectrum along the heterocline from the doubly unstable equilibrium at c = 0") {
  const auto &zero = equilibria_at(0.0);
  REQUIRE(zero.size() == 2);
  Potential phi = Potential::gaussian_quadratic(0.0);
  // small amplitude so the start still carries both unstable directions
  Trajectory t = evolve_perturbed(zero[0].profile, 1e-2, Direction::eigenmix(1.0), phi, 1e-2, 200.0);
  REQUIRE_FALSE(t.blowup.has_value());
  OrbitSpectrum s = spectrum_along_orbit(t, 4, 5);
  CHECK(s.n_positive.front() == 2);
  CHECK(s.n_positive.back() == 0);
  for (std::size_t j = 1; j < s.n_positive.size(); ++j)
    CHECK(s.n_positive[j] <= s.n_positive[j - 1]);
  CHECK(s.min_gap > 0.1);
  MESSAGE("discrete gap " << s.min_gap << ", continuum pairs down to " << s.min_gap_all);
}

TEST_CASE("spectrum csv outputs") {
  SpectrumReport r = eigs_above_edge(poschl_teller(401));
  write_spectrum_csv("spec_test.csv", r);
  std::ifstream is("spec_test.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "index,eigenvalue");

  const auto &e = equilibria_at(0.0).front();
  Trajectory t;
  t.times = {0.0, 1.0};
  t.snapshots = {e.profile, e.profile};
  write_orbit_spectrum_csv("orbit_test.csv", spectrum_along_orbit(t, 2, 1));
  std::ifstream os("orbit_test.csv");
  std::getline(os, header);
  CHECK(header == "t,lambda_1,lambda_2,min_gap");
  std::remove("spec_test.csv");
  std::remove("orbit_test.csv");
}

TEST_CASE("operator construction checks") {
  Grid g(-5.0, 5.0, 51);
  CHECK_THROWS_AS(SchrodingerOp(GridFunction(g, 1.0), 0.0), std::invalid_argument);
  GridFunction bad(g, 0.0);
  bad[10] = std::nan("");
  CHECK_THROWS_AS(SchrodingerOp(bad, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SchrodingerOp(GridFunction(g, 0.0)).eigenvalue_from_top(49), std::out_of_range);
}
