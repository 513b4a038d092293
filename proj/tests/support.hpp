// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

namespace eternal::testing {

// Equilibria of the gaussian-quadratic family, sorted by f(0) and cached per c.
inline const std::vector<EquilibriumSolution> &equilibria_at(double c, const Grid &g = Grid()) {
  static std::map<std::tuple<double, double, double, std::size_t>, std::vector<EquilibriumSolution>> cache;
  auto key = std::make_tuple(c, g.x_min, g.x_max, g.n);
  auto it = cache.find(key);
  if (it != cache.end())
    return it->second;
  MatchOptions opt;
  opt.grid = g;
  auto sols = find_equilibria(Potential::gaussian_quadratic(c), opt).solutions;
  std::sort(sols.begin(), sols.end(), [](const auto &a, const auto &b) { return a.f0 < b.f0; });
  return cache.emplace(key, std::move(sols)).first->second;
}

// Random field with compact gaussian support well inside the grid.
inline GridFunction random_decaying(const Grid &g, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_real_distribution<double> W(0.2, 4.0);
  GridFunction f(g, 0.0);
  for (int bump = 0; bump < 4; ++bump) {
    double a = 3.0 * U(rng), x0 = 0.4 * g.x_max * U(rng), w = W(rng);
    for (std::size_t i = 0; i < g.n; ++i) {
      double y = (g.x(i) - x0) / w;
      f[i] += a * std::exp(-y * y);
    }
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    double y = g.x(i) / (0.5 * g.x_max);
    f[i] += 0.05 * U(rng) * std::exp(-y * y);
  }
  return f;
}

} // namespace eternal::testing
