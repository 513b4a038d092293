// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/grid.hpp"

#include <optional>

namespace eternal {

struct Blowup {
  double t_star = 0.0;
  double norm_at_stop = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  double h = 0.0;
  std::optional<Blowup> blowup;

  std::size_t size() const { return times.size(); }
  const GridFunction &back() const { return snapshots.back(); }
  // piecewise linear in t, clamped to [times.front(), times.back()]
  GridFunction at(double t) const;
  Trajectory reversed() const;
};

} // namespace eternal
