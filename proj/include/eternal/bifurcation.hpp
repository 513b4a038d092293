// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "eternal/equilibrium.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>

namespace eternal {

struct BranchPoint {
  double c = 0.0;
  double f0 = 0.0;
  double fp0 = 0.0;
  int n_unstable = 0;
  double smallest_abs_eig = 0.0;
  // internal unknowns of the continuation system (tail seeds for the matching system)
  std::array<double, 2> u{0.0, 0.0};
  bool ambiguous = false;
};

enum class EventKind { fold, pitchfork, end };
std::string event_name(EventKind k);

struct BranchEvent {
  EventKind kind = EventKind::end;
  double c = 0.0;
  int branch_id = 0;
  bool verified = false;
  std::string note;
};

struct ExistenceEstimate {
  double c = 0.0;
  double x_left = 0.0;  // integration from x = 0 toward −∞ stays below the guard down to here
  double x_right = 0.0; // and up to here
};

struct Branch {
  int id = 0;
  std::vector<BranchPoint> points;
  std::vector<BranchEvent> events;
  bool terminated_by_failure = false;
  std::vector<ExistenceEstimate> existence; // last points before termination
};

// Square system F(c, u) = 0 with u ∈ R², observed through (f0, fp0).
class ContinuationSystem {
public:
  virtual ~ContinuationSystem() = default;
  struct Eval {
    std::array<double, 2> F;
    double f0, fp0;
  };
  virtual std::optional<Eval> eval(double c, const std::array<double, 2> &u) const = 0;
  // Newton at fixed c from a nearby guess
  virtual std::optional<std::array<double, 2>> solve(double c, std::array<double, 2> guess) const;
  // fills n_unstable / smallest_abs_eig
  virtual void annotate(BranchPoint &p) const = 0;
  virtual double existence_half_width(const BranchPoint &, bool right) const { return right ? 1e300 : -1e300; }
  // relative finite-difference step for each unknown
  virtual double fd_step(std::size_t i, const std::array<double, 2> &u) const;
};

// Equilibria of the GaussianQuadratic (or any parametric, decaying) family via tail matching.
class MatchingSystem : public ContinuationSystem {
public:
  MatchingSystem(const Potential &family, double x0 = 12.0, double step = 1e-3, Grid grid = Grid());
  std::optional<Eval> eval(double c, const std::array<double, 2> &u) const override;
  void annotate(BranchPoint &p) const override;
  double existence_half_width(const BranchPoint &p, bool right) const override;
  double fd_step(std::size_t i, const std::array<double, 2> &u) const override;
  const Matcher &matcher() const { return matcher_; }
  BranchPoint point_from(const EquilibriumSolution &s) const;
  EquilibriumSolution solution(const BranchPoint &p) const;

private:
  Matcher matcher_;
  Grid grid_;
};

// Spatially constant equilibria f ≡ f0 of the autonomous forcing φ ≡ P, swept in P.
class ConstantSystem : public ContinuationSystem {
public:
  std::optional<Eval> eval(double P, const std::array<double, 2> &u) const override;
  void annotate(BranchPoint &p) const override;
};

struct ContinuationOptions {
  double ds = 5e-3;
  double ds_min = 1e-6;
  double newton_tol = 1e-10;
  int newton_max = 8;
  std::size_t max_points = 20000;
  bool annotate = true;
  bool stop_on_symmetry = false; // stop once |fp0| < symmetry_tol or fp0 changes sign (merging arm)
  double symmetry_tol = 1e-4;
  bool detect = true;
};

// Pseudo-arclength continuation in (c, f0, fp0), weights (1,1,1). The branch leaves the
// window [min(c_from,c_to), max(c_from,c_to)] or ends when the corrector fails with ds < ds_min.
Branch continue_branch(const ContinuationSystem &sys, const BranchPoint &seed, double c_from, double c_to,
                       const ContinuationOptions &opt = {});

// fold: reversal of dc; pitchfork: n_unstable change at symmetric points without a fold,
// located by bisection and verified by asymmetric-seed refinement when sys is given; end:
// failure termination
std::vector<BranchEvent> detect_events(const Branch &b, const ContinuationSystem *sys = nullptr);

// Seeds for the GaussianQuadratic diagram.
enum class SeedBranch { upper, symmetric, fork_plus, fork_minus };
SeedBranch parse_seed_branch(const std::string &s);
std::optional<BranchPoint> seed_point(const MatchingSystem &sys, SeedBranch which, double c);

struct Diagram {
  std::vector<Branch> branches;
};

// Full diagram on [c_lo, c_hi]: upper branch through the fold onto the lower symmetric branch,
// the upper branch downward, and both fork arms.
Diagram bifurcation_diagram(const Potential &family, double c_lo, double c_hi,
                            const ContinuationOptions &opt = {});

void export_diagram(const std::string &points_csv, const std::string &events_csv,
                    const std::vector<Branch> &branches);
std::vector<Branch> import_diagram(const std::string &points_csv, const std::string &events_csv);

} // namespace eternal
