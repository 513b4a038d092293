// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "eternal/bifurcation.hpp"
#include "eternal/dynamics.hpp"
#include "eternal/equilibrium.hpp"
#include "eternal/parallel.hpp"
#include "eternal/spectrum.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace eternal::cli {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

bool one_of(const std::string &s, std::initializer_list<const char *> xs) {
  return std::any_of(xs.begin(), xs.end(), [&](const char *x) { return s == x; });
}

std::string stem(const std::string &out) {
  auto slash = out.find_last_of('/');
  auto dot = out.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return out;
  return out.substr(0, dot);
}

} // namespace

bool parse_range(const std::string &s, double &lo, double &hi) {
  auto colon = s.find(':');
  if (colon == std::string::npos)
    return false;
  try {
    std::size_t a = 0, b = 0;
    std::string l = s.substr(0, colon), r = s.substr(colon + 1);
    lo = std::stod(l, &a);
    hi = std::stod(r, &b);
    if (a != l.size() || b != r.size())
      return false;
  } catch (const std::exception &) {
    return false;
  }
  return std::isfinite(lo) && std::isfinite(hi) && lo < hi;
}

std::vector<Violation> validate(const RunConfig &c) {
  std::vector<Violation> v;
  auto need = [&](bool ok, const std::string &field, const std::string &value, const std::string &rule) {
    if (!ok)
      v.push_back({field, value, rule});
  };
  need(one_of(c.command, {"evolve", "equilibria", "bifurcate", "spectrum", "heteroclinic", "frontier", "blowup"}),
       "command", c.command, "a known subcommand");
  need(c.grid.n >= 3, "grid.n", std::to_string(c.grid.n), "grid.n ≥ 3");
  need(std::isfinite(c.grid.x_min) && std::isfinite(c.grid.x_max) && c.grid.x_min < c.grid.x_max, "grid.x_min",
       num(c.grid.x_min), "grid.x_min < grid.x_max");
  need(one_of(c.phi.family, {"gauss-quad", "gauss", "constant", "tabulated"}), "phi.family", c.phi.family,
       "one of gauss-quad, gauss, constant, tabulated");
  need(std::isfinite(c.phi.c), "phi.c", num(c.phi.c), "phi.c finite");
  need(std::isfinite(c.phi.P), "phi.P", num(c.phi.P), "phi.P finite");
  need(c.phi.family != "tabulated" || !c.phi.file.empty(), "phi.file", c.phi.file, "phi.file set for tabulated");
  need(c.time.h > 0.0, "time.h", num(c.time.h), "time.h > 0");
  need(c.time.t_end > 0.0, "time.t_end", num(c.time.t_end), "time.t_end > 0");
  need(c.time.blowup_threshold > 0.0, "time.blowup_threshold", num(c.time.blowup_threshold),
       "time.blowup_threshold > 0");
  need(c.solver.x0 > 0.0, "solver.x0", num(c.solver.x0), "solver.x0 > 0");
  need(c.solver.step > 0.0, "solver.step", num(c.solver.step), "solver.step > 0");
  need(c.solver.newton_tol > 0.0, "solver.newton_tol", num(c.solver.newton_tol), "solver.newton_tol > 0");
  need(c.solver.fate_tol > 0.0, "solver.fate_tol", num(c.solver.fate_tol), "solver.fate_tol > 0");
  double lo, hi;
  need(parse_range(c.c_range, lo, hi), "bifurcate.c_range", c.c_range, "lo:hi with lo < hi");
  need(c.ds > 0.0, "bifurcate.ds", num(c.ds), "bifurcate.ds > 0");
  need(one_of(c.seed_branch, {"all", "upper", "symmetric", "fork+", "fork-"}), "bifurcate.seed_branch",
       c.seed_branch, "one of all, upper, symmetric, fork+, fork-");
  need(c.eps > 0.0 && c.eps < 1.0, "heteroclinic.eps", num(c.eps), "0 < heteroclinic.eps < 1");
  need(one_of(c.direction, {"gaussian", "eigenmix"}), "frontier.direction", c.direction, "gaussian or eigenmix");
  need(c.width > 0.0, "frontier.width", num(c.width), "frontier.width > 0");
  need(c.lo != c.hi, "frontier.lo", num(c.lo), "frontier.lo ≠ frontier.hi");
  need(c.tol > 0.0, "frontier.tol", num(c.tol), "frontier.tol > 0");
  need(c.horizon > 0.0, "frontier.horizon", num(c.horizon), "frontier.horizon > 0");
  need(one_of(c.fence_f, {"zero", "equilibrium"}), "blowup.f", c.fence_f, "zero or equilibrium");
  need(one_of(c.fence_h, {"constant", "gaussian", "shifted"}), "blowup.h", c.fence_h,
       "constant, gaussian or shifted");
  need(c.fence_eps > 0.0, "blowup.eps", num(c.fence_eps), "blowup.eps > 0");
  need(c.fence_T > 0.0, "blowup.T", num(c.fence_T), "blowup.T > 0");
  need(c.fence_beta > 0.0, "blowup.beta", num(c.fence_beta), "blowup.beta > 0");
  need(c.threads >= 0, "run.threads", std::to_string(c.threads), "run.threads ≥ 0");
  need(!c.out.empty(), "run.out", c.out, "run.out non-empty");
  return v;
}

namespace {

// key → setter from string
using Setter = std::function<void(RunConfig &, const std::string &)>;

double to_d(const std::string &key, const std::string &s) {
  try {
    std::size_t k = 0;
    double v = std::stod(s, &k);
    if (k != s.size())
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': not a number: '" + s + "'");
  }
}

long to_l(const std::string &key, const std::string &s) {
  try {
    std::size_t k = 0;
    long v = std::stol(s, &k);
    if (k != s.size())
      throw std::invalid_argument(s);
    return v;
  } catch (const std::exception &) {
    throw ConfigError("config key '" + key + "': not an integer: '" + s + "'");
  }
}

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> m = [] {
    std::map<std::string, Setter> s;
#define D(key, field) s[key] = [](RunConfig &c, const std::string &v) { c.field = to_d(key, v); }
#define S(key, field) s[key] = [](RunConfig &c, const std::string &v) { c.field = v; }
    D("grid.x_min", grid.x_min);
    D("grid.x_max", grid.x_max);
    s["grid.n"] = [](RunConfig &c, const std::string &v) {
      long n = to_l("grid.n", v);
      c.grid.n = n < 0 ? 0 : static_cast<std::size_t>(n);
    };
    S("phi.family", phi.family);
    D("phi.c", phi.c);
    D("phi.P", phi.P);
    S("phi.file", phi.file);
    D("time.h", time.h);
    D("time.t_end", time.t_end);
    D("time.blowup_threshold", time.blowup_threshold);
    D("solver.x0", solver.x0);
    D("solver.step", solver.step);
    D("solver.newton_tol", solver.newton_tol);
    D("solver.fate_tol", solver.fate_tol);
    D("evolve.u0", u0);
    S("evolve.u0_file", u0_file);
    S("bifurcate.c_range", c_range);
    D("bifurcate.ds", ds);
    S("bifurcate.seed_branch", seed_branch);
    s["spectrum.index"] = [](RunConfig &c, const std::string &v) { c.index = static_cast<int>(to_l("spectrum.index", v)); };
    D("heteroclinic.eps", eps);
    S("frontier.direction", direction);
    D("frontier.width", width);
    D("frontier.A", amplitude);
    D("frontier.lo", lo);
    D("frontier.hi", hi);
    D("frontier.tol", tol);
    D("frontier.horizon", horizon);
    S("blowup.f", fence_f);
    S("blowup.h", fence_h);
    D("blowup.eps", fence_eps);
    D("blowup.x0", fence_x0);
    D("blowup.T", fence_T);
    D("blowup.beta", fence_beta);
    s["run.threads"] = [](RunConfig &c, const std::string &v) { c.threads = static_cast<int>(to_l("run.threads", v)); };
    S("run.out", out);
    S("run.command", command);
#undef D
#undef S
    return s;
  }();
  return m;
}

} // namespace

void load_config_file(const std::string &path, RunConfig &cfg) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error &e) {
    throw ConfigError("config file '" + path + "': " + e.message());
  }
  for (const auto &sec : pt) {
    if (sec.second.empty())
      throw ConfigError("config key '" + sec.first + "': keys must live in a section");
    for (const auto &kv : sec.second) {
      std::string key = sec.first + "." + kv.first;
      auto it = setters().find(key);
      if (it == setters().end())
        throw ConfigError("unknown config key '" + key + "'");
      it->second(cfg, kv.second.data());
    }
  }
}

nlohmann::json to_json(const RunConfig &c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"n", c.grid.n}};
  j["phi"] = {{"family", c.phi.family}, {"c", c.phi.c}, {"P", c.phi.P}, {"file", c.phi.file}};
  j["time"] = {{"h", c.time.h}, {"t_end", c.time.t_end}, {"blowup_threshold", c.time.blowup_threshold}};
  j["solver"] = {{"x0", c.solver.x0},
                 {"step", c.solver.step},
                 {"newton_tol", c.solver.newton_tol},
                 {"fate_tol", c.solver.fate_tol}};
  j["evolve"] = {{"u0", c.u0}, {"u0_file", c.u0_file}};
  j["bifurcate"] = {{"c_range", c.c_range}, {"ds", c.ds}, {"seed_branch", c.seed_branch}};
  j["spectrum"] = {{"index", c.index}};
  j["heteroclinic"] = {{"eps", c.eps}};
  j["frontier"] = {{"direction", c.direction}, {"width", c.width}, {"A", c.amplitude}, {"lo", c.lo},
                   {"hi", c.hi},  {"tol", c.tol},     {"horizon", c.horizon}};
  j["blowup"] = {{"f", c.fence_f},     {"h", c.fence_h}, {"eps", c.fence_eps},
                 {"x0", c.fence_x0},   {"T", c.fence_T}, {"beta", c.fence_beta}};
  j["run"] = {{"threads", c.threads}, {"out", c.out}, {"config_file", c.config_file}};
  return j;
}

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  const RunConfig &cfg;
  Grid grid;
  nlohmann::json result = nlohmann::json::object();
  std::vector<std::string> outputs;

  explicit Context(const RunConfig &c) : cfg(c), grid(c.grid.x_min, c.grid.x_max, c.grid.n) {}

  Potential phi() const {
    Family f = parse_family(cfg.phi.family);
    switch (f) {
    case Family::GaussianQuadratic:
      return Potential::gaussian_quadratic(cfg.phi.c);
    case Family::Gaussian:
      return Potential::gaussian(cfg.phi.c);
    case Family::Constant:
      return Potential::constant(cfg.phi.P);
    case Family::Tabulated:
      return Potential::tabulated(read_csv(cfg.phi.file), 0.0, 1e-3);
    }
    throw std::logic_error("family");
  }

  MatchOptions match() const {
    MatchOptions m;
    m.x0 = cfg.solver.x0;
    m.step = cfg.solver.step;
    m.grid = grid;
    return m;
  }

  std::vector<EquilibriumSolution> equilibria(const Potential &p) {
    EquilibriumSearch s = find_equilibria(p, match());
    result["n_equilibria"] = s.solutions.size();
    if (s.solutions.empty())
      throw Failure(s.reason.empty() ? std::string("0 equilibria") : s.reason);
    return s.solutions;
  }

  std::string path(const std::string &suffix) {
    std::string p = stem(cfg.out) + suffix;
    outputs.push_back(p);
    return p;
  }
  std::string main_out() {
    outputs.push_back(cfg.out);
    return cfg.out;
  }
};

void cmd_evolve(Context &cx) {
  Potential phi = cx.phi();
  GridFunction u0 = cx.cfg.u0_file.empty() ? GridFunction(cx.grid, cx.cfg.u0) : read_csv(cx.cfg.u0_file);
  EvolveOptions eo;
  eo.blowup_threshold = cx.cfg.time.blowup_threshold;
  Trajectory tr = evolve(u0, cx.cfg.time.h, cx.cfg.time.t_end, Reaction::flagship(u0.grid(), phi), eo);
  write_trajectory_csv(cx.main_out(), tr);
  write_trajectory_meta(cx.path("_meta.json"), tr, cx.cfg.time.t_end);
  cx.result["snapshots"] = tr.size();
  cx.result["blowup"] = tr.blowup ? nlohmann::json{{"t_star", tr.blowup->t_star}} : nlohmann::json(nullptr);
}

void cmd_equilibria(Context &cx) {
  Potential phi = cx.phi();
  EquilibriumSearch s = find_equilibria(phi, cx.match());
  if (s.z_plus.points.size())
    write_zcurve_csv(cx.path("_zplus.csv"), s.z_plus);
  if (s.z_minus.points.size())
    write_zcurve_csv(cx.path("_zminus.csv"), s.z_minus);
  cx.result["n_equilibria"] = s.solutions.size();
  cx.result["condition"] = {{"passes", s.condition.passes}, {"integral", s.condition.integral}};
  if (s.solutions.empty())
    throw Failure(s.reason.empty() ? std::string("0 equilibria") : s.reason);
  std::ofstream os(cx.main_out());
  os << "index,f0,fp0,residual,n_unstable\n" << std::setprecision(17);
  for (std::size_t k = 0; k < s.solutions.size(); ++k) {
    const auto &e = s.solutions[k];
    int n = count_positive(e.profile).count;
    os << k << ',' << e.f0 << ',' << e.fp0 << ',' << e.residual << ',' << n << '\n';
    write_csv(cx.path("_" + std::to_string(k) + ".csv"), e.profile);
    write_equilibrium_json(cx.path("_" + std::to_string(k) + ".json"), e);
  }
}

void cmd_bifurcate(Context &cx) {
  double lo, hi;
  parse_range(cx.cfg.c_range, lo, hi);
  Potential phi = cx.phi();
  if (phi.family() != Family::GaussianQuadratic)
    throw Failure("bifurcate supports the gauss-quad family");
  ContinuationOptions opt;
  opt.ds = cx.cfg.ds;
  opt.newton_tol = cx.cfg.solver.newton_tol;
  std::vector<Branch> branches;
  if (cx.cfg.seed_branch == "all") {
    branches = bifurcation_diagram(phi, lo, hi, opt).branches;
  } else {
    MatchingSystem sys(phi, cx.cfg.solver.x0, cx.cfg.solver.step, cx.grid);
    SeedBranch which = parse_seed_branch(cx.cfg.seed_branch);
    double c = std::clamp(cx.cfg.phi.c, lo, hi);
    auto seed = seed_point(sys, which, c);
    if (!seed)
      throw Failure("no " + cx.cfg.seed_branch + " equilibrium at c = " + num(c));
    Branch up = continue_branch(sys, *seed, lo, hi, opt);
    Branch down = continue_branch(sys, *seed, hi, lo, opt);
    up.id = 0;
    down.id = 1;
    for (auto &e : up.events)
      e.branch_id = 0;
    for (auto &e : down.events)
      e.branch_id = 1;
    branches = {up, down};
  }
  export_diagram(cx.main_out(), cx.path("_events.csv"), branches);
  nlohmann::json ev = nlohmann::json::array();
  for (const auto &b : branches)
    for (const auto &e : b.events)
      ev.push_back({{"kind", event_name(e.kind)}, {"c", e.c}, {"branch", b.id}, {"verified", e.verified}});
  cx.result["events"] = ev;
  cx.result["branches"] = branches.size();
}

std::size_t pick(const std::vector<EquilibriumSolution> &s, int index, bool highest) {
  if (index >= 0) {
    if (static_cast<std::size_t>(index) >= s.size())
      throw Failure("equilibrium index " + std::to_string(index) + " out of range (" + std::to_string(s.size()) +
                    " equilibria)");
    return static_cast<std::size_t>(index);
  }
  return highest ? s.size() - 1 : 0;
}

void cmd_spectrum(Context &cx) {
  Potential phi = cx.phi();
  auto eqs = cx.equilibria(phi);
  std::size_t k = pick(eqs, cx.cfg.index, false);
  SpectrumReport r = unstable_spectrum(eqs[k].profile, true);
  write_spectrum_csv(cx.main_out(), r);
  for (std::size_t j = 0; j < r.eigenfunctions.size(); ++j)
    write_csv(cx.path("_eigfun_" + std::to_string(j) + ".csv"), r.eigenfunctions[j]);
  cx.result["equilibrium"] = k;
  cx.result["n_positive"] = r.n_positive;
  cx.result["ambiguous"] = r.ambiguous;
  cx.result["truncation_stable"] = r.truncation_stable;
  cx.result["oscillation_ok"] = r.oscillation_ok;
}

void cmd_heteroclinic(Context &cx) {
  Potential phi = cx.phi();
  auto eqs = cx.equilibria(phi);
  if (eqs.size() < 2)
    throw Failure("heteroclinic needs two ordered equilibria");
  const GridFunction &fm = eqs.front().profile, &fp = eqs.back().profile;
  EvolveOptions eo;
  eo.blowup_threshold = cx.cfg.time.blowup_threshold;
  eo.target_snapshots = 2000;
  Heteroclinic H = construct_heteroclinic(fm, fp, phi, cx.cfg.eps, cx.cfg.time.h, cx.cfg.time.t_end, eo);
  VariationalCheck v = verify_variational(H.traj, phi);
  write_trajectory_csv(cx.main_out(), H.traj);
  OrbitSpectrum os = spectrum_along_orbit(H.traj, 3, 20);
  write_orbit_spectrum_csv(cx.path("_spectrum.csv"), os);
  GridFunction target = boundary_consistent(fp, H.traj.snapshots[0][0], H.traj.snapshots[0][fp.size() - 1], phi);
  cx.result["shift"] = H.shift;
  cx.result["max_breach"] = H.max_breach;
  cx.result["monotone"] = v.monotone;
  cx.result["energy"] = v.energy;
  cx.result["action_drop"] = v.action_drop;
  cx.result["energy_vs_action_gap"] = v.energy_vs_action_gap;
  cx.result["sup_dist_to_f_plus"] = sup_distance(H.traj.back(), fp);
  cx.result["sup_dist_to_truncated_f_plus"] = sup_distance(H.traj.back(), target);
}

void cmd_frontier(Context &cx) {
  Potential phi = cx.phi();
  auto eqs = cx.equilibria(phi);
  bool eigen = cx.cfg.direction == "eigenmix";
  std::size_t k = pick(eqs, cx.cfg.index, !eigen);
  FrontierOptions o;
  o.h = cx.cfg.time.h;
  o.fate_tol = cx.cfg.solver.fate_tol;
  o.evolve.blowup_threshold = cx.cfg.time.blowup_threshold;
  o.vary = eigen ? FrontierOptions::Vary::angle : FrontierOptions::Vary::amplitude;
  o.amplitude = cx.cfg.amplitude;
  for (const auto &e : eqs)
    o.equilibria.push_back(e.profile);
  Direction d = eigen ? Direction::eigenmix(0.0) : Direction::gaussian(cx.cfg.width);
  FrontierResult r;
  try {
    r = frontier_search(eqs[k].profile, d, cx.cfg.lo, cx.cfg.hi, cx.cfg.tol, phi, cx.cfg.horizon, o);
  } catch (const NoBracket &e) {
    throw Failure(e.what());
  }
  nlohmann::json j{{"value", r.value},
                   {"lo", r.lo},
                   {"hi", r.hi},
                   {"fate_lo", verdict_name(r.fate_lo.verdict)},
                   {"fate_hi", verdict_name(r.fate_hi.verdict)},
                   {"undecided", r.undecided},
                   {"horizon", r.horizon},
                   {"iterations", r.iterations},
                   {"equilibrium", k}};
  std::ofstream(cx.main_out()) << std::setw(2) << j << '\n';
  cx.result = j;
}

void cmd_blowup(Context &cx) {
  Grid g = cx.grid;
  GridFunction f(g, 0.0);
  if (cx.cfg.fence_f == "equilibrium") {
    Potential phi = cx.phi();
    auto eqs = cx.equilibria(phi);
    f = eqs.back().profile;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] < 0.0)
        throw Failure("equilibrium is not nonnegative");
  }
  GridFunction h(g, 0.0);
  double x0 = cx.cfg.fence_x0;
  if (cx.cfg.fence_h == "constant") {
    h = GridFunction(g, -cx.cfg.fence_eps);
  } else if (cx.cfg.fence_h == "gaussian") {
    // mass fence_eps, variance 1/8
    for (std::size_t i = 0; i < g.n; ++i) {
      double y = g.x(i) - x0;
      h[i] = -cx.cfg.fence_eps / std::sqrt(M_PI * 0.25) * std::exp(-y * y / 0.25);
    }
  } else {
    ViolationSetup s = violation_initial_condition(f, cx.cfg.fence_beta);
    h = s.h;
    x0 = s.x0;
    cx.result["setup"] = {{"beta", s.beta},       {"K", s.K},           {"gamma", s.gamma},
                          {"x1", s.x1},           {"x0", s.x0},         {"tail_level_ok", s.tail_level_ok},
                          {"shift_ok", s.shift_ok}, {"norm_inf", s.norm_inf}, {"norm_1", s.norm_1}};
    if (!s.shift_ok)
      cx.result["warning"] = "no node satisfies the erfc shift condition; lower grid.x_min";
  }
  FujitaOptions o;
  o.h = cx.cfg.time.h;
  o.blowup_threshold = cx.cfg.time.blowup_threshold;
  FujitaDiagnostic d = fujita_experiment(f, h, x0, cx.cfg.fence_T, o);
  write_fujita_csv(cx.main_out(), d);
  auto opt = [](const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  cx.result["violation_time"] = opt(d.violation_time);
  cx.result["t_star"] = opt(d.t_star);
  cx.result["t_star_raw"] = d.t_star_raw;
  cx.result["mass_after_one_step"] = d.mass_after_one_step;
  cx.result["fence_respected"] = d.fence_respected;
}

void write_manifest(const Context &cx, const std::string &status, const std::string &message) {
  nlohmann::json m;
  m["software"] = {{"name", "eternal"}, {"version", kVersion}};
  m["config"] = to_json(cx.cfg);
  m["status"] = status;
  if (!message.empty())
    m["message"] = message;
  m["result"] = cx.result;
  m["outputs"] = cx.outputs;
  std::ofstream(stem(cx.cfg.out) + ".manifest.json") << std::setw(2) << m << '\n';
}

} // namespace

int run(const RunConfig &cfg, std::ostream &out, std::ostream &err) {
  auto bad = validate(cfg);
  if (!bad.empty()) {
    for (const auto &v : bad)
      err << "config error: " << v.message() << '\n';
    return 2;
  }
  if (cfg.threads > 0)
    set_max_threads(static_cast<std::size_t>(cfg.threads));
  Context cx(cfg);
  try {
    if (cfg.command == "evolve")
      cmd_evolve(cx);
    else if (cfg.command == "equilibria")
      cmd_equilibria(cx);
    else if (cfg.command == "bifurcate")
      cmd_bifurcate(cx);
    else if (cfg.command == "spectrum")
      cmd_spectrum(cx);
    else if (cfg.command == "heteroclinic")
      cmd_heteroclinic(cx);
    else if (cfg.command == "frontier")
      cmd_frontier(cx);
    else
      cmd_blowup(cx);
  } catch (const Failure &e) {
    err << e.what() << '\n';
    write_manifest(cx, "failure", e.what());
    return 1;
  } catch (const std::invalid_argument &e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    err << e.what() << '\n';
    write_manifest(cx, "failure", e.what());
    return 1;
  }
  write_manifest(cx, "ok", "");
  out << cx.result.dump() << '\n';
  return 0;
}

int main(int argc, char **argv, std::ostream &out, std::ostream &err) {
  RunConfig cfg;
  CLI::App app{"eternal: equilibria, bifurcations and dynamics of u_t = u_xx − u² + φ"};
  app.set_help_flag("--help", "print this help and exit"); // -h would shadow --h
  app.set_version_flag("--version", kVersion);
  app.add_option("--config", cfg.config_file, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--threads", cfg.threads, "worker thread cap (0: hardware)");
  app.add_option("--out", cfg.out, "primary output path");
  app.add_option("--x-min", cfg.grid.x_min);
  app.add_option("--x-max", cfg.grid.x_max);
  app.add_option("--n", cfg.grid.n, "grid points");
  app.add_option("--phi", cfg.phi.family, "gauss-quad | gauss | constant | tabulated");
  app.add_option("--c", cfg.phi.c, "family parameter");
  app.add_option("--P", cfg.phi.P, "constant forcing value");
  app.add_option("--phi-file", cfg.phi.file, "tabulated forcing (x,value)");
  app.add_option("--h", cfg.time.h, "time step");
  app.add_option("--t-end", cfg.time.t_end);
  app.add_option("--blowup-threshold", cfg.time.blowup_threshold);
  app.add_option("--x0", cfg.solver.x0, "matching point");
  app.add_option("--step", cfg.solver.step, "shooting step");
  app.add_option("--newton-tol", cfg.solver.newton_tol);
  app.add_option("--fate-tol", cfg.solver.fate_tol);
  app.require_subcommand(1);
  app.fallthrough(); // global flags may follow the subcommand

  auto *ev = app.add_subcommand("evolve", "IMEX evolution from a constant or tabulated start");
  ev->add_option("--u0", cfg.u0);
  ev->add_option("--u0-file", cfg.u0_file);
  app.add_subcommand("equilibria", "all global equilibria by tail matching");
  auto *bf = app.add_subcommand("bifurcate", "pseudo-arclength bifurcation diagram");
  bf->add_option("--c-range", cfg.c_range, "lo:hi");
  bf->add_option("--ds", cfg.ds);
  bf->add_option("--seed-branch", cfg.seed_branch, "all | upper | symmetric | fork+ | fork-");
  auto *sp = app.add_subcommand("spectrum", "unstable spectrum of an equilibrium");
  sp->add_option("--index", cfg.index, "equilibrium index, increasing f(0)");
  auto *he = app.add_subcommand("heteroclinic", "funnel construction between the outer equilibria");
  he->add_option("--eps", cfg.eps);
  auto *fr = app.add_subcommand("frontier", "basin-frontier bisection");
  fr->add_option("--direction", cfg.direction, "gaussian | eigenmix");
  fr->add_option("--width", cfg.width);
  fr->add_option("--A", cfg.amplitude, "fixed amplitude for eigenmix");
  fr->add_option("--lo", cfg.lo);
  fr->add_option("--hi", cfg.hi);
  fr->add_option("--tol", cfg.tol);
  fr->add_option("--horizon", cfg.horizon);
  fr->add_option("--index", cfg.index, "equilibrium index, increasing f(0)");
  auto *bl = app.add_subcommand("blowup", "Fujita fence experiment");
  bl->add_option("--f", cfg.fence_f, "zero | equilibrium");
  bl->add_option("--init", cfg.fence_h, "constant | gaussian | shifted");
  bl->add_option("--eps", cfg.fence_eps);
  bl->add_option("--delta-at", cfg.fence_x0);
  bl->add_option("--T", cfg.fence_T);
  bl->add_option("--beta", cfg.fence_beta);

  try {
    app.parse(argc, argv);
    if (!cfg.config_file.empty()) {
      // defaults < file < flags: reload from the file, then reapply the flags
      RunConfig fresh;
      load_config_file(cfg.config_file, fresh);
      fresh.config_file = cfg.config_file;
      cfg = fresh;
      app.clear();
      app.parse(argc, argv);
    }
  } catch (const CLI::Success &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return 2;
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return run(cfg, out, err);
}

} // namespace eternal::cli
