#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glogit/config.hpp"
#include "glogit/csv.hpp"
#include "glogit/field.hpp"
#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"
#include "glogit/hjb.hpp"
#include "glogit/logit.hpp"
#include "glogit/mc.hpp"
#include "glogit/scenario.hpp"

namespace glogit {

// =========================================================================
// Config -> scenario
// =========================================================================

inline ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "constant") return ProfileKind::constant;
  if (s == "linear_R") return ProfileKind::linear_R;
  if (s == "linear_M") return ProfileKind::linear_M;
  throw std::invalid_argument("unknown profile kind '" + s + "'");
}

inline GraphonKernel build_kernel(const GraphonSection& gs, const Grid& g) {
  if (gs.kind == "gaussian") return build_gaussian(gs.theta, g);
  if (gs.kind == "uniform") return build_uniform(g);
  if (gs.kind == "identity") return build_identity(g);
  if (gs.kind == "custom") return load_kernel_csv(gs.path, g, gs.normalize);
  throw std::invalid_argument("unknown kernel kind '" + gs.kind + "'");
}

struct Bundle {
  Grid grid;
  Scenario scenario;
};

inline Bundle build_bundle(const RunConfig& cfg) {
  Grid grid = make_grid(cfg.grid.nx, cfg.grid.ny);
  RateProfiles rates = make_rate_profiles(
      delta_profile(profile_kind_from_string(cfg.delta.kind), grid, cfg.delta.value),
      delta_profile(profile_kind_from_string(cfg.eta.kind), grid, cfg.eta.value),
      grid);
  GraphonKernel kernel = build_kernel(cfg.graphon, grid);
  MeasureField mu0 = make_uniform_measure(grid);
  if (cfg.initial.kind == "file") {
    Field raw = load_measure_csv(cfg.initial.path, grid);
    for (double v : raw.data())
      if (!(v >= 0.0))
        throw std::invalid_argument("initial measure has negative entries");
    normalize_measure_columns(raw, grid);
    mu0 = MeasureField{std::move(raw), MeasureRole::mu0};
  }
  check_measure(mu0, grid);
  FisheryParams params{cfg.utility.c0, cfg.utility.c1, cfg.utility.rho,
                       cfg.utility.gamma};
  Scenario scenario = make_fishery_scenario(grid, std::move(rates), params,
                                            std::move(kernel), std::move(mu0));
  return Bundle{std::move(grid), std::move(scenario)};
}

inline SolverConfig solver_config_from(const SolverSection& s) {
  SolverConfig c;
  c.dt = s.dt;
  c.eps = s.eps;
  c.max_iter = s.max_iter;
  c.mode = s.mode == "damped_picard" ? SolverMode::damped_picard
                                     : SolverMode::pseudo_time;
  c.omega = s.omega;
  return c;
}

inline std::vector<double> nash_alpha_profile(const Scenario& s, const Grid& g) {
  std::vector<double> out(g.ny);
  const auto& p = fishery_params(s);
  for (int j = 0; j < g.ny; ++j) out[j] = nash_alpha(g.y[j], p);
  return out;
}

inline bool wants_output(const RunConfig& cfg, const std::string& name) {
  for (const auto& e : cfg.outputs.emit)
    if (e == name) return true;
  return false;
}

inline nlohmann::json kernel_report_json(const Scenario& s, const Grid& g,
                                         const GraphonSection& gs) {
  KernelAssumptionReport rep = check_kernel_assumptions(s.kernel, g);
  nlohmann::json j;
  j["kind"] = kernel_kind_name(s.kernel.kind);
  if (s.kernel.kind == KernelKind::gaussian) j["theta"] = s.kernel.theta;
  j["normalization"] = gs.kind == "custom" && !gs.normalize ? "none" : "per_column";
  j["symmetry_dev"] = rep.symmetry_dev;
  j["integrability_bound"] = rep.integrability_bound;
  return j;
}

// =========================================================================
// solve
// =========================================================================

struct SolveCommandResult {
  Bundle bundle;
  SolveResult result;
  int exit_code = 0;  // nonzero on non-convergence or bound violation
};

inline SolveCommandResult run_solve(const RunConfig& cfg) {
  SolveCommandResult out{build_bundle(cfg), {}, 0};
  out.result = solve(out.bundle.scenario, out.bundle.grid,
                     solver_config_from(cfg.solver));
  if (!out.result.converged || !out.result.bound_ok) out.exit_code = 1;
  return out;
}

inline nlohmann::json solve_report_json(const RunConfig& cfg,
                                        const SolveCommandResult& r) {
  const Grid& g = r.bundle.grid;
  nlohmann::json j;
  j["command"] = "solve";
  j["converged"] = r.result.converged;
  j["iterations"] = r.result.iterations;
  j["final_increment"] = r.result.final_increment;
  j["final_residual"] = r.result.final_residual;
  j["bound_check"] = {{"utility_min", r.result.utility_min},
                      {"utility_max", r.result.utility_max},
                      {"phi_min", field_min(r.result.phi.phi)},
                      {"phi_max", field_max(r.result.phi.phi)},
                      {"violation", r.result.bound_violation},
                      {"tolerance", kBoundTol},
                      {"ok", r.result.bound_ok}};
  j["mass_check"] = {{"max_column_mass_dev", max_column_mass_dev(r.result.m.p, g)}};
  j["graphon"] = kernel_report_json(r.bundle.scenario, g, cfg.graphon);
  j["config"] = run_config_to_json(cfg);
  return j;
}

inline void emit_solve_outputs(const RunConfig& cfg, const SolveCommandResult& r) {
  std::filesystem::path dir = cfg.outputs.dir;
  const Grid& g = r.bundle.grid;
  if (wants_output(cfg, "phi"))
    write_surface_csv(dir / "phi.csv", "phi", r.result.phi.phi, g);
  if (wants_output(cfg, "p"))
    write_surface_csv(dir / "p.csv", "p", r.result.m.p, g);
  if (wants_output(cfg, "alpha"))
    write_alpha_csv(dir / "alpha.csv", g, r.result.alpha,
                    nash_alpha_profile(r.bundle.scenario, g));
  if (wants_output(cfg, "report"))
    write_text_file(dir / "report.json", solve_report_json(cfg, r).dump(2) + "\n");
}

// =========================================================================
// dlogit / logit-eq
// =========================================================================

struct DlogitCommandResult {
  Bundle bundle;
  DiscountedLogitResult result;
  int exit_code = 0;
};

inline DlogitCommandResult run_dlogit(const RunConfig& cfg) {
  DlogitCommandResult out{build_bundle(cfg), {}, 0};
  out.result = discounted_logit_solve(out.bundle.scenario, out.bundle.grid,
                                      cfg.solver.eps, cfg.solver.max_iter,
                                      cfg.solver.omega);
  return out;
}

inline void emit_dlogit_outputs(const RunConfig& cfg, const DlogitCommandResult& r) {
  std::filesystem::path dir = cfg.outputs.dir;
  const Grid& g = r.bundle.grid;
  if (wants_output(cfg, "p"))
    write_surface_csv(dir / "p.csv", "p", r.result.m.p, g);
  if (wants_output(cfg, "alpha"))
    write_alpha_csv(dir / "alpha.csv", g, alpha_from_measure(r.result.m.p, g),
                    nash_alpha_profile(r.bundle.scenario, g));
  if (wants_output(cfg, "report")) {
    nlohmann::json j;
    j["command"] = "dlogit";
    j["iterations"] = r.result.iterations;
    j["residual"] = r.result.residual;
    j["mass_check"] = {{"max_column_mass_dev", max_column_mass_dev(r.result.m.p, g)}};
    j["graphon"] = kernel_report_json(r.bundle.scenario, g, cfg.graphon);
    j["config"] = run_config_to_json(cfg);
    write_text_file(dir / "report.json", j.dump(2) + "\n");
  }
}

struct LogitEqCommandResult {
  Bundle bundle;
  LogitEquilibriumResult result;
  int exit_code = 0;
};

inline LogitEqCommandResult run_logit_eq(const RunConfig& cfg) {
  LogitEqCommandResult out{build_bundle(cfg), {}, 0};
  out.result = logit_equilibrium(out.bundle.scenario, out.bundle.grid,
                                 cfg.solver.eps, cfg.solver.max_iter,
                                 cfg.solver.omega);
  return out;
}

inline void emit_logit_eq_outputs(const RunConfig& cfg,
                                  const LogitEqCommandResult& r) {
  std::filesystem::path dir = cfg.outputs.dir;
  const Grid& g = r.bundle.grid;
  if (wants_output(cfg, "p"))
    write_surface_csv(dir / "p.csv", "p", r.result.p.p, g);
  if (wants_output(cfg, "alpha"))
    write_alpha_csv(dir / "alpha.csv", g, alpha_from_measure(r.result.p.p, g),
                    nash_alpha_profile(r.bundle.scenario, g));
  if (wants_output(cfg, "report")) {
    nlohmann::json j;
    j["command"] = "logit-eq";
    j["steps"] = r.result.steps;
    j["residual"] = r.result.residual;
    j["mass_check"] = {{"max_column_mass_dev", max_column_mass_dev(r.result.p.p, g)}};
    j["graphon"] = kernel_report_json(r.bundle.scenario, g, cfg.graphon);
    j["config"] = run_config_to_json(cfg);
    write_text_file(dir / "report.json", j.dump(2) + "\n");
  }
}

// =========================================================================
// mc
// =========================================================================

struct McColumnResult {
  int column = 0;
  std::vector<double> event_loop;
  std::vector<double> race;
  std::vector<double> expected;  // delta/(delta+1) mu0 + 1/(delta+1) pstar
  double l1_event = 0.0;
  double l1_race = 0.0;
  double l1_between = 0.0;
};

struct McCommandResult {
  Bundle bundle;
  SolveResult hjb;
  std::vector<McColumnResult> columns;
  int exit_code = 0;
};

// Validates the occupation-measure identity by simulation: solves the
// stationary system, then per requested column simulates the killed jump
// process against the solved logit density.
inline McCommandResult run_mc(const RunConfig& cfg, const McConfig& mc) {
  McCommandResult out{build_bundle(cfg), {}, {}, 0};
  const Grid& g = out.bundle.grid;
  const Scenario& s = out.bundle.scenario;
  out.hjb = solve(s, g, solver_config_from(cfg.solver));
  if (!out.hjb.converged) {
    out.exit_code = 1;
    return out;
  }
  std::vector<int> columns = mc.columns;
  if (columns.empty()) columns = {0, g.ny / 2, g.ny - 1};
  for (int j : columns) {
    if (j < 0 || j >= g.ny)
      throw std::invalid_argument("run_mc: column index out of range");
    McColumnResult cr;
    cr.column = j;
    std::vector<double> pstar =
        logit_density(out.hjb.phi.phi.col(j), s.rates.eta[j], g);
    auto mu0 = s.mu0.p.col(j);
    double d = s.rates.delta[j];
    cr.expected.resize(g.nx);
    for (int i = 0; i < g.nx; ++i)
      cr.expected[i] = d / (d + 1.0) * mu0[i] + 1.0 / (d + 1.0) * pstar[i];
    cr.event_loop = simulate_discounted(pstar, mu0, d, mc, j, g);
    cr.race = simulate_discounted_race(pstar, mu0, d, mc, j, g);
    cr.l1_event = density_l1(cr.event_loop, cr.expected, g);
    cr.l1_race = density_l1(cr.race, cr.expected, g);
    cr.l1_between = density_l1(cr.event_loop, cr.race, g);
    out.columns.push_back(std::move(cr));
  }
  return out;
}

inline void emit_mc_outputs(const RunConfig& cfg, const McConfig& mc,
                            const McCommandResult& r) {
  std::filesystem::path dir = cfg.outputs.dir;
  const Grid& g = r.bundle.grid;
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& cr : r.columns) {
    auto out = detail::open_output(dir / ("mc_col" + std::to_string(cr.column) + ".csv"));
    out << "x,event_loop,race,expected\n";
    for (int i = 0; i < g.nx; ++i)
      out << format_double(g.x[i]) << ',' << format_double(cr.event_loop[i])
          << ',' << format_double(cr.race[i]) << ','
          << format_double(cr.expected[i]) << "\n";
    cols.push_back({{"column", cr.column},
                    {"l1_event_loop", cr.l1_event},
                    {"l1_race", cr.l1_race},
                    {"l1_between_samplers", cr.l1_between}});
  }
  nlohmann::json j;
  j["command"] = "mc";
  j["samples"] = mc.samples;
  j["seed"] = mc.seed;
  j["hjb_converged"] = r.hjb.converged;
  j["columns"] = cols;
  j["config"] = run_config_to_json(cfg);
  write_text_file(dir / "report.json", j.dump(2) + "\n");
}

// =========================================================================
// Convergence study
// =========================================================================

// Linear interpolation of fine cell-center values to an arbitrary point per
// axis, then across axes. Coarse centers of a 2^M grid land on cell edges of
// any finer 2^R grid, so in the study this averages the four surrounding
// fine cells.
inline Field restrict_to_coarse(const Field& fine, const Grid& fine_g,
                                const Grid& coarse_g) {
  if (fine.nx() != fine_g.nx || fine.ny() != fine_g.ny)
    throw std::invalid_argument("restrict_to_coarse: field/grid mismatch");
  auto bracket = [](double center, double d, int n, int& k0, double& w) {
    double pos = center / d - 0.5;
    double f = std::floor(pos);
    k0 = static_cast<int>(f);
    w = pos - f;
    if (k0 < 0) { k0 = 0; w = 0.0; }
    if (k0 > n - 2) { k0 = n - 2; w = 1.0; }
  };
  Field out(coarse_g.nx, coarse_g.ny);
  for (int j = 0; j < coarse_g.ny; ++j) {
    int j0; double wy;
    bracket(coarse_g.y[j], fine_g.dy, fine_g.ny, j0, wy);
    for (int i = 0; i < coarse_g.nx; ++i) {
      int i0; double wx;
      bracket(coarse_g.x[i], fine_g.dx, fine_g.nx, i0, wx);
      double v00 = fine(i0, j0), v10 = fine(i0 + 1, j0);
      double v01 = fine(i0, j0 + 1), v11 = fine(i0 + 1, j0 + 1);
      double lo = v00 + wx * (v10 - v00);
      double hi = v01 + wx * (v11 - v01);
      out(i, j) = lo + wy * (hi - lo);
    }
  }
  return out;
}

struct ConvergenceRow {
  int level = 0;
  int n = 0;
  bool converged = false;
  double error = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  int ref_level = 0;
  int ref_n = 0;
  bool ref_converged = false;
  int exit_code = 0;
};

// Self-convergence table: solves the same case at n = 2^level for each level
// and once at a finer reference, measures sup-norm errors at coarse centers
// against the interpolated reference, and reports dyadic rates between
// consecutive levels. Failed levels keep their row but suppress the
// adjacent rates.
inline ConvergenceStudy convergence_study(const RunConfig& base, int level_lo,
                                          int level_hi, int level_ref,
                                          std::ostream* log = nullptr) {
  if (level_lo < 1 || level_hi < level_lo || level_ref <= level_hi)
    throw std::invalid_argument("convergence_study: need lo <= hi < ref");
  ConvergenceStudy study;
  study.ref_level = level_ref;
  study.ref_n = 1 << level_ref;

  auto solve_at = [&base](int n) {
    RunConfig cfg = base;
    cfg.grid.nx = n;
    cfg.grid.ny = n;
    Bundle b = build_bundle(cfg);
    SolveResult r = solve(b.scenario, b.grid, solver_config_from(cfg.solver));
    return std::pair<Grid, SolveResult>{std::move(b.grid), std::move(r)};
  };

  if (log) *log << "reference n = " << study.ref_n << "\n";
  auto [ref_grid, ref_result] = solve_at(study.ref_n);
  study.ref_converged = ref_result.converged;
  if (!ref_result.converged) {
    if (log) *log << "reference solve did not converge\n";
    study.exit_code = 1;
    return study;
  }

  for (int level = level_lo; level <= level_hi; ++level) {
    ConvergenceRow row;
    row.level = level;
    row.n = 1 << level;
    try {
      auto [grid, result] = solve_at(row.n);
      row.converged = result.converged;
      if (result.converged) {
        Field ref_on_coarse = restrict_to_coarse(ref_result.phi.phi, ref_grid, grid);
        row.error = max_abs_diff(result.phi.phi, ref_on_coarse);
      }
    } catch (const DivergenceError&) {
      row.converged = false;
    }
    if (log) {
      *log << "n = " << row.n;
      if (row.converged) *log << "  error = " << row.error;
      else *log << "  (not converged)";
      *log << "\n";
    }
    study.rows.push_back(row);
  }
  for (std::size_t k = 1; k < study.rows.size(); ++k) {
    const auto& prev = study.rows[k - 1];
    auto& cur = study.rows[k];
    if (prev.converged && cur.converged && cur.error > 0.0)
      cur.rate = std::log2(prev.error / cur.error);
  }
  for (const auto& row : study.rows)
    if (!row.converged) study.exit_code = 1;
  return study;
}

inline void emit_convergence_outputs(const RunConfig& cfg,
                                     const ConvergenceStudy& study) {
  std::filesystem::path dir = cfg.outputs.dir;
  auto out = detail::open_output(dir / "convergence.csv");
  out << "level,n,converged,error,rate\n";
  for (const auto& row : study.rows)
    out << row.level << ',' << row.n << ',' << (row.converged ? 1 : 0) << ','
        << format_double(row.error) << ',' << format_double(row.rate) << "\n";
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : study.rows) {
    nlohmann::json r = {{"level", row.level},
                        {"n", row.n},
                        {"converged", row.converged}};
    if (std::isfinite(row.error)) r["error"] = row.error;
    if (std::isfinite(row.rate)) r["rate"] = row.rate;
    rows.push_back(r);
  }
  nlohmann::json j;
  j["command"] = "converge";
  j["ref_level"] = study.ref_level;
  j["ref_n"] = study.ref_n;
  j["ref_converged"] = study.ref_converged;
  j["rows"] = rows;
  j["config"] = run_config_to_json(cfg);
  write_text_file(dir / "report.json", j.dump(2) + "\n");
}

// =========================================================================
// Theta sweep
// =========================================================================

struct SweepPoint {
  double theta = 0.0;
  bool hjb_ok = false;
  bool dlogit_ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  int exit_code = 0;
};

// One stationary solve and one discounted-logit solve per kernel width;
// aggregate tables land in files tagged with theta. Failures are recorded
// and the sweep continues.
inline SweepResult sweep_theta(const RunConfig& base,
                               const std::vector<double>& thetas,
                               std::ostream* log = nullptr) {
  if (thetas.empty())
    throw std::invalid_argument("sweep_theta: need at least one theta");
  SweepResult sweep;
  std::filesystem::path dir = base.outputs.dir;
  for (double theta : thetas) {
    SweepPoint point;
    point.theta = theta;
    RunConfig cfg = base;
    cfg.graphon.kind = "gaussian";
    cfg.graphon.theta = theta;
    std::string tag = format_double(theta);
    try {
      Bundle b = build_bundle(cfg);
      SolveResult r = solve(b.scenario, b.grid, solver_config_from(cfg.solver));
      if (!r.converged) throw ConvergenceError("stationary solve did not converge");
      write_alpha_csv(dir / ("alpha_hjb_theta" + tag + ".csv"), b.grid, r.alpha,
                      nash_alpha_profile(b.scenario, b.grid));
      point.hjb_ok = true;
      DiscountedLogitResult dl = discounted_logit_solve(
          b.scenario, b.grid, cfg.solver.eps, cfg.solver.max_iter, cfg.solver.omega);
      write_alpha_csv(dir / ("alpha_dlogit_theta" + tag + ".csv"), b.grid,
                      alpha_from_measure(dl.m.p, b.grid),
                      nash_alpha_profile(b.scenario, b.grid));
      point.dlogit_ok = true;
    } catch (const std::exception& e) {
      point.error = e.what();
      sweep.exit_code = 1;
    }
    if (log)
      *log << "theta = " << tag << "  hjb " << (point.hjb_ok ? "ok" : "failed")
           << "  dlogit " << (point.dlogit_ok ? "ok" : "failed") << "\n";
    sweep.points.push_back(std::move(point));
  }
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : sweep.points)
    pts.push_back({{"theta", p.theta},
                   {"hjb_ok", p.hjb_ok},
                   {"dlogit_ok", p.dlogit_ok},
                   {"error", p.error}});
  nlohmann::json j;
  j["command"] = "sweep-theta";
  j["points"] = pts;
  j["config"] = run_config_to_json(base);
  write_text_file(dir / "sweep_report.json", j.dump(2) + "\n");
  return sweep;
}

// =========================================================================
// check
// =========================================================================

// A priori diagnostics for a configured case: contraction smallness value,
// per-type aggregate-feedback rows, and the kernel assumption report.
// Failing conditions are reported, not fatal.
inline nlohmann::json check_report(const RunConfig& cfg, double ubar, double lu) {
  Bundle b = build_bundle(cfg);
  ContractionReport con = contraction_check(ubar, lu, b.scenario.rates);
  std::vector<MonotonicityRow> rows =
      monotonicity_check(b.scenario, b.scenario.kernel, b.grid);
  nlohmann::json mono = nlohmann::json::array();
  bool all_hold = true;
  for (const auto& row : rows) {
    all_hold = all_hold && row.holds;
    mono.push_back({{"j", row.j}, {"lhs", row.lhs}, {"rhs", row.rhs},
                    {"holds", row.holds}});
  }
  nlohmann::json j;
  j["command"] = "check";
  j["contraction"] = {{"ubar", ubar},
                      {"lipschitz_u", lu},
                      {"value", con.value},
                      {"holds", con.holds}};
  j["monotonicity"] = {{"all_hold", all_hold}, {"rows", mono}};
  j["graphon"] = kernel_report_json(b.scenario, b.grid, cfg.graphon);
  j["config"] = run_config_to_json(cfg);
  return j;
}

}  // namespace glogit
