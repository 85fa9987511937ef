// Command-line front end: stationary solves, logit dynamics, Monte Carlo
// validation, convergence studies, kernel sweeps, and a priori checks.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glogit/glogit.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string preset;
  bool no_graphon = false;
  std::string costs;
  std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "RunConfig JSON file");
  cmd->add_option("--preset", f.preset, "case preset: A, B, C, D, R, or M")
      ->check(CLI::IsMember({"A", "B", "C", "D", "R", "M"}));
  cmd->add_flag("--no-graphon", f.no_graphon,
                "use the exact identity kernel (no type coupling)");
  cmd->add_option("--costs", f.costs, "cost set: default or high")
      ->check(CLI::IsMember({"default", "high"}));
  cmd->add_option("--out", f.out_dir, "output directory");
}

glogit::RunConfig assemble_config(const CommonFlags& f) {
  glogit::RunConfig cfg = f.config_path.empty()
                              ? glogit::default_run_config()
                              : glogit::load_run_config(f.config_path);
  if (!f.preset.empty()) glogit::apply_preset(cfg, f.preset);
  if (f.no_graphon) {
    cfg.graphon.kind = "identity";
    cfg.graphon.path.clear();
  }
  if (!f.costs.empty()) glogit::apply_costs(cfg, f.costs);
  if (!f.out_dir.empty()) cfg.outputs.dir = f.out_dir;
  return cfg;
}

std::pair<int, int> parse_level_range(const std::string& text) {
  auto pos = text.find("..");
  if (pos == std::string::npos)
    throw CLI::ValidationError("--levels", "expected a range like 4..8");
  int lo = std::stoi(text.substr(0, pos));
  int hi = std::stoi(text.substr(pos + 2));
  return {lo, hi};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stationary graphon logit dynamics solver"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "solve the stationary system");
  add_common_flags(solve_cmd, solve_flags);

  CommonFlags dlogit_flags;
  auto* dlogit_cmd =
      app.add_subcommand("dlogit", "fixed point of the discounted logit dynamic");
  add_common_flags(dlogit_cmd, dlogit_flags);

  CommonFlags logit_eq_flags;
  auto* logit_eq_cmd =
      app.add_subcommand("logit-eq", "classical logit equilibrium");
  add_common_flags(logit_eq_cmd, logit_eq_flags);

  CommonFlags mc_flags;
  long mc_samples = 100000;
  std::uint64_t mc_seed = 1;
  std::string mc_columns;
  auto* mc_cmd = app.add_subcommand(
      "mc", "Monte Carlo validation of the occupation measure");
  add_common_flags(mc_cmd, mc_flags);
  mc_cmd->add_option("--samples", mc_samples, "samples per column");
  mc_cmd->add_option("--seed", mc_seed, "master seed");
  mc_cmd->add_option("--columns", mc_columns,
                     "comma-separated type column indices (0-based)");

  CommonFlags conv_flags;
  std::string conv_levels = "4..7";
  int conv_ref = 8;
  auto* conv_cmd = app.add_subcommand("converge", "dyadic self-convergence table");
  add_common_flags(conv_cmd, conv_flags);
  conv_cmd->add_option("--levels", conv_levels, "level range, e.g. 4..8");
  conv_cmd->add_option("--ref", conv_ref, "reference level");

  CommonFlags sweep_flags;
  std::string sweep_thetas = "0.5,0.25,0.125,0.0625";
  auto* sweep_cmd =
      app.add_subcommand("sweep-theta", "solve across kernel widths");
  add_common_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--thetas", sweep_thetas, "comma-separated theta list");

  CommonFlags check_flags;
  double check_ubar = 1.0;
  double check_lu = 0.1;
  auto* check_cmd = app.add_subcommand("check", "a priori condition report");
  add_common_flags(check_cmd, check_flags);
  check_cmd->add_option("--ubar", check_ubar, "utility bound for the contraction value");
  check_cmd->add_option("--lu", check_lu, "utility Lipschitz constant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      glogit::RunConfig cfg = assemble_config(solve_flags);
      glogit::SolveCommandResult r = glogit::run_solve(cfg);
      glogit::emit_solve_outputs(cfg, r);
      std::cout << "converged: " << (r.result.converged ? "yes" : "no")
                << "  iterations: " << r.result.iterations
                << "  final_residual: " << glogit::format_double(r.result.final_residual)
                << "\nbound_ok: " << (r.result.bound_ok ? "yes" : "no")
                << "  violation: " << glogit::format_double(r.result.bound_violation)
                << "\n";
      return r.exit_code;
    }
    if (dlogit_cmd->parsed()) {
      glogit::RunConfig cfg = assemble_config(dlogit_flags);
      glogit::DlogitCommandResult r = glogit::run_dlogit(cfg);
      glogit::emit_dlogit_outputs(cfg, r);
      std::cout << "iterations: " << r.result.iterations
                << "  residual: " << glogit::format_double(r.result.residual) << "\n";
      return r.exit_code;
    }
    if (logit_eq_cmd->parsed()) {
      glogit::RunConfig cfg = assemble_config(logit_eq_flags);
      glogit::LogitEqCommandResult r = glogit::run_logit_eq(cfg);
      glogit::emit_logit_eq_outputs(cfg, r);
      std::cout << "steps: " << r.result.steps
                << "  residual: " << glogit::format_double(r.result.residual) << "\n";
      return r.exit_code;
    }
    if (mc_cmd->parsed()) {
      glogit::RunConfig cfg = assemble_config(mc_flags);
      glogit::McConfig mc;
      mc.samples = mc_samples;
      mc.seed = mc_seed;
      if (!mc_columns.empty()) {
        std::size_t start = 0;
        while (start <= mc_columns.size()) {
          std::size_t pos = mc_columns.find(',', start);
          std::string tok = pos == std::string::npos
                                ? mc_columns.substr(start)
                                : mc_columns.substr(start, pos - start);
          if (!tok.empty()) mc.columns.push_back(std::stoi(tok));
          if (pos == std::string::npos) break;
          start = pos + 1;
        }
      }
      glogit::McCommandResult r = glogit::run_mc(cfg, mc);
      glogit::emit_mc_outputs(cfg, mc, r);
      for (const auto& cr : r.columns)
        std::cout << "column " << cr.column
                  << "  l1_event_loop: " << glogit::format_double(cr.l1_event)
                  << "  l1_race: " << glogit::format_double(cr.l1_race) << "\n";
      return r.exit_code;
    }
    if (conv_cmd->parsed()) {
      glogit::RunConfig cfg = assemble_config(conv_flags);
      auto [lo, hi] = parse_level_range(conv_levels);
      glogit::ConvergenceStudy study =
          glogit::convergence_study(cfg, lo, hi, conv_ref, &std::cout);
      glogit::emit_convergence_outputs(cfg, study);
      for (const auto& row : study.rows) {
        std::cout << "n = " << row.n << "  error = "
                  << glogit::format_double(row.error);
        if (std::isfinite(row.rate))
          std::cout << "  rate = " << glogit::format_double(row.rate);
        std::cout << "\n";
      }
      return study.exit_code;
    }
    if (sweep_cmd->parsed()) {
      glogit::RunConfig cfg = assemble_config(sweep_flags);
      std::vector<double> thetas;
      std::size_t start = 0;
      while (start <= sweep_thetas.size()) {
        std::size_t pos = sweep_thetas.find(',', start);
        std::string tok = pos == std::string::npos
                              ? sweep_thetas.substr(start)
                              : sweep_thetas.substr(start, pos - start);
        if (!tok.empty()) thetas.push_back(glogit::parse_double(tok));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      glogit::SweepResult r = glogit::sweep_theta(cfg, thetas, &std::cout);
      return r.exit_code;
    }
    if (check_cmd->parsed()) {
      glogit::RunConfig cfg = assemble_config(check_flags);
      nlohmann::json rep = glogit::check_report(cfg, check_ubar, check_lu);
      std::cout << rep.dump(2) << "\n";
      glogit::write_text_file(std::filesystem::path(cfg.outputs.dir) / "check.json",
                              rep.dump(2) + "\n");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
