#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "glogit/graphon.hpp"
#include "glogit/scenario.hpp"

namespace glogit {

// A full run description, expressible as JSON. Every field has a default;
// parsing rejects unknown keys so config typos fail loudly.
struct GridSection {
  int nx = 300;
  int ny = 300;
};

struct SolverSection {
  double dt = 0.01;
  double eps = 1e-10;
  long max_iter = 500000;
  std::string mode = "pseudo_time";  // or "damped_picard"
  double omega = 0.5;
};

struct GraphonSection {
  std::string kind = "gaussian";  // gaussian | uniform | identity | custom
  double theta = 0.5;
  std::string path;      // custom kernel CSV
  bool normalize = true; // normalize custom kernel columns
};

struct RateSection {
  std::string kind = "constant";  // constant | linear_R | linear_M
  double value = 0.0;
};

struct UtilitySection {
  double c0 = 1.4142135623730951;  // sqrt(2)
  double c1 = 3.1622776601683795;  // sqrt(10)
  double rho = 0.05;
  double gamma = 1e-9;
};

struct InitialSection {
  std::string kind = "uniform";  // uniform | file
  std::string path;
};

struct OutputSection {
  std::string dir = "out";
  std::vector<std::string> emit = {"phi", "p", "alpha", "report"};
};

struct RunConfig {
  GridSection grid;
  SolverSection solver;
  GraphonSection graphon;
  RateSection delta{"constant", 0.5};
  RateSection eta{"constant", 2.0};
  UtilitySection utility;
  InitialSection initial;
  OutputSection outputs;
};

inline RunConfig default_run_config() { return RunConfig{}; }

// Cases from the computational study: (delta, eta) pairings A-D plus the
// type-graded profiles R and M. Pure: the same inputs always expand to the
// same config.
inline void apply_preset(RunConfig& cfg, const std::string& name) {
  if (name == "A") {
    cfg.delta = {"constant", 0.5};
    cfg.eta = {"constant", 2.0};
  } else if (name == "B") {
    cfg.delta = {"constant", 0.5};
    cfg.eta = {"constant", 200.0};
  } else if (name == "C") {
    cfg.delta = {"constant", 0.005};
    cfg.eta = {"constant", 2.0};
  } else if (name == "D") {
    cfg.delta = {"constant", 0.005};
    cfg.eta = {"constant", 200.0};
  } else if (name == "R") {
    cfg.delta = {"linear_R", 0.0};
    cfg.eta = {"constant", 200.0};
  } else if (name == "M") {
    cfg.delta = {"linear_M", 0.0};
    cfg.eta = {"constant", 200.0};
  } else {
    throw std::invalid_argument("apply_preset: unknown preset '" + name + "'");
  }
  cfg.graphon.kind = "gaussian";
  cfg.graphon.theta = 0.5;
  cfg.graphon.path.clear();
  cfg.graphon.normalize = true;
}

inline void apply_costs(RunConfig& cfg, const std::string& which) {
  if (which == "default") {
    cfg.utility.c0 = 1.4142135623730951;  // sqrt(2)
    cfg.utility.c1 = 3.1622776601683795;  // sqrt(10)
  } else if (which == "high") {
    cfg.utility.c0 = 2.0;
    cfg.utility.c1 = 3.7416573867739413;  // sqrt(14)
  } else {
    throw std::invalid_argument("apply_costs: unknown cost set '" + which + "'");
  }
  cfg.utility.rho = 0.05;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::string& section,
                                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " +
                                  section);
  }
}

inline double get_number(const nlohmann::json& obj, const char* key,
                         double fallback, const std::string& section) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw std::invalid_argument("config: " + section + "." + key +
                                " must be a number");
  return obj[key].get<double>();
}

inline long get_integer(const nlohmann::json& obj, const char* key,
                        long fallback, const std::string& section) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw std::invalid_argument("config: " + section + "." + key +
                                " must be an integer");
  return obj[key].get<long>();
}

inline std::string get_string(const nlohmann::json& obj, const char* key,
                              const std::string& fallback,
                              const std::string& section) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string())
    throw std::invalid_argument("config: " + section + "." + key +
                                " must be a string");
  return obj[key].get<std::string>();
}

inline bool get_bool(const nlohmann::json& obj, const char* key, bool fallback,
                     const std::string& section) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    throw std::invalid_argument("config: " + section + "." + key +
                                " must be a boolean");
  return obj[key].get<bool>();
}

inline RateSection parse_rate(const nlohmann::json& obj,
                              const RateSection& fallback,
                              const std::string& section) {
  if (!obj.is_object())
    throw std::invalid_argument("config: " + section + " must be an object");
  reject_unknown_keys(obj, section, {"kind", "value"});
  RateSection r = fallback;
  r.kind = get_string(obj, "kind", fallback.kind, section);
  if (r.kind != "constant" && r.kind != "linear_R" && r.kind != "linear_M")
    throw std::invalid_argument("config: " + section + ".kind must be one of "
                                "constant, linear_R, linear_M");
  r.value = get_number(obj, "value", fallback.value, section);
  if (r.kind == "constant" && !(r.value > 0.0))
    throw std::invalid_argument("config: " + section +
                                ".value must be positive for constant kind");
  return r;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: root must be an object");
  detail::reject_unknown_keys(j, "root",
                              {"grid", "solver", "graphon", "rates", "utility",
                               "initial", "outputs"});
  RunConfig cfg;
  if (j.contains("grid")) {
    const auto& o = j["grid"];
    detail::reject_unknown_keys(o, "grid", {"nx", "ny"});
    cfg.grid.nx = static_cast<int>(detail::get_integer(o, "nx", cfg.grid.nx, "grid"));
    cfg.grid.ny = static_cast<int>(detail::get_integer(o, "ny", cfg.grid.ny, "grid"));
  }
  if (j.contains("solver")) {
    const auto& o = j["solver"];
    detail::reject_unknown_keys(o, "solver",
                                {"dt", "eps", "max_iter", "mode", "omega"});
    cfg.solver.dt = detail::get_number(o, "dt", cfg.solver.dt, "solver");
    cfg.solver.eps = detail::get_number(o, "eps", cfg.solver.eps, "solver");
    cfg.solver.max_iter = detail::get_integer(o, "max_iter", cfg.solver.max_iter, "solver");
    cfg.solver.mode = detail::get_string(o, "mode", cfg.solver.mode, "solver");
    if (cfg.solver.mode != "pseudo_time" && cfg.solver.mode != "damped_picard")
      throw std::invalid_argument(
          "config: solver.mode must be pseudo_time or damped_picard");
    cfg.solver.omega = detail::get_number(o, "omega", cfg.solver.omega, "solver");
  }
  if (j.contains("graphon")) {
    const auto& o = j["graphon"];
    detail::reject_unknown_keys(o, "graphon", {"kind", "theta", "path", "normalize"});
    cfg.graphon.kind = detail::get_string(o, "kind", cfg.graphon.kind, "graphon");
    if (cfg.graphon.kind != "gaussian" && cfg.graphon.kind != "uniform" &&
        cfg.graphon.kind != "identity" && cfg.graphon.kind != "custom")
      throw std::invalid_argument(
          "config: graphon.kind must be one of gaussian, uniform, identity, custom");
    cfg.graphon.theta = detail::get_number(o, "theta", cfg.graphon.theta, "graphon");
    cfg.graphon.path = detail::get_string(o, "path", cfg.graphon.path, "graphon");
    cfg.graphon.normalize = detail::get_bool(o, "normalize", cfg.graphon.normalize, "graphon");
    if (cfg.graphon.kind == "gaussian" && !(cfg.graphon.theta > 0.0))
      throw std::invalid_argument("config: graphon.theta must be positive");
    if (cfg.graphon.kind == "custom" && cfg.graphon.path.empty())
      throw std::invalid_argument("config: graphon.path required for custom kernel");
  }
  if (j.contains("rates")) {
    const auto& o = j["rates"];
    detail::reject_unknown_keys(o, "rates", {"delta", "eta"});
    if (o.contains("delta"))
      cfg.delta = detail::parse_rate(o["delta"], cfg.delta, "rates.delta");
    if (o.contains("eta"))
      cfg.eta = detail::parse_rate(o["eta"], cfg.eta, "rates.eta");
  }
  if (j.contains("utility")) {
    const auto& o = j["utility"];
    detail::reject_unknown_keys(o, "utility", {"c0", "c1", "rho", "gamma"});
    cfg.utility.c0 = detail::get_number(o, "c0", cfg.utility.c0, "utility");
    cfg.utility.c1 = detail::get_number(o, "c1", cfg.utility.c1, "utility");
    cfg.utility.rho = detail::get_number(o, "rho", cfg.utility.rho, "utility");
    cfg.utility.gamma = detail::get_number(o, "gamma", cfg.utility.gamma, "utility");
    if (!(cfg.utility.gamma >= 0.0))
      throw std::invalid_argument("config: utility.gamma must be nonnegative");
  }
  if (j.contains("initial")) {
    const auto& o = j["initial"];
    detail::reject_unknown_keys(o, "initial", {"kind", "path"});
    cfg.initial.kind = detail::get_string(o, "kind", cfg.initial.kind, "initial");
    if (cfg.initial.kind != "uniform" && cfg.initial.kind != "file")
      throw std::invalid_argument("config: initial.kind must be uniform or file");
    cfg.initial.path = detail::get_string(o, "path", cfg.initial.path, "initial");
    if (cfg.initial.kind == "file" && cfg.initial.path.empty())
      throw std::invalid_argument("config: initial.path required for file kind");
  }
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    detail::reject_unknown_keys(o, "outputs", {"dir", "emit"});
    cfg.outputs.dir = detail::get_string(o, "dir", cfg.outputs.dir, "outputs");
    if (o.contains("emit")) {
      if (!o["emit"].is_array())
        throw std::invalid_argument("config: outputs.emit must be an array");
      cfg.outputs.emit.clear();
      for (const auto& e : o["emit"]) {
        if (!e.is_string())
          throw std::invalid_argument("config: outputs.emit entries must be strings");
        std::string name = e.get<std::string>();
        if (name != "phi" && name != "p" && name != "alpha" && name != "report")
          throw std::invalid_argument("config: unknown output '" + name + "'");
        cfg.outputs.emit.push_back(name);
      }
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config parse error in " + path.string() + ": " +
                             e.what());
  }
  return parse_run_config(j);
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["grid"] = {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}};
  j["solver"] = {{"dt", cfg.solver.dt},
                 {"eps", cfg.solver.eps},
                 {"max_iter", cfg.solver.max_iter},
                 {"mode", cfg.solver.mode},
                 {"omega", cfg.solver.omega}};
  j["graphon"] = {{"kind", cfg.graphon.kind},
                  {"theta", cfg.graphon.theta},
                  {"path", cfg.graphon.path},
                  {"normalize", cfg.graphon.normalize}};
  j["rates"] = {{"delta", {{"kind", cfg.delta.kind}, {"value", cfg.delta.value}}},
                {"eta", {{"kind", cfg.eta.kind}, {"value", cfg.eta.value}}}};
  j["utility"] = {{"c0", cfg.utility.c0},
                  {"c1", cfg.utility.c1},
                  {"rho", cfg.utility.rho},
                  {"gamma", cfg.utility.gamma}};
  j["initial"] = {{"kind", cfg.initial.kind}, {"path", cfg.initial.path}};
  j["outputs"] = {{"dir", cfg.outputs.dir}, {"emit", cfg.outputs.emit}};
  return j;
}

}  // namespace glogit
