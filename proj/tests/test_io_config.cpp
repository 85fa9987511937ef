#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "glogit/config.hpp"
#include "glogit/csv.hpp"
#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"

using namespace glogit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("glogit_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

}  // namespace

TEST_CASE("doubles survive the round trip bitwise") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int rep = 0; rep < 2000; ++rep) {
    double v = u(rng);
    CHECK(parse_double(format_double(v)) == v);
  }
  for (double v : {0.0, -0.0, 1e-308, -1e-308, 0.1, 1.0 / 3.0,
                   2.310091861380698, 1e300}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK_THROWS_AS(parse_double("not_a_number"), std::runtime_error);
  CHECK_THROWS_AS(parse_double("1.5x"), std::runtime_error);
  CHECK_THROWS_AS(parse_double(""), std::runtime_error);
}

TEST_CASE("surface csv round trip is bitwise") {
  TempDir tmp;
  Grid g = make_grid(7, 5);
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Field f(g.nx, g.ny);
  for (double& v : f.data()) v = u(rng);
  fs::path p = tmp.path / "phi.csv";
  write_surface_csv(p, "phi", f, g);
  Field back = load_surface_csv(p, g, "phi");
  CHECK(max_abs_diff(f, back) == 0.0);

  // header and shape validation
  CHECK_THROWS_AS(load_surface_csv(p, g, "p"), std::runtime_error);
  Grid wrong = make_grid(7, 6);
  CHECK_THROWS_AS(load_surface_csv(p, wrong, "phi"), std::runtime_error);
}

TEST_CASE("surface csv is ordered type-outer, action-inner") {
  TempDir tmp;
  Grid g = make_grid(2, 2);
  Field f(2, 2);
  f(0, 0) = 1.0; f(1, 0) = 2.0; f(0, 1) = 3.0; f(1, 1) = 4.0;
  fs::path p = tmp.path / "s.csv";
  write_surface_csv(p, "v", f, g);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,v");
  std::getline(in, line);
  CHECK(line == "0.25,0.25,1");
  std::getline(in, line);
  CHECK(line == "0.75,0.25,2");
  std::getline(in, line);
  CHECK(line == "0.25,0.75,3");
  std::getline(in, line);
  CHECK(line == "0.75,0.75,4");
}

TEST_CASE("alpha csv round trip") {
  TempDir tmp;
  Grid g = make_grid(4, 3);
  std::vector<double> alpha = {0.1, 0.2, 0.3};
  std::vector<double> nash = {0.5, 0.4, 0.3};
  fs::path p = tmp.path / "alpha.csv";
  write_alpha_csv(p, g, alpha, nash);
  AlphaTable t = load_alpha_csv(p);
  REQUIRE(t.y.size() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(t.y[j] == g.y[j]);
    CHECK(t.alpha[j] == alpha[j]);
    CHECK(t.alpha_nash[j] == nash[j]);
  }
}

TEST_CASE("kernel csv round trip and validation") {
  TempDir tmp;
  Grid g = make_grid(2, 4);
  GraphonKernel k = build_gaussian(0.3, g);
  fs::path p = tmp.path / "kernel.csv";
  write_kernel_csv(p, k, g);
  GraphonKernel back = load_kernel_csv(p, g, false);
  REQUIRE(back.w.size() == k.w.size());
  for (std::size_t i = 0; i < k.w.size(); ++i) CHECK(back.w[i] == k.w[i]);
  CHECK(back.kind == KernelKind::custom);

  // sparse file: missing entries are zero, 1-based indices
  fs::path sparse = tmp.path / "sparse.csv";
  write_text_file(sparse, "l,j,w\n1,1,4\n2,2,4\n3,3,4\n4,4,4\n");
  GraphonKernel diag = load_kernel_csv(sparse, g, false);
  CHECK(diag.w[0] == 4.0);
  CHECK(diag.w[1] == 0.0);
  CHECK(diag.column_mass[0] == Catch::Approx(1.0).margin(1e-15));

  fs::path dup = tmp.path / "dup.csv";
  write_text_file(dup, "l,j,w\n1,1,1\n1,1,2\n");
  CHECK_THROWS_AS(load_kernel_csv(dup, g, false), std::runtime_error);
  fs::path oob = tmp.path / "oob.csv";
  write_text_file(oob, "l,j,w\n5,1,1\n");
  CHECK_THROWS_AS(load_kernel_csv(oob, g, false), std::runtime_error);
  CHECK_THROWS_AS(load_kernel_csv(tmp.path / "missing.csv", g, false),
                  std::runtime_error);
}

TEST_CASE("run config defaults match the documented values") {
  RunConfig cfg = default_run_config();
  CHECK(cfg.grid.nx == 300);
  CHECK(cfg.grid.ny == 300);
  CHECK(cfg.solver.dt == 0.01);
  CHECK(cfg.solver.eps == 1e-10);
  CHECK(cfg.solver.mode == "pseudo_time");
  CHECK(cfg.graphon.kind == "gaussian");
  CHECK(cfg.graphon.theta == 0.5);
  CHECK(cfg.delta.kind == "constant");
  CHECK(cfg.delta.value == 0.5);
  CHECK(cfg.eta.value == 2.0);
  CHECK(cfg.utility.c0 == Catch::Approx(std::sqrt(2.0)).margin(1e-15));
  CHECK(cfg.utility.c1 == Catch::Approx(std::sqrt(10.0)).margin(1e-15));
  CHECK(cfg.utility.rho == 0.05);
  CHECK(cfg.utility.gamma == 1e-9);
  CHECK(cfg.initial.kind == "uniform");
}

TEST_CASE("config parsing rejects unknown keys everywhere") {
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"grids": {"nx": 4}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"grid": {"nx": 4, "nz": 2}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"solver": {"dt": 0.01, "step": 2}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"rates": {"delta": {"kind": "constant", "val": 1}}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"utility": {"c2": 1}})")),
                  std::invalid_argument);
}

TEST_CASE("config parsing validates types and enums") {
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"solver": {"mode": "implicit"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"solver": {"dt": "fast"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"graphon": {"kind": "laplace"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"graphon": {"kind": "gaussian", "theta": -1}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"graphon": {"kind": "custom"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"rates": {"delta": {"kind": "constant", "value": 0}}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"rates": {"delta": {"kind": "quadratic"}}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"initial": {"kind": "file"}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(
                      R"({"outputs": {"emit": ["phi", "psi"]}})")),
                  std::invalid_argument);
  // partial configs keep defaults elsewhere
  RunConfig cfg = parse_run_config(nlohmann::json::parse(
      R"({"grid": {"nx": 16, "ny": 8}, "rates": {"eta": {"kind": "constant", "value": 200}}})"));
  CHECK(cfg.grid.nx == 16);
  CHECK(cfg.grid.ny == 8);
  CHECK(cfg.eta.value == 200.0);
  CHECK(cfg.delta.value == 0.5);
}

TEST_CASE("presets expand to the documented cases and are pure") {
  struct Expected {
    const char* name;
    const char* delta_kind;
    double delta_value;
    double eta_value;
  };
  for (const auto& e :
       {Expected{"A", "constant", 0.5, 2.0}, Expected{"B", "constant", 0.5, 200.0},
        Expected{"C", "constant", 0.005, 2.0},
        Expected{"D", "constant", 0.005, 200.0},
        Expected{"R", "linear_R", 0.0, 200.0},
        Expected{"M", "linear_M", 0.0, 200.0}}) {
    RunConfig cfg = default_run_config();
    apply_preset(cfg, e.name);
    CHECK(cfg.delta.kind == e.delta_kind);
    if (std::string(e.delta_kind) == "constant")
      CHECK(cfg.delta.value == e.delta_value);
    CHECK(cfg.eta.kind == "constant");
    CHECK(cfg.eta.value == e.eta_value);
    CHECK(cfg.graphon.kind == "gaussian");
    CHECK(cfg.graphon.theta == 0.5);

    RunConfig again = default_run_config();
    apply_preset(again, e.name);
    CHECK(run_config_to_json(cfg).dump() == run_config_to_json(again).dump());
  }
  RunConfig cfg = default_run_config();
  CHECK_THROWS_AS(apply_preset(cfg, "Z"), std::invalid_argument);
}

TEST_CASE("cost sets expand exactly") {
  RunConfig cfg = default_run_config();
  apply_costs(cfg, "high");
  CHECK(cfg.utility.c0 == 2.0);
  CHECK(cfg.utility.c1 == Catch::Approx(std::sqrt(14.0)).margin(1e-15));
  apply_costs(cfg, "default");
  CHECK(cfg.utility.c0 == Catch::Approx(std::sqrt(2.0)).margin(1e-15));
  CHECK(cfg.utility.c1 == Catch::Approx(std::sqrt(10.0)).margin(1e-15));
  CHECK_THROWS_AS(apply_costs(cfg, "medium"), std::invalid_argument);
}

TEST_CASE("config json echo parses back to the same config") {
  RunConfig cfg = default_run_config();
  apply_preset(cfg, "R");
  cfg.grid.nx = 32;
  cfg.solver.omega = 0.25;
  RunConfig back = parse_run_config(run_config_to_json(cfg));
  CHECK(run_config_to_json(back).dump() == run_config_to_json(cfg).dump());
}
