#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"
#include "glogit/logit.hpp"
#include "glogit/scenario.hpp"

using namespace glogit;

namespace {

FisheryParams default_params() {
  return FisheryParams{std::sqrt(2.0), std::sqrt(10.0), 0.05, 1e-9};
}

RateProfiles const_rates(const Grid& g, double delta, double eta) {
  return make_rate_profiles(std::vector<double>(g.ny, delta),
                            std::vector<double>(g.ny, eta), g);
}

// Utility that ignores the measure entirely: u(x) = f(x).
Scenario frozen_utility_scenario(const Grid& g, double delta, double eta,
                                 std::vector<double> values_by_cell) {
  GeneralUtility gu;
  double dx = g.dx;
  int nx = g.nx;
  gu.g = [values_by_cell, dx, nx](double x, double, double) {
    int i = std::clamp(static_cast<int>(x / dx), 0, nx - 1);
    return values_by_cell[i];
  };
  gu.h = [](double q) { return q; };
  gu.h_bound = 1.0;
  gu.lipschitz_h = 1.0;
  gu.lipschitz_g = 1e-300;  // constant in the aggregate
  gu.g_bound = 1.0;
  return make_general_scenario(g, const_rates(g, delta, eta), gu,
                               build_identity(g));
}

}  // namespace

TEST_CASE("logit map with frozen utility matches the softmax oracle") {
  Grid g = make_grid(2, 1);
  Scenario s = frozen_utility_scenario(g, 1.0, 1.0, {0.0, std::log(2.0)});
  MeasureField m = make_uniform_measure(g);
  MeasureField L = logit_map(m, s, g);
  CHECK(L.p(0, 0) == Catch::Approx(2.0 / 3.0).margin(1e-14));
  CHECK(L.p(1, 0) == Catch::Approx(4.0 / 3.0).margin(1e-14));
  CHECK_NOTHROW(check_measure(L, g));
}

TEST_CASE("flow step is a convex combination") {
  Grid g = make_grid(16, 4);
  Scenario s = make_fishery_scenario(g, const_rates(g, 0.5, 2.0),
                                     default_params(), build_identity(g));
  FlowState state{make_uniform_measure(g, MeasureRole::mu_t), 0.0};
  FlowState next = flow_step(state, 0.25, s, g);
  CHECK(next.t == 0.25);
  CHECK_NOTHROW(check_measure(next.p, g));
  MeasureField L = logit_map(state.p, s, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      CHECK(next.p.p(i, j) ==
            Catch::Approx(0.75 * state.p.p(i, j) + 0.25 * L.p(i, j)).margin(1e-15));

  FlowState jump = flow_step(state, 1.0, s, g);
  CHECK(max_abs_diff(jump.p.p, L.p) == 0.0);

  CHECK_THROWS_AS(flow_step(state, 0.0, s, g), std::invalid_argument);
  CHECK_THROWS_AS(flow_step(state, 1.5, s, g), std::invalid_argument);
}

TEST_CASE("logit equilibrium with frozen utility lands in one full step") {
  Grid g = make_grid(8, 2);
  Scenario s = frozen_utility_scenario(g, 1.0, 2.0,
                                       {0.1, 0.5, 0.3, 0.9, 0.2, 0.8, 0.4, 0.6});
  LogitEquilibriumResult r = logit_equilibrium(s, g, 1e-12, 100, 1.0);
  CHECK(r.steps == 1);
  CHECK(r.residual <= 1e-12);
  MeasureField L = logit_map(r.p, s, g);
  CHECK(max_abs_diff(L.p, r.p.p) <= 1e-12);
}

TEST_CASE("logit equilibrium satisfies the fixed-point property") {
  Grid g = make_grid(24, 6);
  Scenario s = make_fishery_scenario(g, const_rates(g, 0.5, 2.0),
                                     default_params(), build_gaussian(0.5, g));
  LogitEquilibriumResult r = logit_equilibrium(s, g, 1e-11, 20000, 0.5);
  CHECK(r.residual <= 1e-11);
  CHECK_NOTHROW(check_measure(r.p, g));
  MeasureField L = logit_map(r.p, s, g);
  CHECK(max_abs_diff(L.p, r.p.p) <= 1e-11);
}

TEST_CASE("logit equilibrium throws on step exhaustion") {
  Grid g = make_grid(8, 2);
  Scenario s = make_fishery_scenario(g, const_rates(g, 0.5, 2.0),
                                     default_params(), build_identity(g));
  CHECK_THROWS_AS(logit_equilibrium(s, g, 1e-14, 2, 0.5), ConvergenceError);
}

TEST_CASE("discounted logit with frozen utility blends in one step") {
  Grid g = make_grid(8, 2);
  Scenario s = frozen_utility_scenario(g, 1.0, 2.0,
                                       {0.1, 0.5, 0.3, 0.9, 0.2, 0.8, 0.4, 0.6});
  DiscountedLogitResult r = discounted_logit_solve(s, g, 1e-13, 100, 1.0);
  CHECK(r.iterations == 1);
  MeasureField L = logit_map(r.m, s, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      CHECK(r.m.p(i, j) ==
            Catch::Approx(0.5 * s.mu0.p(i, j) + 0.5 * L.p(i, j)).margin(1e-14));
}

TEST_CASE("discounted logit fixed point and exact mass") {
  Grid g = make_grid(32, 8);
  Scenario s = make_fishery_scenario(g, const_rates(g, 0.5, 2.0),
                                     default_params(), build_gaussian(0.5, g));
  DiscountedLogitResult r = discounted_logit_solve(s, g, 1e-11, 50000, 0.5);
  CHECK(r.residual <= 1e-11);
  CHECK(max_column_mass_dev(r.m.p, g) <= 1e-12);
  // fixed point: m = delta/(delta+1) mu0 + 1/(delta+1) L[m]
  MeasureField L = logit_map(r.m, s, g);
  for (int j = 0; j < g.ny; ++j) {
    double d = s.rates.delta[j];
    for (int i = 0; i < g.nx; ++i) {
      double blend = d / (d + 1.0) * s.mu0.p(i, j) + 1.0 / (d + 1.0) * L.p(i, j);
      CHECK(r.m.p(i, j) == Catch::Approx(blend).margin(1e-10));
    }
  }
}

TEST_CASE("nash alpha frozen values and brute force oracle") {
  FisheryParams p = default_params();
  CHECK(nash_alpha(0.0, p) ==
        Catch::Approx(1.0 / (cost(0.0, p) * cost(0.0, p))).margin(1e-15));
  FisheryParams unit{1.0, 1.0, 0.0, 0.0};  // cost == 1 everywhere
  CHECK(nash_alpha(0.5, unit) == 1.0);
  FisheryParams cheap{0.5, 0.5, 0.0, 0.0};  // cost 1/2: unconstrained optimum 4
  CHECK(nash_alpha(0.5, cheap) == 1.0);     // clamped to the action range
  FisheryParams sqrt2{std::sqrt(2.0), std::sqrt(2.0), 0.0, 0.0};
  CHECK(nash_alpha(0.3, sqrt2) == Catch::Approx(0.5).margin(1e-14));
  FisheryParams sqrt10{std::sqrt(10.0), std::sqrt(10.0), 0.0, 0.0};
  CHECK(nash_alpha(0.9, sqrt10) == Catch::Approx(0.1).margin(1e-14));

  // maximize the quasi-potential 2 sqrt(a) - c a over a fine grid of [0,1]
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> uc(0.6, 4.0);
  for (int rep = 0; rep < 25; ++rep) {
    double c = uc(rng);
    FisheryParams q{c, c, 0.0, 0.0};
    double best_a = 0.0, best_v = -1e300;
    for (int k = 0; k <= 2000000; ++k) {
      double a = k / 2000000.0;
      double v = 2.0 * std::sqrt(a) - c * a;
      if (v > best_v) {
        best_v = v;
        best_a = a;
      }
    }
    CHECK(nash_alpha(0.5, q) == Catch::Approx(best_a).margin(1e-5));
  }
}

TEST_CASE("nash alpha rejects nonpositive cost") {
  FisheryParams p{-2.0, -2.0, 0.0, 0.0};
  CHECK_THROWS_AS(nash_alpha(0.5, p), std::domain_error);
}
