#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "glogit/field.hpp"
#include "glogit/grid.hpp"
#include "glogit/hjb.hpp"
#include "glogit/scenario.hpp"

namespace glogit {

// Best-response map of the classical logit dynamic: per column,
// L[m]_j = softmax(eta_j * coupled utility of m). Always a unit-mass density.
inline MeasureField logit_map(const MeasureField& m, const Scenario& s,
                              const Grid& g) {
  if (m.p.nx() != g.nx || m.p.ny() != g.ny)
    throw std::invalid_argument("logit_map: field/grid mismatch");
  Field util = coupled_utility(s, m.p, g);
  Field out(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    softmax_density(util.col(j), s.rates.eta[j], g.dx, out.col(j));
  return MeasureField{std::move(out), MeasureRole::pstar};
}

struct FlowState {
  MeasureField p;
  double t = 0.0;
};

// Explicit Euler step of the logit flow: p <- (1 - dtau) p + dtau L[p].
// Convex for dtau in (0,1], so nonnegativity and unit mass are preserved
// exactly.
inline FlowState flow_step(const FlowState& state, double dtau,
                           const Scenario& s, const Grid& g) {
  if (!(dtau > 0.0) || dtau > 1.0)
    throw std::invalid_argument("flow_step: dtau must lie in (0, 1]");
  MeasureField L = logit_map(state.p, s, g);
  Field next(g.nx, g.ny);
  auto a = state.p.p.data();
  auto b = L.p.data();
  auto c = next.data();
  for (std::size_t k = 0; k < c.size(); ++k)
    c[k] = (1.0 - dtau) * a[k] + dtau * b[k];
  return FlowState{MeasureField{std::move(next), MeasureRole::mu_t},
                   state.t + dtau};
}

struct LogitEquilibriumResult {
  MeasureField p;
  double residual = 0.0;
  long steps = 0;
};

/**
 * Damped iteration of the logit flow from mu0 until max |L[p] - p| <= tol.
 * dtau must satisfy an explicit-Euler stability bound in the stiffness of
 * the aggregate feedback; the 0.5 default covers mild sharpness, sharp-logit
 * runs need a smaller value. Throws ConvergenceError at max_steps.
 */
inline LogitEquilibriumResult logit_equilibrium(const Scenario& s,
                                                const Grid& g, double tol,
                                                long max_steps,
                                                double dtau = 0.5) {
  if (!(tol > 0.0))
    throw std::invalid_argument("logit_equilibrium: tol must be positive");
  if (!(dtau > 0.0) || dtau > 1.0)
    throw std::invalid_argument("logit_equilibrium: dtau must lie in (0, 1]");
  FlowState state{MeasureField{s.mu0.p, MeasureRole::mu_t}, 0.0};
  long steps = 0;
  while (true) {
    MeasureField L = logit_map(state.p, s, g);
    double res = max_abs_diff(L.p, state.p.p);
    if (res <= tol)
      return LogitEquilibriumResult{std::move(state.p), res, steps};
    if (steps >= max_steps)
      throw ConvergenceError(
          "logit_equilibrium: no fixed point within " +
          std::to_string(max_steps) + " steps, residual " + std::to_string(res));
    auto a = state.p.p.data();
    auto b = L.p.data();
    for (std::size_t k = 0; k < a.size(); ++k)
      a[k] = (1.0 - dtau) * a[k] + dtau * b[k];
    state.t += dtau;
    ++steps;
  }
}

struct DiscountedLogitResult {
  MeasureField m;
  double residual = 0.0;
  long iterations = 0;
};

/**
 * Fixed point of the discounted logit dynamic,
 *
 *   m_j = delta_j/(delta_j+1) mu0_j + 1/(delta_j+1) softmax(eta_j U(., y_j, m)),
 *
 * by damped iteration m <- (1-omega) m + omega F[m] from mu0. Every iterate
 * is a convex combination of unit-mass densities, so mass is preserved
 * exactly. The same stability caveat on omega applies as for
 * logit_equilibrium. Throws ConvergenceError at max_steps.
 */
inline DiscountedLogitResult discounted_logit_solve(const Scenario& s,
                                                    const Grid& g, double tol,
                                                    long max_steps,
                                                    double omega = 0.5) {
  if (!(tol > 0.0))
    throw std::invalid_argument("discounted_logit_solve: tol must be positive");
  if (!(omega > 0.0) || omega > 1.0)
    throw std::invalid_argument("discounted_logit_solve: omega must lie in (0, 1]");
  MeasureField m{s.mu0.p, MeasureRole::m};
  long iters = 0;
  while (true) {
    MeasureField L = logit_map(m, s, g);
    Field F(g.nx, g.ny);
    for (int j = 0; j < g.ny; ++j) {
      double d = s.rates.delta[j];
      double a = d / (d + 1.0);
      double b = 1.0 / (d + 1.0);
      auto mu = s.mu0.p.col(j);
      auto lc = L.p.col(j);
      auto fc = F.col(j);
      for (int i = 0; i < g.nx; ++i) fc[i] = a * mu[i] + b * lc[i];
    }
    double res = max_abs_diff(F, m.p);
    if (res <= tol)
      return DiscountedLogitResult{MeasureField{std::move(F), MeasureRole::m},
                                   res, iters};
    if (iters >= max_steps)
      throw ConvergenceError(
          "discounted_logit_solve: no fixed point within " +
          std::to_string(max_steps) + " iterations, residual " +
          std::to_string(res));
    auto a = m.p.data();
    auto b = F.data();
    for (std::size_t k = 0; k < a.size(); ++k)
      a[k] = (1.0 - omega) * a[k] + omega * b[k];
    ++iters;
  }
}

// Sharp-logit benchmark for the harvest game: the aggregate that maximizes
// the quasi-potential 2 sqrt(a) - c(y) a on [0,1], i.e. min(1/c(y)^2, 1).
inline double nash_alpha(double y, const FisheryParams& p) {
  double c = cost(y, p);
  if (!(c > 0.0)) throw std::domain_error("nash_alpha: cost must be positive");
  return std::min(1.0 / (c * c), 1.0);
}

}  // namespace glogit
