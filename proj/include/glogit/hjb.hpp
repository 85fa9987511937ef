#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "glogit/field.hpp"
#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"
#include "glogit/scenario.hpp"

namespace glogit {

// Thrown when an iterate stops being finite; carries the iterate index.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iterate, const std::string& what_arg)
      : std::runtime_error(what_arg), iterate_(iterate) {}
  long iterate() const { return iterate_; }

 private:
  long iterate_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// =========================================================================
// Logit density and log-sum-exp
// =========================================================================

// ln( sum_k exp(eta v_k) dx ), stabilized by shifting out max v. The shift
// makes the value finite for any finite input and exact under v -> v + c.
inline double column_logsumexp(std::span<const double> values, double eta,
                               double dx) {
  double m = values[0];
  for (double v : values) m = std::max(m, v);
  double s = 0.0;
  for (double v : values) s += std::exp(eta * (v - m));
  return eta * m + std::log(s * dx);
}

// Gibbs density over action cells: p_i = exp(eta v_i) / sum_k exp(eta v_k) dx,
// evaluated with the same max shift. Column mass is 1 up to rounding and the
// result is invariant under v -> v + c.
inline void softmax_density(std::span<const double> values, double eta,
                            double dx, std::span<double> out) {
  double m = values[0];
  for (double v : values) m = std::max(m, v);
  double s = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = std::exp(eta * (values[k] - m));
    s += out[k];
  }
  double denom = s * dx;
  for (std::size_t k = 0; k < values.size(); ++k) out[k] /= denom;
}

inline std::vector<double> softmax_density(std::span<const double> values,
                                           double eta, double dx) {
  std::vector<double> out(values.size());
  softmax_density(values, eta, dx, out);
  return out;
}

// One value-function column to its logit choice density.
inline std::vector<double> logit_density(std::span<const double> phi_col,
                                         double eta, const Grid& g) {
  if (static_cast<int>(phi_col.size()) != g.nx)
    throw std::invalid_argument("logit_density: column size mismatch");
  if (!(eta > 0.0))
    throw std::invalid_argument("logit_density: eta must be positive");
  return softmax_density(phi_col, eta, g.dx);
}

// Discounted occupation measure induced by a value field:
// m_j = delta_j/(delta_j+1) mu0_j + 1/(delta_j+1) pstar_j(phi).
inline MeasureField compute_m(const ValueField& vf, const Scenario& s,
                              const Grid& g) {
  if (vf.phi.nx() != g.nx || vf.phi.ny() != g.ny)
    throw std::invalid_argument("compute_m: field/grid mismatch");
  Field m(g.nx, g.ny);
  std::vector<double> pstar(g.nx);
  for (int j = 0; j < g.ny; ++j) {
    softmax_density(vf.phi.col(j), s.rates.eta[j], g.dx, pstar);
    double d = s.rates.delta[j];
    double a = d / (d + 1.0);
    double b = 1.0 / (d + 1.0);
    auto mu = s.mu0.p.col(j);
    auto mc = m.col(j);
    for (int i = 0; i < g.nx; ++i) mc[i] = a * mu[i] + b * pstar[i];
  }
  return MeasureField{std::move(m), MeasureRole::m};
}

// =========================================================================
// Coupled utility of a value field
// =========================================================================

struct CoupledUtility {
  Field utility;                 // graphon-coupled surface
  std::vector<double> argument;  // per-type aggregate fed to the local model
};

/**
 * Evaluates the graphon-coupled utility induced by a value field. The
 * fishery goes through the occupation measure: m(phi), then the mean action
 * per type, then the harvest utility. The general model feeds g its
 * softmax-weighted h-moment directly,
 *
 *   v_j = 1/(delta_j+1) * sum_k h(x_k) e^{eta_j phi_kj} dx
 *                         / sum_k e^{eta_j phi_kj} dx ,
 *
 * max-shifted like every other exponential in this module.
 */
inline CoupledUtility utility_from_phi(const Scenario& s, const ValueField& vf,
                                       const Grid& g) {
  CoupledUtility cu;
  if (is_fishery(s)) {
    MeasureField m = compute_m(vf, s, g);
    cu.argument = alpha_from_measure(m.p, g);
  } else {
    const auto& gu = std::get<GeneralUtility>(s.utility);
    cu.argument.resize(g.ny);
    for (int j = 0; j < g.ny; ++j) {
      auto col = vf.phi.col(j);
      double eta = s.rates.eta[j];
      double mx = col[0];
      for (double v : col) mx = std::max(mx, v);
      double num = 0.0;
      double den = 0.0;
      for (int i = 0; i < g.nx; ++i) {
        double e = std::exp(eta * (col[i] - mx));
        num += gu.h(g.x[i]) * e;
        den += e;
      }
      double d = s.rates.delta[j];
      cu.argument[j] = (num * g.dx) / (den * g.dx) / (d + 1.0);
    }
  }
  if (is_fishery(s)) {
    cu.utility = fishery_coupled_utility(s, cu.argument, g);
  } else {
    Field u = local_utility(s, cu.argument, g);
    cu.utility = convolve(u, s.kernel, g);
  }
  return cu;
}

// =========================================================================
// Residual
// =========================================================================

/**
 * Fixed-point residual with the utility surface held frozen:
 *
 *   G[i][j] = phi[i][j] - util[i][j]
 *             - (lse_j - eta_j phi[i][j]) / (delta_j eta_j)
 *
 * with one shared lse_j = ln(sum_k e^{eta_j phi_kj} dx) per column. The
 * log term of row i is the column log-sum-exp relative to phi[i][j]; writing
 * it this way costs one pass per column instead of one per cell.
 */
inline Field hjb_residual_frozen(const ValueField& vf, const Field& util,
                                 const RateProfiles& rates, const Grid& g) {
  if (vf.phi.nx() != g.nx || vf.phi.ny() != g.ny || !vf.phi.same_shape(util))
    throw std::invalid_argument("hjb_residual_frozen: shape mismatch");
  Field r(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j) {
    double eta = rates.eta[j];
    double delta = rates.delta[j];
    double lse = column_logsumexp(vf.phi.col(j), eta, g.dx);
    auto pc = vf.phi.col(j);
    auto uc = util.col(j);
    auto rc = r.col(j);
    double inv = 1.0 / (delta * eta);
    for (int i = 0; i < g.nx; ++i)
      rc[i] = pc[i] - uc[i] - inv * (lse - eta * pc[i]);
  }
  return r;
}

// Residual of the fully coupled system.
inline Field hjb_residual(const ValueField& vf, const Scenario& s,
                          const Grid& g) {
  CoupledUtility cu = utility_from_phi(s, vf, g);
  return hjb_residual_frozen(vf, cu.utility, s.rates, g);
}

// =========================================================================
// Solver
// =========================================================================

enum class SolverMode { pseudo_time, damped_picard };

struct SolverConfig {
  double dt = 0.01;          // pseudo-time step
  double eps = 1e-10;        // stop when max |phi_new - phi| <= eps
  long max_iter = 500000;
  SolverMode mode = SolverMode::pseudo_time;
  double omega = 0.5;        // damped_picard relaxation weight
};

// Slack allowed on the min/max principle at a converged iterate.
inline constexpr double kBoundTol = 1e-8;

struct SolveResult {
  ValueField phi;
  MeasureField m;
  std::vector<double> alpha;  // final per-type utility argument
  long iterations = 0;
  double final_increment = 0.0;
  double final_residual = 0.0;
  bool converged = false;
  // Min/max principle at the converged utility surface:
  // min util - tol <= phi <= max util + tol.
  double utility_min = 0.0;
  double utility_max = 0.0;
  double bound_violation = 0.0;
  bool bound_ok = false;
};

namespace detail {

struct LoopStatus {
  long iterations = 0;
  double increment = std::numeric_limits<double>::infinity();
  bool converged = false;
};

[[noreturn]] inline void throw_divergence(long iterations) {
  throw DivergenceError(iterations, "solve: non-finite iterate at iteration " +
                                        std::to_string(iterations));
}

// Generic damped loop: recompute the coupled utility, relax on the frozen
// residual.
inline LoopStatus solve_loop_general(const Scenario& s, const Grid& g,
                                     const SolverConfig& cfg,
                                     const std::vector<double>& w,
                                     ValueField& vf) {
  LoopStatus st;
  while (st.iterations < cfg.max_iter) {
    CoupledUtility cu = utility_from_phi(s, vf, g);
    Field res = hjb_residual_frozen(vf, cu.utility, s.rates, g);
    ++st.iterations;
    st.increment = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      auto pc = vf.phi.col(j);
      auto rc = res.col(j);
      for (int i = 0; i < g.nx; ++i) {
        double step = w[j] * rc[i];
        pc[i] -= step;
        st.increment = std::max(st.increment, std::abs(step));
      }
    }
    if (!all_finite(vf.phi)) throw_divergence(st.iterations);
    if (st.increment <= cfg.eps) {
      st.converged = true;
      break;
    }
  }
  return st;
}

// Fishery hot loop, same update as the generic one up to floating-point
// association. One exp pass per column yields the log-sum-exp and the logit
// mean action together, and the x-linear local utility turns the graphon
// convolution into a type-vector kernel average, so an iteration costs
// O(nx ny + ny^2) instead of O(nx ny^2) plus two exp passes. The routine
// delta = 0.005 cases take O(1e5) iterations, which is only affordable here.
inline LoopStatus solve_loop_fishery(const Scenario& s, const Grid& g,
                                     const SolverConfig& cfg,
                                     const std::vector<double>& w,
                                     ValueField& vf) {
  const FisheryParams& fp = fishery_params(s);
  const int nx = g.nx, ny = g.ny;
  std::vector<double> xbar0(ny), cost_y(ny), lse(ny), slope(ny), q(ny);
  for (int j = 0; j < ny; ++j) {
    auto mu = s.mu0.p.col(j);
    double acc = 0.0;
    for (int i = 0; i < nx; ++i) acc += g.x[i] * mu[i];
    xbar0[j] = acc * g.dx;
    cost_y[j] = cost(g.y[j], fp);
  }
  LoopStatus st;
  while (st.iterations < cfg.max_iter) {
    for (int j = 0; j < ny; ++j) {
      auto pc = vf.phi.col(j);
      double eta = s.rates.eta[j];
      double mx = pc[0];
      for (int i = 1; i < nx; ++i) mx = std::max(mx, pc[i]);
      double ssum = 0.0, xsum = 0.0;
      for (int i = 0; i < nx; ++i) {
        double e = std::exp(eta * (pc[i] - mx));
        ssum += e;
        xsum += g.x[i] * e;
      }
      lse[j] = eta * mx + std::log(ssum * g.dx);
      double d = s.rates.delta[j];
      double alpha = d / (d + 1.0) * xbar0[j] + (xsum / ssum) / (d + 1.0);
      slope[j] = gain(alpha, fp) - cost_y[j];
    }
    if (s.kernel.kind == KernelKind::identity) {
      q = slope;
    } else {
      for (int j = 0; j < ny; ++j) {
        const double* col = s.kernel.w.data() + static_cast<std::size_t>(j) * ny;
        double acc = 0.0;
        for (int l = 0; l < ny; ++l) acc += slope[l] * col[l];
        q[j] = acc * g.dy;
      }
    }
    ++st.iterations;
    st.increment = 0.0;
    for (int j = 0; j < ny; ++j) {
      auto pc = vf.phi.col(j);
      double eta = s.rates.eta[j];
      double inv = 1.0 / (s.rates.delta[j] * eta);
      double qj = q[j], wj = w[j], lsej = lse[j];
      for (int i = 0; i < nx; ++i) {
        double res = pc[i] - g.x[i] * qj - inv * (lsej - eta * pc[i]);
        double step = wj * res;
        pc[i] -= step;
        st.increment = std::max(st.increment, std::abs(step));
      }
    }
    if (!all_finite(vf.phi)) throw_divergence(st.iterations);
    if (st.increment <= cfg.eps) {
      st.converged = true;
      break;
    }
  }
  return st;
}

}  // namespace detail

/**
 * Damped fixed-point iteration from phi = 0. pseudo_time scales the residual
 * per column by delta_j * dt (the forward-Euler flow of the system); damped
 * Picard applies a flat weight omega. Stops when the sup-norm increment
 * drops to eps; a non-finite iterate aborts with its index; hitting max_iter
 * returns with converged = false rather than throwing. Final diagnostics
 * (residual, m, alpha, bound check) are recomputed through the reference
 * composition.
 */
inline SolveResult solve(const Scenario& s, const Grid& g,
                         const SolverConfig& cfg = {}) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("solve: dt must be positive");
  if (!(cfg.omega > 0.0) || cfg.omega > 1.0)
    throw std::invalid_argument("solve: omega must lie in (0, 1]");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("solve: eps must be positive");

  std::vector<double> w(g.ny);
  for (int j = 0; j < g.ny; ++j)
    w[j] = cfg.mode == SolverMode::pseudo_time ? s.rates.delta[j] * cfg.dt
                                               : cfg.omega;
  SolveResult out;
  out.phi.phi = Field(g.nx, g.ny, 0.0);
  detail::LoopStatus st =
      is_fishery(s) ? detail::solve_loop_fishery(s, g, cfg, w, out.phi)
                    : detail::solve_loop_general(s, g, cfg, w, out.phi);
  out.converged = st.converged;
  out.iterations = st.iterations;
  out.final_increment = st.increment;

  CoupledUtility cu = utility_from_phi(s, out.phi, g);
  out.final_residual = max_abs(hjb_residual_frozen(out.phi, cu.utility, s.rates, g));
  out.alpha = cu.argument;
  out.m = compute_m(out.phi, s, g);
  out.utility_min = field_min(cu.utility);
  out.utility_max = field_max(cu.utility);
  double lo = out.utility_min - field_min(out.phi.phi);
  double hi = field_max(out.phi.phi) - out.utility_max;
  out.bound_violation = std::max({0.0, lo, hi});
  out.bound_ok = out.bound_violation <= kBoundTol;
  return out;
}

// =========================================================================
// A priori checkers
// =========================================================================

// Sufficient smallness condition for the coupled system to be a sup-norm
// contraction. Certifies uniqueness when it holds; says nothing when it
// fails (the solver may still converge).
struct ContractionReport {
  double value = 0.0;
  bool holds = false;
};

inline ContractionReport contraction_check(double ubar, double lipschitz_u,
                                           const RateProfiles& rates) {
  double eb = rates.eta_max;
  double dlo = rates.delta_min;
  double dhi = rates.delta_max;
  double growth = eb * (dhi / dlo) * ubar;
  ContractionReport rep;
  rep.value = (2.0 * eb * lipschitz_u / (dlo + 1.0)) * std::exp(2.0 * growth) +
              (1.0 / dlo) * (1.0 + std::exp(growth));
  rep.holds = rep.value > 0.0 && rep.value < 1.0;
  return rep;
}

// One type's aggregate-feedback smallness condition:
// (hbar/(delta+1)) L_g eta W_jj dy <= 1/delta.
struct MonotonicityRow {
  int j = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

inline MonotonicityRow monotonicity_row(double h_bound, double lipschitz_g,
                                        double eta, double delta, double w_jj,
                                        double dy, int j = 0) {
  MonotonicityRow row;
  row.j = j;
  row.lhs = h_bound / (delta + 1.0) * lipschitz_g * eta * w_jj * dy;
  row.rhs = 1.0 / delta;
  row.holds = row.lhs <= row.rhs;
  return row;
}

inline std::vector<MonotonicityRow> monotonicity_check(const Scenario& s,
                                                       const GraphonKernel& k,
                                                       const Grid& g) {
  if (k.ny != g.ny)
    throw std::invalid_argument("monotonicity_check: kernel/grid mismatch");
  double h_bound = 0.0;
  double lip_g = 0.0;
  if (is_fishery(s)) {
    h_bound = 1.0;  // h(q) = q on [0,1]
    lip_g = fishery_lipschitz_g(s, g);
  } else {
    const auto& gu = std::get<GeneralUtility>(s.utility);
    if (!(gu.h_bound > 0.0) || !(gu.lipschitz_g > 0.0))
      throw std::invalid_argument(
          "monotonicity_check: general utility needs declared h_bound and lipschitz_g");
    h_bound = gu.h_bound;
    lip_g = gu.lipschitz_g;
  }
  std::vector<MonotonicityRow> rows(g.ny);
  for (int j = 0; j < g.ny; ++j)
    rows[j] = monotonicity_row(h_bound, lip_g, s.rates.eta[j], s.rates.delta[j],
                               k.w[detail::kernel_index(j, j, g.ny)], g.dy, j);
  return rows;
}

}  // namespace glogit
