#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "glogit/field.hpp"
#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"

namespace glogit {

// =========================================================================
// Rate profiles
// =========================================================================

// Per-type exit rate delta_j and logit sharpness eta_j, both positive, with
// their envelopes cached for the checkers.
struct RateProfiles {
  std::vector<double> delta;
  std::vector<double> eta;
  double delta_min = 0.0;
  double delta_max = 0.0;
  double eta_min = 0.0;
  double eta_max = 0.0;
};

inline RateProfiles make_rate_profiles(std::vector<double> delta,
                                       std::vector<double> eta,
                                       const Grid& g) {
  if (static_cast<int>(delta.size()) != g.ny ||
      static_cast<int>(eta.size()) != g.ny)
    throw std::invalid_argument("make_rate_profiles: size does not match ny");
  for (double d : delta)
    if (!(d > 0.0) || !std::isfinite(d))
      throw std::invalid_argument("make_rate_profiles: delta must be positive");
  for (double e : eta)
    if (!(e > 0.0) || !std::isfinite(e))
      throw std::invalid_argument("make_rate_profiles: eta must be positive");
  RateProfiles r;
  r.delta = std::move(delta);
  r.eta = std::move(eta);
  r.delta_min = *std::min_element(r.delta.begin(), r.delta.end());
  r.delta_max = *std::max_element(r.delta.begin(), r.delta.end());
  r.eta_min = *std::min_element(r.eta.begin(), r.eta.end());
  r.eta_max = *std::max_element(r.eta.begin(), r.eta.end());
  return r;
}

enum class ProfileKind { constant, linear_R, linear_M };

// Rate profile over types. The linear kinds ramp between 0.005 and 0.1:
// linear_R decreases with y (upstream types discount less), linear_M is its
// mirror. Constant requires a positive value.
inline std::vector<double> delta_profile(ProfileKind kind, const Grid& g,
                                         double value = 0.0) {
  std::vector<double> out(g.ny);
  switch (kind) {
    case ProfileKind::constant:
      if (!(value > 0.0) || !std::isfinite(value))
        throw std::invalid_argument("delta_profile: constant must be positive");
      for (int j = 0; j < g.ny; ++j) out[j] = value;
      break;
    case ProfileKind::linear_R:
      for (int j = 0; j < g.ny; ++j) out[j] = 0.005 + 0.095 * (1.0 - g.y[j]);
      break;
    case ProfileKind::linear_M:
      for (int j = 0; j < g.ny; ++j) out[j] = 0.005 + 0.095 * g.y[j];
      break;
  }
  return out;
}

// =========================================================================
// Utility models
// =========================================================================

// Harvest game: u(x,y,m) = x * (gain(alpha_y) - cost(y)) with effort price
// cost(y) = c0 + (c1-c0)/2 * (1 + tanh(rho (y - 1/2))) and regularized gain
// gain(a) = 1/sqrt(a + gamma).
struct FisheryParams {
  double c0 = 0.0;
  double c1 = 0.0;
  double rho = 0.0;
  double gamma = 0.0;
};

inline double cost(double y, const FisheryParams& p) {
  return p.c0 + 0.5 * (p.c1 - p.c0) * (1.0 + std::tanh(p.rho * (y - 0.5)));
}

inline double gain(double alpha, const FisheryParams& p) {
  double a = alpha + p.gamma;
  if (!(a > 0.0))
    throw std::domain_error("gain: alpha + gamma must be positive");
  return 1.0 / std::sqrt(a);
}

struct FisheryUtility {
  FisheryParams params;
};

// General aggregative utility u = g(x, y, v) where v is the h-moment of the
// logit component of the measure (the mu0 contribution is absorbed into g).
// Lipschitz constants and bounds are declared by the caller; the checkers
// consume them.
struct GeneralUtility {
  std::function<double(double, double, double)> g;
  std::function<double(double)> h;
  double lipschitz_g = 0.0;
  double lipschitz_h = 0.0;
  double g_bound = 0.0;  // sup |g|
  double h_bound = 0.0;  // sup |h| over the action domain
};

struct Scenario {
  RateProfiles rates;
  MeasureField mu0;
  std::variant<FisheryUtility, GeneralUtility> utility;
  GraphonKernel kernel;
};

inline bool is_fishery(const Scenario& s) {
  return std::holds_alternative<FisheryUtility>(s.utility);
}

inline const FisheryParams& fishery_params(const Scenario& s) {
  return std::get<FisheryUtility>(s.utility).params;
}

// =========================================================================
// Measures and aggregates
// =========================================================================

inline MeasureField make_uniform_measure(const Grid& g,
                                         MeasureRole role = MeasureRole::mu0) {
  return MeasureField{Field(g.nx, g.ny, 1.0), role};
}

// Scales each column to unit mass; used for file-loaded densities.
inline void normalize_measure_columns(Field& p, const Grid& g) {
  if (p.nx() != g.nx || p.ny() != g.ny)
    throw std::invalid_argument("normalize_measure_columns: shape mismatch");
  for (int j = 0; j < g.ny; ++j) {
    double mass = quad_x(p.col(j), g);
    if (!(mass > 0.0))
      throw std::invalid_argument("normalize_measure_columns: zero column mass");
    for (double& v : p.col(j)) v /= mass;
  }
}

// Per-type mean action alpha_j = sum_i x_i p[i][j] dx.
inline std::vector<double> alpha_from_measure(const Field& p, const Grid& g) {
  if (p.nx() != g.nx || p.ny() != g.ny)
    throw std::invalid_argument("alpha_from_measure: shape mismatch");
  std::vector<double> alpha(g.ny);
  for (int j = 0; j < g.ny; ++j) {
    auto col = p.col(j);
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i) s += g.x[i] * col[i];
    alpha[j] = s * g.dx;
  }
  return alpha;
}

// Per-type h-moment sum_i h(x_i) p[i][j] dx.
inline std::vector<double> moment_from_measure(
    const Field& p, const std::function<double(double)>& h, const Grid& g) {
  std::vector<double> out(g.ny);
  for (int j = 0; j < g.ny; ++j) {
    auto col = p.col(j);
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i) s += h(g.x[i]) * col[i];
    out[j] = s * g.dx;
  }
  return out;
}

// =========================================================================
// Utility evaluation
// =========================================================================

// Per-type argument the utility model consumes, evaluated on a measure m:
// fishery takes the mean action alpha_j(m); the general model takes the
// h-moment of the logit part of m, v_j = <h, m_j> - delta_j/(delta_j+1) <h, mu0_j>.
inline std::vector<double> utility_argument(const Scenario& s, const Field& m,
                                            const Grid& g) {
  if (is_fishery(s)) return alpha_from_measure(m, g);
  const auto& gu = std::get<GeneralUtility>(s.utility);
  std::vector<double> vm = moment_from_measure(m, gu.h, g);
  std::vector<double> v0 = moment_from_measure(s.mu0.p, gu.h, g);
  std::vector<double> v(g.ny);
  for (int j = 0; j < g.ny; ++j) {
    double d = s.rates.delta[j];
    v[j] = vm[j] - d / (d + 1.0) * v0[j];
  }
  return v;
}

// Local utility surface. Fishery: u[i][j] = x_i (gain(arg_j) - cost(y_j)),
// linear in the action. General: u[i][j] = g(x_i, y_j, arg_j).
inline Field local_utility(const Scenario& s, std::span<const double> arg,
                           const Grid& g) {
  if (static_cast<int>(arg.size()) != g.ny)
    throw std::invalid_argument("local_utility: argument size mismatch");
  Field u(g.nx, g.ny);
  if (is_fishery(s)) {
    const auto& p = fishery_params(s);
    for (int j = 0; j < g.ny; ++j) {
      double slope = gain(arg[j], p) - cost(g.y[j], p);
      auto col = u.col(j);
      for (int i = 0; i < g.nx; ++i) col[i] = g.x[i] * slope;
    }
  } else {
    const auto& gu = std::get<GeneralUtility>(s.utility);
    for (int j = 0; j < g.ny; ++j) {
      auto col = u.col(j);
      for (int i = 0; i < g.nx; ++i) col[i] = gu.g(g.x[i], g.y[j], arg[j]);
    }
  }
  return u;
}

// Fishery fast path for the coupled surface: the x-linear local utility
// factors convolve(local_utility(arg)) into x_i times the kernel average of
// the per-type slope, cutting the work from nx*ny^2 to ny^2. Identical to
// the generic composition up to floating-point association (and bitwise for
// the identity kernel, where both reduce to x_i * slope_j).
inline Field fishery_coupled_utility(const Scenario& s,
                                     std::span<const double> arg,
                                     const Grid& g) {
  if (static_cast<int>(arg.size()) != g.ny)
    throw std::invalid_argument("fishery_coupled_utility: argument size mismatch");
  const auto& p = fishery_params(s);
  std::vector<double> slope(g.ny);
  for (int j = 0; j < g.ny; ++j) slope[j] = gain(arg[j], p) - cost(g.y[j], p);
  std::vector<double> q(g.ny);
  if (s.kernel.kind == KernelKind::identity) {
    q = slope;
  } else {
    for (int j = 0; j < g.ny; ++j) {
      const double* col = s.kernel.w.data() + static_cast<std::size_t>(j) * g.ny;
      double acc = 0.0;
      for (int l = 0; l < g.ny; ++l) acc += slope[l] * col[l];
      q[j] = acc * g.dy;
    }
  }
  Field out(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j) {
    auto col = out.col(j);
    for (int i = 0; i < g.nx; ++i) col[i] = g.x[i] * q[j];
  }
  return out;
}

// Graphon-coupled utility of a measure: convolve(local_utility(arg(m))).
inline Field coupled_utility(const Scenario& s, const Field& m, const Grid& g) {
  std::vector<double> arg = utility_argument(s, m, g);
  if (is_fishery(s)) return fishery_coupled_utility(s, arg, g);
  Field u = local_utility(s, arg, g);
  return convolve(u, s.kernel, g);
}

// =========================================================================
// Factories and declared bounds
// =========================================================================

inline Scenario make_fishery_scenario(const Grid& g, RateProfiles rates,
                                      const FisheryParams& params,
                                      GraphonKernel kernel,
                                      MeasureField mu0) {
  check_measure(mu0, g);
  if (static_cast<int>(rates.delta.size()) != g.ny)
    throw std::invalid_argument("make_fishery_scenario: rates/grid mismatch");
  if (kernel.ny != g.ny)
    throw std::invalid_argument("make_fishery_scenario: kernel/grid mismatch");
  return Scenario{std::move(rates), std::move(mu0), FisheryUtility{params},
                  std::move(kernel)};
}

inline Scenario make_fishery_scenario(const Grid& g, RateProfiles rates,
                                      const FisheryParams& params,
                                      GraphonKernel kernel) {
  return make_fishery_scenario(g, std::move(rates), params, std::move(kernel),
                               make_uniform_measure(g));
}

inline Scenario make_general_scenario(const Grid& g, RateProfiles rates,
                                      GeneralUtility utility,
                                      GraphonKernel kernel,
                                      MeasureField mu0) {
  check_measure(mu0, g);
  if (!utility.g || !utility.h)
    throw std::invalid_argument("make_general_scenario: callables required");
  if (static_cast<int>(rates.delta.size()) != g.ny)
    throw std::invalid_argument("make_general_scenario: rates/grid mismatch");
  if (kernel.ny != g.ny)
    throw std::invalid_argument("make_general_scenario: kernel/grid mismatch");
  return Scenario{std::move(rates), std::move(mu0), std::move(utility),
                  std::move(kernel)};
}

inline Scenario make_general_scenario(const Grid& g, RateProfiles rates,
                                      GeneralUtility utility,
                                      GraphonKernel kernel) {
  auto mu0 = make_uniform_measure(g);
  return make_general_scenario(g, std::move(rates), std::move(utility),
                               std::move(kernel), std::move(mu0));
}

// Floor of the admissible aggregate: the mu0 share alone already contributes
// delta_j/(delta_j+1) * mean action of mu0, which is positive. Asserted here
// because the gain blows up as the aggregate approaches -gamma.
inline double fishery_alpha_floor(const Scenario& s, const Grid& g) {
  std::vector<double> x0 = alpha_from_measure(s.mu0.p, g);
  double floor = std::numeric_limits<double>::infinity();
  for (int j = 0; j < g.ny; ++j) {
    double d = s.rates.delta[j];
    floor = std::min(floor, d / (d + 1.0) * x0[j]);
  }
  if (!(floor > 0.0))
    throw std::domain_error("fishery_alpha_floor: aggregate floor not positive");
  return floor;
}

// Lipschitz bound of the fishery's g in its aggregate argument over the
// admissible range [alpha_floor, ...): sup_x x * |gain'| = (1/2) (floor+gamma)^(-3/2).
inline double fishery_lipschitz_g(const Scenario& s, const Grid& g) {
  double floor = fishery_alpha_floor(s, g) + fishery_params(s).gamma;
  return 0.5 * std::pow(floor, -1.5);
}

// View of the fishery as the general aggregative form: h(q) = q and
// g(x, w, v) = x * (gain(delta_w/(delta_w+1) * xbar0(w) + v) - cost(w)).
// Used by the checkers and to cross-validate the two evaluation routes.
inline GeneralUtility fishery_general_view(const Scenario& s, const Grid& g) {
  if (!is_fishery(s))
    throw std::invalid_argument("fishery_general_view: not a fishery scenario");
  FisheryParams params = fishery_params(s);
  std::vector<double> x0 = alpha_from_measure(s.mu0.p, g);
  std::vector<double> delta = s.rates.delta;
  std::vector<double> y = g.y;
  double dy = g.dy;
  auto type_index = [y, dy](double w) {
    int j = static_cast<int>(w / dy);
    return std::clamp(j, 0, static_cast<int>(y.size()) - 1);
  };
  GeneralUtility gu;
  gu.g = [params, x0, delta, type_index](double x, double w, double v) {
    int j = type_index(w);
    double base = delta[j] / (delta[j] + 1.0) * x0[j];
    return x * (gain(base + v, params) - cost(w, params));
  };
  gu.h = [](double q) { return q; };
  gu.h_bound = 1.0;
  gu.lipschitz_h = 1.0;
  gu.lipschitz_g = fishery_lipschitz_g(s, g);
  double cmax = std::max(cost(0.0, params), cost(1.0, params));
  double amin = fishery_alpha_floor(s, g);
  gu.g_bound = std::max(gain(amin, params), cmax);
  return gu;
}

}  // namespace glogit
