#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "glogit/field.hpp"
#include "glogit/grid.hpp"

namespace glogit {

enum class KernelKind { gaussian, uniform, identity, custom };

// Discretized interaction kernel on the type axis. w[l + j*ny] is the weight
// W_{l,j} of source type l inside column j, so a utility field u couples as
//
//   (u * W)[i][j] = sum_l u[i][l] * W_{l,j} * dy .
//
// Columns of the Gaussian kernel are normalized to unit mass; column_mass
// stores sum_l W_{l,j} * dy as actually represented.
struct GraphonKernel {
  KernelKind kind = KernelKind::identity;
  double theta = 0.0;  // gaussian width; unused for the other kinds
  int ny = 0;
  std::vector<double> w;
  std::vector<double> column_mass;
};

namespace detail {

inline std::size_t kernel_index(int l, int j, int ny) {
  return static_cast<std::size_t>(j) * ny + l;
}

inline void fill_column_mass(GraphonKernel& k, const Grid& g) {
  k.column_mass.assign(g.ny, 0.0);
  for (int j = 0; j < g.ny; ++j) {
    double s = 0.0;
    for (int l = 0; l < g.ny; ++l) s += k.w[kernel_index(l, j, g.ny)];
    k.column_mass[j] = s * g.dy;
  }
}

}  // namespace detail

/**
 * Gaussian kernel exp(-(y-w)^2 / (2 theta^2)), discretized by exact cell
 * averages: the weight of cell l in column j is
 *
 *   (1/dy) * integral over cell l of exp(-(s - y_j)^2 / (2 theta^2)) ds,
 *
 * evaluated with the erf antiderivative at the cell edges. Closed-form cell
 * averages keep grid-refinement behavior free of quadrature noise. Each
 * column is then normalized to unit mass sum_l W_{l,j} dy = 1; this is a
 * per-column normalization, so the stored kernel is only approximately
 * symmetric (reports record the deviation).
 */
inline GraphonKernel build_gaussian(double theta, const Grid& g) {
  if (!(theta > 0.0))
    throw std::invalid_argument("build_gaussian: theta must be positive");
  GraphonKernel k;
  k.kind = KernelKind::gaussian;
  k.theta = theta;
  k.ny = g.ny;
  k.w.assign(static_cast<std::size_t>(g.ny) * g.ny, 0.0);
  // (1/dy) * int_a^b exp(-(s-c)^2/(2 th^2)) ds
  //   = (th/dy) * sqrt(pi/2) * (erf((b-c)/(th sqrt 2)) - erf((a-c)/(th sqrt 2)))
  const double inv_th_sqrt2 = 1.0 / (theta * std::sqrt(2.0));
  const double scale = theta * std::sqrt(std::acos(-1.0) / 2.0) / g.dy;
  for (int j = 0; j < g.ny; ++j) {
    const double c = g.y[j];
    double mass = 0.0;
    for (int l = 0; l < g.ny; ++l) {
      const double a = l * g.dy;
      const double b = (l + 1) * g.dy;
      const double v = scale * (std::erf((b - c) * inv_th_sqrt2) -
                                std::erf((a - c) * inv_th_sqrt2));
      k.w[detail::kernel_index(l, j, g.ny)] = v;
      mass += v;
    }
    mass *= g.dy;
    if (!(mass > 0.0))
      throw std::runtime_error("build_gaussian: degenerate column mass");
    for (int l = 0; l < g.ny; ++l)
      k.w[detail::kernel_index(l, j, g.ny)] /= mass;
  }
  detail::fill_column_mass(k, g);
  return k;
}

// Flat kernel W == 1; already unit column mass.
inline GraphonKernel build_uniform(const Grid& g) {
  GraphonKernel k;
  k.kind = KernelKind::uniform;
  k.ny = g.ny;
  k.w.assign(static_cast<std::size_t>(g.ny) * g.ny, 1.0);
  detail::fill_column_mass(k, g);
  return k;
}

// No-graphon limit: W_{l,j} = (1/dy) when l == j. Convolution with this
// kernel is short-circuited to an exact copy, so using it introduces no
// floating-point perturbation at all.
inline GraphonKernel build_identity(const Grid& g) {
  GraphonKernel k;
  k.kind = KernelKind::identity;
  k.ny = g.ny;
  k.w.assign(static_cast<std::size_t>(g.ny) * g.ny, 0.0);
  for (int j = 0; j < g.ny; ++j)
    k.w[detail::kernel_index(j, j, g.ny)] = 1.0 / g.dy;
  detail::fill_column_mass(k, g);
  return k;
}

// Wraps externally supplied weights (size ny*ny, w[l + j*ny]). When
// normalize is set, each column is scaled to unit mass.
inline GraphonKernel make_custom(std::vector<double> w, const Grid& g,
                                 bool normalize) {
  if (w.size() != static_cast<std::size_t>(g.ny) * g.ny)
    throw std::invalid_argument("make_custom: weight size mismatch");
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("make_custom: weights must be nonnegative");
  GraphonKernel k;
  k.kind = KernelKind::custom;
  k.ny = g.ny;
  k.w = std::move(w);
  if (normalize) {
    for (int j = 0; j < g.ny; ++j) {
      double mass = 0.0;
      for (int l = 0; l < g.ny; ++l)
        mass += k.w[detail::kernel_index(l, j, g.ny)];
      mass *= g.dy;
      if (!(mass > 0.0))
        throw std::invalid_argument("make_custom: zero column mass");
      for (int l = 0; l < g.ny; ++l)
        k.w[detail::kernel_index(l, j, g.ny)] /= mass;
    }
  }
  detail::fill_column_mass(k, g);
  return k;
}

/**
 * Couples a local utility field through the kernel:
 *
 *   result[i][j] = sum_l u[i][l] * W_{l,j} * dy ,
 *
 * accumulated in ascending l for every (i,j), so results are bitwise
 * reproducible. The identity kernel returns u unchanged (exact copy).
 */
inline Field convolve(const Field& u, const GraphonKernel& k, const Grid& g) {
  if (u.nx() != g.nx || u.ny() != g.ny)
    throw std::invalid_argument("convolve: field/grid mismatch");
  if (k.ny != g.ny)
    throw std::invalid_argument("convolve: kernel/grid mismatch");
  if (k.kind == KernelKind::identity) return u;
  Field r(g.nx, g.ny, 0.0);
  for (int j = 0; j < g.ny; ++j) {
    auto rc = r.col(j);
    for (int l = 0; l < g.ny; ++l) {
      const double wlj = k.w[detail::kernel_index(l, j, g.ny)];
      auto uc = u.col(l);
      for (int i = 0; i < g.nx; ++i) rc[i] += uc[i] * wlj;
    }
    for (int i = 0; i < g.nx; ++i) rc[i] *= g.dy;
  }
  return r;
}

// Diagnostics for the standing kernel assumptions: symmetry deviation
// max |W_{l,j} - W_{j,l}| (nonzero under per-column normalization) and the
// integrability bound max_j sum_l W_{l,j} dy.
struct KernelAssumptionReport {
  double symmetry_dev = 0.0;
  double integrability_bound = 0.0;
};

inline KernelAssumptionReport check_kernel_assumptions(const GraphonKernel& k,
                                                       const Grid& g) {
  if (k.ny != g.ny)
    throw std::invalid_argument("check_kernel_assumptions: kernel/grid mismatch");
  KernelAssumptionReport rep;
  for (int j = 0; j < g.ny; ++j)
    for (int l = 0; l < g.ny; ++l) {
      double d = std::abs(k.w[detail::kernel_index(l, j, g.ny)] -
                          k.w[detail::kernel_index(j, l, g.ny)]);
      rep.symmetry_dev = std::max(rep.symmetry_dev, d);
    }
  for (int j = 0; j < g.ny; ++j)
    rep.integrability_bound = std::max(rep.integrability_bound, k.column_mass[j]);
  return rep;
}

inline std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::uniform: return "uniform";
    case KernelKind::identity: return "identity";
    case KernelKind::custom: return "custom";
  }
  return "unknown";
}

}  // namespace glogit
