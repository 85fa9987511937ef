#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace glogit {

// Uniform cell-centered grid on [0,1] x [0,1]. Action cells sit at
// x_i = (i + 1/2) dx and type cells at y_j = (j + 1/2) dy, indices 0-based.
struct Grid {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  std::vector<double> x;  // action cell centers, size nx
  std::vector<double> y;  // type cell centers, size ny
};

inline Grid make_grid(int nx, int ny) {
  if (nx < 2) throw std::invalid_argument("make_grid: nx must be at least 2");
  if (ny < 1) throw std::invalid_argument("make_grid: ny must be at least 1");
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.dx = 1.0 / nx;
  g.dy = 1.0 / ny;
  g.x.resize(nx);
  g.y.resize(ny);
  for (int i = 0; i < nx; ++i) g.x[i] = (i + 0.5) * g.dx;
  for (int j = 0; j < ny; ++j) g.y[j] = (j + 0.5) * g.dy;
  return g;
}

// Midpoint quadrature over the action axis: (sum_i values_i) * dx. The sum
// runs in ascending index order so repeated evaluations are bitwise equal.
inline double quad_x(std::span<const double> values, const Grid& g) {
  if (static_cast<int>(values.size()) != g.nx)
    throw std::invalid_argument("quad_x: values size does not match nx");
  double s = 0.0;
  for (double v : values) s += v;
  return s * g.dx;
}

// Midpoint quadrature over the type axis.
inline double quad_y(std::span<const double> values, const Grid& g) {
  if (static_cast<int>(values.size()) != g.ny)
    throw std::invalid_argument("quad_y: values size does not match ny");
  double s = 0.0;
  for (double v : values) s += v;
  return s * g.dy;
}

// Kahan-compensated variant, kept for diagnostics only. The plain ascending
// sum above is the reproducibility reference; this one bounds its error.
inline double quad_x_compensated(std::span<const double> values, const Grid& g) {
  if (static_cast<int>(values.size()) != g.nx)
    throw std::invalid_argument("quad_x_compensated: values size does not match nx");
  double s = 0.0;
  double c = 0.0;
  for (double v : values) {
    double t = v - c;
    double u = s + t;
    c = (u - s) - t;
    s = u;
  }
  return s * g.dx;
}

}  // namespace glogit
