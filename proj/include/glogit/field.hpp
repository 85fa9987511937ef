#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "glogit/grid.hpp"

namespace glogit {

// Dense nx x ny array in column-major layout: column j holds the action cells
// of type j contiguously.
class Field {
 public:
  Field() = default;
  Field(int nx, int ny, double value = 0.0)
      : nx_(nx), ny_(ny), v_(checked_size(nx, ny), value) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  double& operator()(int i, int j) { return v_[index(i, j)]; }
  double operator()(int i, int j) const { return v_[index(i, j)]; }

  std::span<double> col(int j) {
    return {v_.data() + static_cast<std::size_t>(j) * nx_,
            static_cast<std::size_t>(nx_)};
  }
  std::span<const double> col(int j) const {
    return {v_.data() + static_cast<std::size_t>(j) * nx_,
            static_cast<std::size_t>(nx_)};
  }

  std::span<double> data() { return v_; }
  std::span<const double> data() const { return v_; }

  bool same_shape(const Field& o) const { return nx_ == o.nx_ && ny_ == o.ny_; }

 private:
  static std::size_t checked_size(int nx, int ny) {
    if (nx < 0 || ny < 0) throw std::invalid_argument("Field: negative extent");
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx_ + i;
  }

  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> v_;
};

inline double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k)
    m = std::max(m, std::abs(da[k] - db[k]));
  return m;
}

inline double field_min(const Field& f) {
  if (f.data().empty()) throw std::invalid_argument("field_min: empty field");
  return *std::min_element(f.data().begin(), f.data().end());
}

inline double field_max(const Field& f) {
  if (f.data().empty()) throw std::invalid_argument("field_max: empty field");
  return *std::max_element(f.data().begin(), f.data().end());
}

inline bool all_finite(const Field& f) {
  for (double v : f.data())
    if (!std::isfinite(v)) return false;
  return true;
}

// Measure fields are per-type probability densities over the action axis; the
// role tag records which object of the model a field represents.
enum class MeasureRole { mu0, m, pstar, mu_t };

struct MeasureField {
  Field p;
  MeasureRole role = MeasureRole::mu0;
};

struct ValueField {
  Field phi;
};

// Largest deviation of any column mass from 1.
inline double max_column_mass_dev(const Field& p, const Grid& g) {
  if (p.nx() != g.nx || p.ny() != g.ny)
    throw std::invalid_argument("max_column_mass_dev: field/grid mismatch");
  double dev = 0.0;
  for (int j = 0; j < g.ny; ++j)
    dev = std::max(dev, std::abs(quad_x(p.col(j), g) - 1.0));
  return dev;
}

// A measure field must be nonnegative with unit column mass to tolerance.
inline void check_measure(const MeasureField& mf, const Grid& g,
                          double tol = 1e-12) {
  if (mf.p.nx() != g.nx || mf.p.ny() != g.ny)
    throw std::invalid_argument("check_measure: field/grid mismatch");
  for (double v : mf.p.data())
    if (!(v >= 0.0))
      throw std::invalid_argument("check_measure: negative density entry");
  double dev = max_column_mass_dev(mf.p, g);
  if (!(dev <= tol))
    throw std::invalid_argument("check_measure: column mass deviates from 1");
}

}  // namespace glogit
