#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "glogit/grid.hpp"

namespace glogit {

struct McConfig {
  long samples = 0;
  std::uint64_t seed = 0;
  std::vector<int> columns;  // type columns to simulate
};

namespace detail {

// splitmix64 step; the standard 64-bit finalizer used to spread seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Independent substream per (master seed, column, sample). Each sample owns
// its own engine, so histograms are bitwise reproducible regardless of
// evaluation order.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t column,
                                    std::uint64_t sample) {
  std::uint64_t state = master;
  state ^= detail::splitmix64(state) + column;
  state ^= detail::splitmix64(state) + sample;
  return detail::splitmix64(state);
}

// Cumulative cell masses of a density column; cdf[k] = sum_{l<=k} p_l dx,
// rescaled so the last entry is exactly 1.
inline std::vector<double> build_cell_cdf(std::span<const double> density,
                                          double dx) {
  std::vector<double> cdf(density.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < density.size(); ++k) {
    if (!(density[k] >= 0.0))
      throw std::invalid_argument("build_cell_cdf: negative density");
    acc += density[k] * dx;
    cdf[k] = acc;
  }
  if (!(acc > 0.0))
    throw std::invalid_argument("build_cell_cdf: zero total mass");
  for (double& c : cdf) c /= acc;
  cdf.back() = 1.0;
  return cdf;
}

// Inverse-CDF cell draw: first cell whose cumulative mass exceeds u.
inline int sample_cell(const std::vector<double>& cdf, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

namespace detail {

inline double uniform01(std::mt19937_64& eng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

// Exp(rate) via inversion; log1p keeps u = 0 safe.
inline double exponential(std::mt19937_64& eng, double rate) {
  return -std::log1p(-uniform01(eng)) / rate;
}

}  // namespace detail

/**
 * Event-loop estimate of the discounted occupation measure for one type
 * column. Per sample, in this draw order: initial cell from mu0, killing
 * time Exp(delta), then alternating unit-rate jump waits and fresh cells
 * from pstar while jumps land before the killing time. The cell occupied at
 * the killing time is recorded. Returns the histogram as a density,
 * count / (samples * dx).
 */
inline std::vector<double> simulate_discounted(std::span<const double> pstar_col,
                                               std::span<const double> mu0_col,
                                               double delta, const McConfig& cfg,
                                               int column, const Grid& g) {
  if (static_cast<int>(pstar_col.size()) != g.nx ||
      static_cast<int>(mu0_col.size()) != g.nx)
    throw std::invalid_argument("simulate_discounted: column size mismatch");
  if (!(delta > 0.0))
    throw std::invalid_argument("simulate_discounted: delta must be positive");
  if (cfg.samples <= 0)
    throw std::invalid_argument("simulate_discounted: samples must be positive");
  std::vector<double> mu0_cdf = build_cell_cdf(mu0_col, g.dx);
  std::vector<double> pstar_cdf = build_cell_cdf(pstar_col, g.dx);
  std::vector<long> count(g.nx, 0);
  for (long sample = 0; sample < cfg.samples; ++sample) {
    std::mt19937_64 eng(substream_seed(cfg.seed, column, sample));
    int cell = sample_cell(mu0_cdf, detail::uniform01(eng));
    double kill = detail::exponential(eng, delta);
    double t = detail::exponential(eng, 1.0);
    while (t <= kill) {
      cell = sample_cell(pstar_cdf, detail::uniform01(eng));
      t += detail::exponential(eng, 1.0);
    }
    ++count[cell];
  }
  std::vector<double> density(g.nx);
  for (int i = 0; i < g.nx; ++i)
    density[i] = static_cast<double>(count[i]) / (cfg.samples * g.dx);
  return density;
}

/**
 * Closed-form race sampler for the same law: the occupied cell at an
 * Exp(delta) killing time is a mu0 draw with probability delta/(delta+1)
 * (killed before the first unit-rate jump) and a pstar draw otherwise.
 * One uniform decides the race, the next picks the cell. Serves as the
 * distributional oracle for the event loop.
 */
inline std::vector<double> simulate_discounted_race(
    std::span<const double> pstar_col, std::span<const double> mu0_col,
    double delta, const McConfig& cfg, int column, const Grid& g) {
  if (static_cast<int>(pstar_col.size()) != g.nx ||
      static_cast<int>(mu0_col.size()) != g.nx)
    throw std::invalid_argument("simulate_discounted_race: column size mismatch");
  if (!(delta > 0.0))
    throw std::invalid_argument("simulate_discounted_race: delta must be positive");
  if (cfg.samples <= 0)
    throw std::invalid_argument("simulate_discounted_race: samples must be positive");
  std::vector<double> mu0_cdf = build_cell_cdf(mu0_col, g.dx);
  std::vector<double> pstar_cdf = build_cell_cdf(pstar_col, g.dx);
  double p_kill_first = delta / (delta + 1.0);
  std::vector<long> count(g.nx, 0);
  for (long sample = 0; sample < cfg.samples; ++sample) {
    std::mt19937_64 eng(substream_seed(cfg.seed, column, sample));
    bool from_mu0 = detail::uniform01(eng) < p_kill_first;
    const auto& cdf = from_mu0 ? mu0_cdf : pstar_cdf;
    ++count[sample_cell(cdf, detail::uniform01(eng))];
  }
  std::vector<double> density(g.nx);
  for (int i = 0; i < g.nx; ++i)
    density[i] = static_cast<double>(count[i]) / (cfg.samples * g.dx);
  return density;
}

// Population snapshot at a fixed horizon: same event loop, but the clock
// races a deterministic time t instead of an exponential killing time.
inline std::vector<double> simulate_mu_t(std::span<const double> pstar_col,
                                         std::span<const double> mu0_col,
                                         double t_end, const McConfig& cfg,
                                         int column, const Grid& g) {
  if (static_cast<int>(pstar_col.size()) != g.nx ||
      static_cast<int>(mu0_col.size()) != g.nx)
    throw std::invalid_argument("simulate_mu_t: column size mismatch");
  if (!(t_end >= 0.0))
    throw std::invalid_argument("simulate_mu_t: t_end must be nonnegative");
  if (cfg.samples <= 0)
    throw std::invalid_argument("simulate_mu_t: samples must be positive");
  std::vector<double> mu0_cdf = build_cell_cdf(mu0_col, g.dx);
  std::vector<double> pstar_cdf = build_cell_cdf(pstar_col, g.dx);
  std::vector<long> count(g.nx, 0);
  for (long sample = 0; sample < cfg.samples; ++sample) {
    std::mt19937_64 eng(substream_seed(cfg.seed, column, sample));
    int cell = sample_cell(mu0_cdf, detail::uniform01(eng));
    double t = detail::exponential(eng, 1.0);
    while (t <= t_end) {
      cell = sample_cell(pstar_cdf, detail::uniform01(eng));
      t += detail::exponential(eng, 1.0);
    }
    ++count[cell];
  }
  std::vector<double> density(g.nx);
  for (int i = 0; i < g.nx; ++i)
    density[i] = static_cast<double>(count[i]) / (cfg.samples * g.dx);
  return density;
}

// L1 distance between two densities on the action grid.
inline double density_l1(std::span<const double> a, std::span<const double> b,
                         const Grid& g) {
  if (a.size() != b.size() || static_cast<int>(a.size()) != g.nx)
    throw std::invalid_argument("density_l1: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * g.dx;
}

}  // namespace glogit
