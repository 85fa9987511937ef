#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "glogit/field.hpp"
#include "glogit/graphon.hpp"
#include "glogit/grid.hpp"

using namespace glogit;

namespace {

Field random_field(const Grid& g, std::uint64_t seed, double lo = -1.0,
                   double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(g.nx, g.ny);
  for (double& v : f.data()) v = u(rng);
  return f;
}

double kernel_at(const GraphonKernel& k, int l, int j) {
  return k.w[static_cast<std::size_t>(j) * k.ny + l];
}

}  // namespace

TEST_CASE("identity kernel convolution returns the input bitwise") {
  Grid g = make_grid(4, 4);
  GraphonKernel id = build_identity(g);
  Field u = random_field(g, 21);
  Field r = convolve(u, id, g);
  REQUIRE(r.same_shape(u));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) CHECK(r(i, j) == u(i, j));
  CHECK(kernel_at(id, 2, 2) == 1.0 / g.dy);
  CHECK(kernel_at(id, 1, 2) == 0.0);
  for (double m : id.column_mass) CHECK(m == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("uniform kernel averages columns") {
  Grid g = make_grid(3, 5);
  GraphonKernel uni = build_uniform(g);
  for (double m : uni.column_mass) CHECK(m == Catch::Approx(1.0).margin(1e-14));
  Field u = random_field(g, 22);
  Field r = convolve(u, uni, g);
  for (int i = 0; i < g.nx; ++i) {
    double mean = 0.0;
    for (int l = 0; l < g.ny; ++l) mean += u(i, l);
    mean *= g.dy;
    for (int j = 0; j < g.ny; ++j) CHECK(r(i, j) == Catch::Approx(mean).margin(1e-14));
  }
}

TEST_CASE("gaussian kernel columns are unit mass") {
  for (double theta : {0.05, 0.5, 2.0}) {
    Grid g = make_grid(2, 33);
    GraphonKernel k = build_gaussian(theta, g);
    for (double m : k.column_mass) CHECK(m == Catch::Approx(1.0).margin(1e-12));
    for (double w : k.w) CHECK(w >= 0.0);
  }
}

TEST_CASE("very wide gaussian flattens to the uniform kernel") {
  Grid g = make_grid(2, 16);
  GraphonKernel k = build_gaussian(1e6, g);
  for (double w : k.w) CHECK(w == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("very narrow gaussian concentrates on the diagonal") {
  Grid g = make_grid(2, 200);
  GraphonKernel k = build_gaussian(1e-4, g);
  for (int j : {0, 57, 100, 199}) {
    CHECK(kernel_at(k, j, j) == Catch::Approx(200.0).epsilon(1e-9));
    double off = 0.0;
    for (int l = 0; l < 200; ++l)
      if (l != j) off += kernel_at(k, l, j) * g.dy;
    CHECK(off <= 1e-6);
  }
}

TEST_CASE("per-column normalization leaves a small asymmetry") {
  Grid g = make_grid(2, 8);
  GraphonKernel k = build_gaussian(0.5, g);
  KernelAssumptionReport rep = check_kernel_assumptions(k, g);
  CHECK(rep.symmetry_dev > 0.0);
  CHECK(rep.integrability_bound == Catch::Approx(1.0).margin(1e-12));

  GraphonKernel id = build_identity(g);
  KernelAssumptionReport idrep = check_kernel_assumptions(id, g);
  CHECK(idrep.symmetry_dev == 0.0);
}

TEST_CASE("diagonal weight decreases as theta grows") {
  Grid g = make_grid(2, 32);
  std::vector<double> thetas = {0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
  for (int j : {8, 16, 23}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double th : thetas) {
      double w = kernel_at(build_gaussian(th, g), j, j);
      CHECK(w <= prev + 1e-12);
      prev = w;
    }
  }
}

TEST_CASE("convolution matches the ascending-l reference oracle") {
  Grid g = make_grid(5, 9);
  GraphonKernel k = build_gaussian(0.3, g);
  Field u = random_field(g, 23);
  Field r = convolve(u, k, g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double acc = 0.0;
      for (int l = 0; l < g.ny; ++l) acc += u(i, l) * kernel_at(k, l, j);
      CHECK(r(i, j) == acc * g.dy);  // identical order, bitwise equal
    }
}

TEST_CASE("convolution is bitwise reproducible across calls") {
  Grid g = make_grid(6, 17);
  GraphonKernel k = build_gaussian(0.7, g);
  Field u = random_field(g, 29);
  Field a = convolve(u, k, g);
  Field b = convolve(u, k, g);
  CHECK(max_abs_diff(a, b) == 0.0);
}

TEST_CASE("custom kernels validate and normalize") {
  Grid g = make_grid(2, 3);
  std::vector<double> w(9, 0.0);
  // column j weights w[l + 3j]
  w[0] = 2.0; w[1] = 2.0; w[2] = 2.0;   // column 0
  w[3] = 1.0;                            // column 1: delta on l=0
  w[6] = 0.5; w[7] = 0.0; w[8] = 1.5;    // column 2
  GraphonKernel k = make_custom(w, g, true);
  for (double m : k.column_mass) CHECK(m == Catch::Approx(1.0).margin(1e-14));
  CHECK(kernel_at(k, 0, 0) == Catch::Approx(1.0));
  CHECK(kernel_at(k, 0, 1) == Catch::Approx(3.0));  // 1/dy

  std::vector<double> bad(9, -1.0);
  CHECK_THROWS_AS(make_custom(bad, g, true), std::invalid_argument);
  std::vector<double> zero_col(9, 0.0);
  zero_col[0] = 1.0;
  CHECK_THROWS_AS(make_custom(zero_col, g, true), std::invalid_argument);
  std::vector<double> wrong_size(4, 1.0);
  CHECK_THROWS_AS(make_custom(wrong_size, g, true), std::invalid_argument);
}

TEST_CASE("build_gaussian rejects nonpositive theta") {
  Grid g = make_grid(2, 4);
  CHECK_THROWS_AS(build_gaussian(0.0, g), std::invalid_argument);
  CHECK_THROWS_AS(build_gaussian(-0.5, g), std::invalid_argument);
}
