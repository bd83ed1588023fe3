#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "multibump/core.hpp"
#include "multibump/potential.hpp"

using namespace multibump;
using Catch::Approx;

namespace {

double fd1(const PotentialK& K, double r, double h = 1e-6) {
  return (K_radial(K, r + h) - K_radial(K, r - h)) / (2 * h);
}
double fd2(const PotentialK& K, double r, double h = 1e-4) {
  return (K_radial(K, r + h) - 2 * K_radial(K, r) + K_radial(K, r - h)) / (h * h);
}

}  // namespace

TEST_CASE("constant potential is identically one") {
  PotentialK K = make_constant_potential(7);
  for (double r : {0.0, 0.5, 3.0, 100.0}) {
    REQUIRE(K_radial(K, r) == 1.0);
    REQUIRE(K_radial_d1(K, r) == 0.0);
    REQUIRE(K_radial_d2(K, r) == 0.0);
    REQUIRE(K_laplacian(K, r) == 0.0);
  }
  Point y{1, 2, 3, 4, 5, 6, 7};
  REQUIRE(K_value(K, y) == 1.0);
  REQUIRE(norm(K_gradient(K, y)) == 0.0);
}

TEST_CASE("radial bump peaks at its design radius with curvature -2 c0") {
  const double r0 = 1.0, c0 = 0.7;
  PotentialK K = make_quadratic_bump(5, r0, c0);
  REQUIRE(K_radial(K, r0) == Approx(1.0));
  REQUIRE(K_radial_d1(K, r0) == Approx(0.0).margin(1e-15));
  REQUIRE(K_radial_d2(K, r0) == Approx(-2.0 * c0));
  // maximum on the ring: nearby values strictly smaller
  REQUIRE(K_radial(K, r0 + 0.1) < 1.0);
  REQUIRE(K_radial(K, r0 - 0.1) < 1.0);
  // radial Laplacian at the critical radius reduces to the second derivative
  REQUIRE(K_laplacian(K, r0) == Approx(-2.0 * c0));
  // stays positive (needed for a defined energy): c0 < e guarantee
  REQUIRE(K_min_on(K, 50.0) > 0.0);
  REQUIRE_THROWS_AS(make_quadratic_bump(5, 1.0, 3.0), InvalidConfigError);
  REQUIRE_THROWS_AS(make_quadratic_bump(5, -1.0, 0.5), InvalidConfigError);
}

TEST_CASE("bump derivatives agree with finite differences") {
  PotentialK K = make_quadratic_bump(6, 1.3, 0.4);
  for (double r : {0.3, 0.9, 1.3, 2.1, 4.0}) {
    REQUIRE(K_radial_d1(K, r) == Approx(fd1(K, r)).margin(1e-8));
    REQUIRE(K_radial_d2(K, r) == Approx(fd2(K, r)).margin(1e-5));
  }
}

TEST_CASE("rescaled potential applies the chain rule") {
  PotentialK K = make_quadratic_bump(5, 1.0, 0.5);
  PotentialK Kk = rescaled(K, 8.0);
  for (double r : {2.0, 8.0, 9.5, 20.0}) {
    REQUIRE(K_radial(Kk, r) == Approx(K_radial(K, r / 8.0)));
    REQUIRE(K_radial_d1(Kk, r) == Approx(K_radial_d1(K, r / 8.0) / 8.0));
    REQUIRE(K_radial_d2(Kk, r) == Approx(K_radial_d2(K, r / 8.0) / 64.0));
  }
  // rescaling composes multiplicatively
  PotentialK Kkk = rescaled(Kk, 2.0);
  REQUIRE(K_radial(Kkk, 32.0) == Approx(K_radial(K, 2.0)));
}

TEST_CASE("gradient of the radial profile points along the radius") {
  PotentialK K = make_quadratic_bump(5, 1.0, 0.5);
  Point y{0.3, -0.4, 0.5, 0.0, 0.2};
  const Point g = K_gradient(K, y);
  const double r = norm(y);
  const Point expected = (K_radial_d1(K, r) / r) * y;
  REQUIRE(dist(g, expected) < 1e-14);
  // a profile with nonzero radial slope at r = 0 has a corner: no gradient
  PotentialK corner = make_quadratic_bump(5, 1.3, 0.5);
  REQUIRE(std::abs(K_radial_d1(corner, 0.0)) > 0.0);
  REQUIRE_THROWS_AS(K_gradient(corner, Point(5)), std::domain_error);
  // with r0 = 1 the slope happens to vanish at the origin: gradient defined
  REQUIRE(K_radial_d1(K, 0.0) == 0.0);
  REQUIRE(norm(K_gradient(K, Point(5))) == 0.0);
  // the constant potential is smooth at the origin
  REQUIRE(norm(K_gradient(make_constant_potential(5), Point(5))) == 0.0);
}

TEST_CASE("monotone interpolation reproduces values and stays shape-preserving") {
  std::vector<double> x = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
  std::vector<double> v = {1.0, 1.2, 1.5, 1.45, 1.1, 1.0};
  PotentialK K = make_table_potential(5, x, v);
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(K_radial(K, x[i]) == Approx(v[i]));
  // monotone on the rising run: no overshoot above the knot values
  for (double r = 0.0; r <= 1.0; r += 0.01) {
    REQUIRE(K_radial(K, r) <= 1.5 + 1e-12);
    REQUIRE(K_radial(K, r) >= 1.0 - 1e-12);
  }
  // clamped outside the table
  REQUIRE(K_radial(K, 10.0) == Approx(1.0));
  REQUIRE(K_radial(K, -1.0) == Approx(1.0));
  REQUIRE(K_radial_d1(K, 10.0) == 0.0);
  // derivative consistency inside a smooth span
  REQUIRE(K_radial_d1(K, 0.7) == Approx(fd1(K, 0.7)).margin(1e-6));
  REQUIRE_THROWS_AS(make_table_potential(5, {0.0, 0.0, 1.0}, {1, 2, 3}), InvalidConfigError);
  REQUIRE_THROWS_AS(make_table_potential(5, {0.0, 1.0}, {1.0, -2.0}), InvalidConfigError);
}

TEST_CASE("table potential round-trips through CSV") {
  const char* path = "potential_roundtrip.csv";
  {
    std::ofstream out(path);
    out << "r,K\n0.0,1.00\n1.0,1.50\n2.0,1.25\n4.0,1.00\n";
  }
  PotentialK K = load_table_potential(6, path);
  REQUIRE(K.dim == 6);
  REQUIRE(K_radial(K, 1.0) == Approx(1.5));
  REQUIRE(K_radial(K, 4.0) == Approx(1.0));
  REQUIRE(K_radial(K, 0.0) == Approx(1.0));
  std::remove(path);
  REQUIRE_THROWS_AS(load_table_potential(6, "missing_file.csv"), InvalidConfigError);
}
