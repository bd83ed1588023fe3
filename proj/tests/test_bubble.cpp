#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "multibump/bubble.hpp"
#include "multibump/core.hpp"

using namespace multibump;
using Catch::Approx;

namespace {

std::vector<Point> sample_points(int dim) {
  SplitMix64 rng(101);
  std::vector<Point> pts;
  for (int t = 0; t < 12; ++t) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = 4.0 * (rng.uniform() - 0.5);
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST_CASE("bubble solves the critical equation exactly") {
  for (int N : {5, 6, 7, 8, 9}) {
    Bubble b = make_bubble([&] {
      Point c(N);
      c[0] = 0.7;
      c[1] = -0.3;
      return c;
    }(), 2.5);
    const double p = critical_exponent(N) - 1.0;
    for (const Point& y : sample_points(N)) {
      const double u = bubble_value(b, y);
      REQUIRE(u > 0);
      // -Delta U = U^{2^*-1}, both sides in closed form
      REQUIRE(-bubble_laplacian(b, y) == Approx(std::pow(u, p)).epsilon(1e-11));
    }
  }
}

TEST_CASE("bubble closed-form derivatives agree with finite differences") {
  Bubble b = make_bubble([] {
    Point c(5);
    c[2] = 0.4;
    return c;
  }(), 1.7);
  FieldFn f = [&](const Point& y) { return bubble_value(b, y); };
  for (const Point& y : sample_points(5)) {
    const Point g = bubble_gradient(b, y);
    const Point gfd = fd_gradient(f, y);
    REQUIRE(dist(g, gfd) < 1e-5 * (1.0 + norm(g)));
    REQUIRE(bubble_laplacian(b, y) ==
            Approx(fd_laplacian(f, y)).margin(1e-4 * (1 + std::abs(bubble_laplacian(b, y)))));
  }
}

TEST_CASE("scale normalization identity") {
  // U_{0,mu}(y) = mu^{(N-2)/2} U_{0,1}(mu y)
  const int N = 7;
  Bubble unit = make_bubble(Point(N), 1.0);
  Bubble fast = make_bubble(Point(N), 3.0);
  for (const Point& y : sample_points(N)) {
    REQUIRE(bubble_value(fast, y) ==
            Approx(std::pow(3.0, 0.5 * (N - 2)) * bubble_value(unit, 3.0 * y)).epsilon(1e-12));
  }
}

TEST_CASE("linearization kernels solve the linearized equation exactly") {
  for (int N : {5, 7, 9}) {
    Bubble unit = make_bubble(Point(N), 1.0);
    const double pm1 = critical_exponent(N) - 2.0;  // 2^* - 2
    for (int index = 0; index <= N; ++index) {
      for (const Point& y : sample_points(N)) {
        const double psi = kernel_value(index, y, N);
        const double u = bubble_value(unit, y);
        const double lhs = -kernel_laplacian(index, y, N);
        const double rhs = (critical_exponent(N) - 1.0) * std::pow(u, pm1) * psi;
        REQUIRE(lhs == Approx(rhs).margin(1e-11 * (1.0 + std::abs(rhs))));
      }
    }
    REQUIRE_THROWS_AS(kernel_value(N + 1, Point(N), N), InvalidConfigError);
  }
}

TEST_CASE("kernel gradients agree with finite differences") {
  const int N = 6;
  for (int index = 0; index <= N; ++index) {
    FieldFn f = [&](const Point& y) { return kernel_value(index, y, N); };
    for (const Point& y : sample_points(N)) {
      const Point g = kernel_gradient(index, y, N);
      REQUIRE(dist(g, fd_gradient(f, y)) < 1e-5 * (1.0 + norm(g)));
      REQUIRE(kernel_laplacian(index, y, N) ==
              Approx(fd_laplacian(f, y)).margin(1e-4 * (1 + std::abs(kernel_laplacian(index, y, N)))));
    }
  }
}

TEST_CASE("scale derivative matches a finite difference in the scale") {
  const int N = 5;
  Point c(N);
  c[0] = 1.0;
  const double mu = 2.2, h = 1e-6;
  Bubble b = make_bubble(c, mu);
  Bubble bp = make_bubble(c, mu + h), bm = make_bubble(c, mu - h);
  for (const Point& y : sample_points(N)) {
    const double fd = (bubble_value(bp, y) - bubble_value(bm, y)) / (2 * h);
    REQUIRE(bubble_dscale(b, y) == Approx(fd).margin(1e-7));
  }
  // at the standard bubble the scale derivative is the first kernel
  Bubble unit = make_bubble(Point(N), 1.0);
  for (const Point& y : sample_points(N)) {
    REQUIRE(bubble_dscale(unit, y) == Approx(kernel_value(0, y, N)).epsilon(1e-12));
  }
}

TEST_CASE("scale derivative closed-form gradient and Laplacian") {
  const int N = 7;
  Point c(N);
  c[1] = -0.6;
  Bubble b = make_bubble(c, 1.9);
  FieldFn f = [&](const Point& y) { return bubble_dscale(b, y); };
  const double pm1 = critical_exponent(N) - 2.0;
  for (const Point& y : sample_points(N)) {
    REQUIRE(dist(bubble_dscale_gradient(b, y), fd_gradient(f, y)) < 1e-5);
    REQUIRE(bubble_dscale_laplacian(b, y) == Approx(fd_laplacian(f, y)).margin(1e-4));
    // differentiated equation: -Delta (dU/dmu) = (2^*-1) U^{2^*-2} dU/dmu
    const double rhs = (critical_exponent(N) - 1.0) * std::pow(bubble_value(b, y), pm1) *
                       bubble_dscale(b, y);
    REQUIRE(-bubble_dscale_laplacian(b, y) == Approx(rhs).margin(1e-10 * (1 + std::abs(rhs))));
  }
}

TEST_CASE("center derivative matches finite differences and the kernels") {
  const int N = 5;
  Point c(N);
  c[0] = 0.5;
  Bubble b = make_bubble(c, 1.4);
  const double h = 1e-6;
  for (int axis : {0, 2}) {
    Point cp = c, cm = c;
    cp[axis] += h;
    cm[axis] -= h;
    Bubble bp = make_bubble(cp, 1.4), bm = make_bubble(cm, 1.4);
    for (const Point& y : sample_points(N)) {
      const double fd = (bubble_value(bp, y) - bubble_value(bm, y)) / (2 * h);
      REQUIRE(bubble_dcenter(b, y, unit_vector(axis, N)) == Approx(fd).margin(1e-6));
    }
  }
  // at the standard bubble: d/dx_i U = -psi_i
  Bubble unit = make_bubble(Point(N), 1.0);
  for (const Point& y : sample_points(N)) {
    for (int i = 1; i <= N; ++i) {
      REQUIRE(bubble_dcenter(unit, y, unit_vector(i - 1, N)) ==
              Approx(-kernel_value(i, y, N)).margin(1e-13));
    }
  }
}

TEST_CASE("scale derivative obeys the uniform pointwise bound") {
  // |dU/dmu| <= ((N-2)/(2 mu)) U everywhere
  for (int N : {5, 8}) {
    Point c(N);
    c[0] = -0.2;
    for (double mu : {0.5, 1.0, 4.0}) {
      Bubble b = make_bubble(c, mu);
      for (const Point& y : sample_points(N)) {
        REQUIRE(std::abs(bubble_dscale(b, y)) <=
                (N - 2) / (2.0 * mu) * bubble_value(b, y) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("towers sum bubbles and an optional background") {
  PolygonConfig cfg;
  cfg.dim = 5;
  cfg.plane = {0, 1};
  cfg.count = 3;
  cfg.radius = 2.0;
  cfg.scale = 6.0;
  Tower t = make_tower(cfg);
  REQUIRE(t.bubbles.size() == 3);
  Point y{0.4, 0.1, -0.3, 0.0, 0.2};
  double expected = 0;
  for (const auto& b : t.bubbles) expected += bubble_value(b, y);
  REQUIRE(tower_value(t, y) == Approx(expected));

  ScalarField bg;
  bg.value = [](const Point& p) { return std::exp(-norm2(p)); };
  t.background = bg;
  REQUIRE(tower_value(t, y) == Approx(expected + std::exp(-norm2(y))));

  ScalarField f = tower_field(t);
  REQUIRE(f.value(y) == Approx(tower_value(t, y)));
  REQUIRE(f.decay_exponent == 3.0);
  REQUIRE(dist(f.gradient(y), tower_gradient(t, y)) == 0.0);
}

TEST_CASE("closed moment integrals match the reference values") {
  struct Row {
    int N;
    double mass, kflux, vol, m2, k0m2, k0n, k1n;
  };
  // reference values from an independent Gamma-function evaluation
  const Row rows[] = {
      {5, 6.018083049029302e+02, -9.027124573543928e+02, 8.443602647627395e+02,
       1.407267107937897e+03, -8.443602647627380e+02, 3.166350992860281e+02,
       3.166350992860262e+02},
      {6, 2.976602561308781e+03, -5.953205122617575e+03, 7.143846147141069e+03,
       1.071576922071162e+04, -7.143846147141057e+03, 4.082197798366300e+03,
       4.082197798366333e+03},
      {7, 1.407775495783995e+04, -3.519438739459994e+04, 6.434375790222501e+04,
       9.008126106311518e+04, -6.434375790222518e+04, 5.026856086111320e+04,
       5.026856086111350e+04},
      {8, 6.478751799935781e+04, -1.943625539980729e+05, 6.155809254647084e+05,
       8.207745672862761e+05, -6.155809254647108e+05, 6.155809254647164e+05,
       6.155809254647086e+05},
      {9, 2.927548991596463e+05, -1.024642147058764e+06, 6.227742236170435e+06,
       8.007097160790549e+06, -6.227742236170379e+06, 7.628984239308682e+06,
       7.628984239308778e+06},
  };
  for (const Row& r : rows) {
    const MomentTable m = closed_moments(r.N);
    REQUIRE(m.mass_flux == Approx(r.mass).epsilon(1e-12));
    REQUIRE(m.kernel_flux == Approx(r.kflux).epsilon(1e-12));
    REQUIRE(m.volume_mass == Approx(r.vol).epsilon(1e-12));
    REQUIRE(m.second_moment == Approx(r.m2).epsilon(1e-12));
    REQUIRE(m.kernel0_mass2 == Approx(r.k0m2).epsilon(1e-12));
    REQUIRE(m.kernel0_norm == Approx(r.k0n).epsilon(1e-12));
    REQUIRE(m.kernel1_norm == Approx(r.k1n).epsilon(1e-12));
    REQUIRE(m.c_dim == Approx(bubble_constant(r.N)).epsilon(1e-14));
  }
  REQUIRE_THROWS_AS(closed_moments(4), InvalidConfigError);
}

TEST_CASE("structural identities between the moments") {
  for (int N = 5; N <= 9; ++N) {
    const MomentTable m = closed_moments(N);
    // flux of the scale kernel is -(N-2)/2 times the mass flux
    REQUIRE(m.kernel_flux == Approx(-0.5 * (N - 2) * m.mass_flux).epsilon(1e-12));
    // second moment relates to the volume mass
    REQUIRE(m.second_moment == Approx(double(N) / (N - 2) * m.volume_mass).epsilon(1e-12));
    // weighted second moment of the scale kernel
    REQUIRE(m.kernel0_mass2 == Approx(-(N - 2.0) / N * m.second_moment).epsilon(1e-12));
    // the scale and translation kernels have equal weighted norms
    REQUIRE(m.kernel0_norm == Approx(m.kernel1_norm).epsilon(1e-12));
    // serialization view carries every entry
    REQUIRE(m.as_map().size() == 10);
    REQUIRE(m.as_map().at("mass_flux") == m.mass_flux);
  }
}

TEST_CASE("divergence guards on the moment formula") {
  REQUIRE_THROWS_AS(moment_integral(5, 2.0, 0.0), DivergentIntegralError);   // 2a-b = 4 < 5
  REQUIRE_THROWS_AS(moment_integral(5, 10.0, -5.0), DivergentIntegralError); // b = -N
  REQUIRE_NOTHROW(moment_integral(5, 3.0, 0.0));
  // explicit value: int_{R^5} (1+|y|^2)^{-5} dy = (omega_4/2) B(5/2, 5/2)
  REQUIRE(moment_integral(5, 5.0, 0.0) ==
          Approx(0.5 * sphere_area(4) * beta_function(2.5, 2.5)).epsilon(1e-14));
}
