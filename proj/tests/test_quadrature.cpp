#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "multibump/bubble.hpp"
#include "multibump/core.hpp"
#include "multibump/quadrature.hpp"
#include "multibump/symmetry.hpp"

using namespace multibump;
using Catch::Approx;

TEST_CASE("gauss nodes integrate polynomials to machine precision") {
  const GaussRule g7 = compute_gauss_legendre(7);
  REQUIRE(g7.nodes.size() == 7);
  double wsum = 0;
  for (double w : g7.weights) wsum += w;
  REQUIRE(wsum == Approx(2.0).epsilon(1e-14));
  // degree-13 exactness: int_{-1}^{1} x^12 dx = 2/13
  double v = 0;
  for (int i = 0; i < 7; ++i) v += g7.weights[i] * std::pow(g7.nodes[i], 12);
  REQUIRE(v == Approx(2.0 / 13.0).epsilon(1e-13));
  // nodes are symmetric about the origin
  for (int i = 0; i < 7; ++i) REQUIRE(g7.nodes[i] == Approx(-g7.nodes[6 - i]).margin(1e-14));
}

TEST_CASE("adaptive interval integration") {
  auto r = integrate_interval([](double x) { return std::sin(x); }, 0.0, kPi);
  REQUIRE(r.value == Approx(2.0).epsilon(1e-12));
  REQUIRE(r.error < 1e-9);

  // integrable endpoint singularity
  auto s = integrate_interval([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  REQUIRE(s.value == Approx(2.0).epsilon(1e-6));

  // a kink handled via a declared breakpoint
  IntegrationOptions opts;
  opts.breakpoints = {1.0 / 3.0};
  auto k = integrate_interval([](double x) { return std::abs(x - 1.0 / 3.0); }, 0.0, 1.0, opts);
  // exact: (1/3)^2/2 + (2/3)^2/2 = 5/18
  REQUIRE(k.value == Approx(5.0 / 18.0).epsilon(1e-12));

  REQUIRE_THROWS_AS(integrate_interval([](double) { return 1.0; }, 1.0, 0.0),
                    InvalidConfigError);
}

TEST_CASE("budget exhaustion reports the best estimate") {
  IntegrationOptions opts;
  opts.max_regions = 3;
  opts.abs_tol = 1e-15;
  opts.rel_tol = 1e-15;
  try {
    integrate_interval([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.37)); }, 0.0, 1.0,
                       opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    REQUIRE(std::isfinite(e.value));
    REQUIRE(e.error > 0);
    REQUIRE(e.value == Approx(2.0 * (std::sqrt(0.37) + std::sqrt(0.63))).epsilon(0.2));
  }
}

TEST_CASE("cubature rule reproduces box monomial integrals exactly") {
  // single-region values against closed-form monomial integrals on [-1,1]^d
  auto exact_monomial = [](const std::vector<int>& alpha) {
    double v = 1.0;
    for (int a : alpha) v *= (a % 2 == 0) ? 2.0 / (a + 1) : 0.0;
    return v;
  };
  IntegrationOptions one_shot;
  one_shot.abs_tol = 1e9;  // accept the first rule evaluation
  one_shot.rel_tol = 1e9;

  for (int d : {2, 3, 5, 7}) {
    std::vector<std::vector<int>> cases = {
        std::vector<int>(d, 0),  // constant
        [&] { std::vector<int> a(d, 0); a[0] = 6; return a; }(),
        [&] { std::vector<int> a(d, 0); a[0] = 4; a[1] = 2; return a; }(),
        [&] { std::vector<int> a(d, 0); a[0] = 2; a[1] = 2; return a; }(),
        [&] { std::vector<int> a(d, 0); a[0] = 5; a[1] = 2; return a; }(),  // odd: zero
        [&] { std::vector<int> a(d, 0); a[0] = 3; return a; }(),            // odd: zero
    };
    if (d >= 3) {
      std::vector<int> a(d, 0);
      a[0] = 2;
      a[1] = 2;
      a[2] = 2;
      cases.push_back(a);
    }
    Point lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      lo[i] = -1;
      hi[i] = 1;
    }
    for (const auto& alpha : cases) {
      FieldFn f = [&alpha](const Point& y) {
        double v = 1.0;
        for (int i = 0; i < y.dim; ++i) v *= std::pow(y[i], alpha[i]);
        return v;
      };
      auto r = integrate_box(f, lo, hi, one_shot);
      REQUIRE(r.value == Approx(exact_monomial(alpha)).margin(1e-11 * std::pow(2.0, d)));
    }
    // degree <= 5 monomials are exact for both embedded rules: zero estimate
    FieldFn quad = [](const Point& y) { return y[0] * y[0] * y[1] * y[1]; };
    auto rq = integrate_box(quad, lo, hi, one_shot);
    REQUIRE(rq.error < 1e-11 * std::pow(2.0, d));
  }
  REQUIRE_THROWS_AS(detail::make_cubature_rule(1), InvalidConfigError);
  REQUIRE_THROWS_AS(detail::make_cubature_rule(10), InvalidConfigError);
}

TEST_CASE("adaptive box integration of a gaussian") {
  Point lo(3), hi(3);
  for (int i = 0; i < 3; ++i) {
    lo[i] = -4;
    hi[i] = 4;
  }
  FieldFn f = [](const Point& y) { return std::exp(-norm2(y)); };
  auto r = integrate_box(f, lo, hi);
  const double erf4 = std::erf(4.0);
  REQUIRE(r.value == Approx(std::pow(kPi, 1.5) * erf4 * erf4 * erf4).epsilon(1e-9));
}

TEST_CASE("box integration is bitwise deterministic") {
  Point lo{-2, -2, -2}, hi{2, 2, 2};
  FieldFn f = [](const Point& y) { return std::cos(3.0 * y[0]) * std::exp(-norm2(y)); };
  IntegrationOptions opts;
  opts.abs_tol = 1e-6;
  opts.rel_tol = 1e-5;
  auto a = integrate_box(f, lo, hi, opts);
  auto b = integrate_box(f, lo, hi, opts);
  REQUIRE(a.value == b.value);
  REQUIRE(a.error == b.error);
  REQUIRE(a.evaluations == b.evaluations);
}

TEST_CASE("truncation radius chooser respects declared decay") {
  ScalarField f;
  f.value = [](const Point& y) { return std::pow(1.0 + norm2(y), -5.0); };
  f.decay_exponent = 10.0;  // in dimension 5: p - N = 5 margin
  IntegrationOptions opts;
  const double R = choose_truncation_radius(f, 5, opts);
  REQUIRE(R >= 8.0);
  // declared non-integrable decay must be rejected
  ScalarField slow;
  slow.value = f.value;
  slow.decay_exponent = 4.0;
  REQUIRE_THROWS_AS(choose_truncation_radius(slow, 5, opts), DivergentIntegralError);
  // explicit override wins
  opts.truncation_radius = 123.0;
  REQUIRE(choose_truncation_radius(f, 5, opts) == 123.0);
}

TEST_CASE("radial reduction integrates gaussians and bubble powers") {
  ScalarField g;
  g.value = [](const Point& y) { return std::exp(-norm2(y)); };
  g.decay_exponent = 50.0;  // decays faster than any polynomial
  auto r = integrate_radial(g, 5);
  REQUIRE(r.value == Approx(std::pow(kPi, 2.5)).epsilon(1e-10));
  REQUIRE(r.truncation_radius > 0);

  // int U^{2^*} against the closed moment table, N = 5 and 7
  for (int N : {5, 7}) {
    Bubble b = make_bubble(Point(N), 1.0);
    ScalarField f;
    f.value = [b, N](const Point& y) {
      return std::pow(bubble_value(b, y), critical_exponent(N));
    };
    f.decay_exponent = 2.0 * N;  // U^{2^*} ~ |y|^{-2N}
    auto v = integrate_radial(f, N);
    REQUIRE(v.value == Approx(closed_moments(N).volume_mass).epsilon(1e-8));
  }
}

TEST_CASE("cylinder reduction matches radial results and handles folds") {
  const int N = 5;
  Bubble b = make_bubble(Point(N), 1.0);
  ScalarField f;
  f.value = [b](const Point& y) { return std::pow(bubble_value(b, y), critical_exponent(5)); };
  f.decay_exponent = 10.0;
  IntegrationOptions opts;
  opts.abs_tol = 1e-7;
  opts.rel_tol = 1e-8;
  CylinderFrame frame = make_cylinder_frame(N, {0, 1}, 1, true);
  auto r = integrate_cylinder(f, N, frame, opts);
  REQUIRE(r.value == Approx(closed_moments(5).volume_mass).epsilon(1e-6));

  // ring of gaussians: fold reduction must reproduce k * pi^{N/2}
  PolygonConfig cfg;
  cfg.dim = N;
  cfg.plane = {0, 1};
  cfg.count = 4;
  cfg.radius = 1.5;
  cfg.scale = 1.0;
  const auto centers = build_polygon(cfg);
  ScalarField ring;
  ring.value = [centers](const Point& y) {
    double s = 0;
    for (const auto& c : centers) s += std::exp(-dist2(y, c));
    return s;
  };
  ring.decay_exponent = 40.0;
  CylinderFrame folded = make_cylinder_frame(N, {0, 1}, 4, true);
  auto rf = integrate_cylinder(ring, N, folded, opts);
  REQUIRE(rf.value == Approx(4.0 * std::pow(kPi, 2.5)).epsilon(1e-6));
  // the same integral without using the fold (slower; looser tolerance)
  IntegrationOptions wide;
  wide.abs_tol = 1e-4;
  wide.rel_tol = 1e-6;
  wide.max_regions = 100000;
  CylinderFrame unfolded = make_cylinder_frame(N, {0, 1}, 1, false);
  auto ru = integrate_cylinder(ring, N, unfolded, wide);
  REQUIRE(ru.value == Approx(rf.value).epsilon(1e-5));
}

TEST_CASE("two-plane reduction integrates separable plane moments") {
  const int N = 5;
  ScalarField f;
  f.value = [](const Point& y) {
    const double s1 = y[0] * y[0] + y[1] * y[1];
    const double s2 = y[2] * y[2] + y[3] * y[3];
    return std::exp(-norm2(y)) * s1 * s2;
  };
  f.decay_exponent = 40.0;
  TorusFrame frame;
  frame.plane1 = make_cylinder_frame(N, {0, 1}, 1, true);
  frame.plane2 = make_cylinder_frame(N, {2, 3}, 1, true);
  IntegrationOptions opts;  // 5 integration variables: spot-check accuracy
  opts.abs_tol = 1e-3;
  opts.rel_tol = 1e-4;
  auto r = integrate_torus(f, N, frame, opts);
  // separable closed form: pi^{5/2}
  REQUIRE(r.value == Approx(std::pow(kPi, 2.5)).epsilon(1e-4));
}

TEST_CASE("full box mode agrees with the radial reduction") {
  // no-symmetry fallback: expensive in 5-d, so verified at spot-check accuracy
  const int N = 5;
  ScalarField f;
  f.value = [](const Point& y) { return std::exp(-norm2(y)); };
  f.decay_exponent = 40.0;
  IntegrationOptions opts;
  opts.abs_tol = 1e-3;
  opts.rel_tol = 1e-4;
  opts.max_regions = 60000;
  auto r = integrate_fullbox(f, N, opts);
  REQUIRE(r.value == Approx(std::pow(kPi, 2.5)).epsilon(1e-4));
}

TEST_CASE("sphere integrals in all modes") {
  const int N = 5;
  const double area = sphere_area(N - 1);

  // zonal: constants and second moments
  auto r1 = integrate_sphere([](const Point&) { return 1.0; }, N, Point(N), 2.5,
                             SphereMode::kZonal, make_axis_frame(N, 0));
  REQUIRE(r1.value == Approx(area * std::pow(2.5, N - 1)).epsilon(1e-10));

  auto r2 = integrate_sphere([](const Point& y) { return y[0] * y[0]; }, N, Point(N), 1.0,
                             SphereMode::kZonal, make_axis_frame(N, 0));
  REQUIRE(r2.value == Approx(area / N).epsilon(1e-10));

  // plane-cylinder: mixed second moments int y0^2 y1^2 = area/(N(N+2))
  SphereFrame pframe;
  pframe.axis1 = unit_vector(0, N);
  pframe.axis2 = unit_vector(1, N);
  auto r3 = integrate_sphere([](const Point& y) { return y[0] * y[0] * y[1] * y[1]; }, N,
                             Point(N), 1.0, SphereMode::kPlaneCylinder, pframe);
  REQUIRE(r3.value == Approx(area / (N * (N + 2.0))).epsilon(1e-9));

  // full angles agrees on the same integrand
  IntegrationOptions opts;
  opts.abs_tol = 1e-8;
  opts.rel_tol = 1e-8;
  auto r4 = integrate_sphere([](const Point& y) { return y[0] * y[0] * y[1] * y[1]; }, N,
                             Point(N), 1.0, SphereMode::kFullAngles, pframe, opts);
  REQUIRE(r4.value == Approx(r3.value).epsilon(1e-7));

  // off-center sphere: zonal about the center works in shifted coordinates
  Point c(N);
  c[0] = 2.0;
  auto r5 = integrate_sphere([&c](const Point& y) { return dist2(y, c); }, N, c, 1.5,
                             SphereMode::kZonal, make_axis_frame(N, 0));
  REQUIRE(r5.value == Approx(area * std::pow(1.5, N - 1) * 1.5 * 1.5).epsilon(1e-10));

  // Monte Carlo mode: deterministic given the seed, near the true value
  SphereFrame mc;
  mc.seed = 7;
  mc.samples = 20000;
  auto r6 = integrate_sphere([](const Point& y) { return y[0] * y[0]; }, N, Point(N), 1.0,
                             SphereMode::kMonteCarlo, mc);
  auto r7 = integrate_sphere([](const Point& y) { return y[0] * y[0]; }, N, Point(N), 1.0,
                             SphereMode::kMonteCarlo, mc);
  REQUIRE(r6.value == r7.value);
  REQUIRE(r6.value == Approx(area / N).margin(5.0 * r6.error));
  REQUIRE(r6.error > 0);
}

TEST_CASE("ball integral as a stack of spheres") {
  const int N = 5;
  // int_{B_R} |y|^2 dy = area * R^{N+2}/(N+2)
  const double R = 1.75;
  auto r = integrate_ball([](const Point& y) { return norm2(y); }, N, Point(N), R,
                          SphereMode::kZonal, make_axis_frame(N, 0));
  REQUIRE(r.value == Approx(sphere_area(N - 1) * std::pow(R, N + 2) / (N + 2)).epsilon(1e-9));
}
