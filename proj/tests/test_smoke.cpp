// Build smoke test: every public header compiles and basic invariants hold.

#include <catch2/catch_amalgamated.hpp>

#include "multibump/bubble.hpp"
#include "multibump/core.hpp"
#include "multibump/potential.hpp"
#include "multibump/quadrature.hpp"
#include "multibump/symmetry.hpp"

using namespace multibump;

TEST_CASE("headers compile and basic objects construct") {
  Point p{1.0, 2.0, 0.0, 0.0, 1.0};
  REQUIRE(p.dim == 5);
  REQUIRE(norm2(p) == Catch::Approx(6.0));

  PolygonConfig cfg;
  cfg.dim = 5;
  cfg.count = 4;
  cfg.radius = 2.0;
  cfg.scale = 10.0;
  Tower t = make_tower(cfg);
  REQUIRE(t.bubbles.size() == 4);
  REQUIRE(tower_value(t, Point(5)) > 0);

  PotentialK k1 = make_constant_potential(5);
  REQUIRE(K_value(k1, p) == 1.0);

  const MomentTable m = closed_moments(5);
  REQUIRE(m.mass_flux > 0);

  IntegralResult r = integrate_interval([](double x) { return x * x; }, 0.0, 1.0);
  REQUIRE(r.value == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}
