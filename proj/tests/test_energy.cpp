// Energy module: expansion model closed forms, constant fitting, interaction
// integrals, direct tower energies, the ring balance equation, and the
// critical-point search.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "multibump/energy.hpp"

using namespace multibump;

namespace {

ExpansionConstants synthetic_constants() {
  ExpansionConstants c;
  c.dim = 7;
  c.r0 = 1.0;
  c.A = 2.5;
  c.B1 = 1.7;
  c.B2 = 3.1;
  c.B3 = 0.9;
  return c;
}

}  // namespace

TEST_CASE("expansion model closed forms") {
  const ExpansionConstants c = synthetic_constants();
  const int n = 8;
  const double base = 11.0;

  SECTION("quadratic term vanishes at t = r0") {
    const double lam = 40.0;
    const double expect =
        base + n * c.A + n * (c.B1 / (lam * lam) - c.B3 * std::pow(8.0, 5) / std::pow(lam, 5));
    REQUIRE(expansion_energy(c, n, c.r0, lam, base) == Catch::Approx(expect).epsilon(1e-14));
    // moving t off r0 adds exactly n B2 (r0-t)^2
    const double dt = 0.07;
    REQUIRE(expansion_energy(c, n, c.r0 + dt, lam, base) -
                expansion_energy(c, n, c.r0, lam, base) ==
            Catch::Approx(n * c.B2 * dt * dt).epsilon(1e-12));
  }

  SECTION("lambda_star is stationary and scales like n^{(N-2)/(N-4)}") {
    const double ls = lambda_star(c, n);
    REQUIRE(ls == Catch::Approx(std::pow(5.0 * c.B3 / (2.0 * c.B1), 1.0 / 3.0) *
                                std::pow(8.0, 5.0 / 3.0))
                      .epsilon(1e-14));
    // central difference of F in lambda at lambda_star vanishes
    const double h = 1e-5 * ls;
    const double d = (expansion_energy(c, n, c.r0, ls + h) -
                      expansion_energy(c, n, c.r0, ls - h)) /
                     (2 * h);
    const double curv_scale = n * c.B1 / (ls * ls * ls);
    REQUIRE(std::abs(d) < 1e-7 * curv_scale);
    // growth in n
    REQUIRE(lambda_star(c, 2 * n) / ls == Catch::Approx(std::pow(2.0, 5.0 / 3.0)).epsilon(1e-13));
  }

  SECTION("bracket at lambda_star equals B1/lambda*^2 (1 - 2/(N-2)) > 0") {
    const double ls = lambda_star(c, n);
    const double bracket = (expansion_energy(c, n, c.r0, ls) - n * c.A) / n;
    const double expect = c.B1 / (ls * ls) * (1.0 - 2.0 / (c.dim - 2.0));
    REQUIRE(bracket == Catch::Approx(expect).epsilon(1e-12));
    REQUIRE(bracket > 0);
  }

  SECTION("verbatim quadratic form differs and cannot vanish for t near r0") {
    ExpansionConstants v = c;
    v.verbatim_quadratic = true;
    const double lam = 40.0;
    // at t = r0 the verbatim term contributes B2 r0^2 (lam-1)^2 / lam^2
    const double diff = expansion_energy(v, n, c.r0, lam) - expansion_energy(c, n, c.r0, lam);
    const double expect = n * c.B2 * std::pow(lam * c.r0 - c.r0, 2) / (lam * lam);
    REQUIRE(diff == Catch::Approx(expect).epsilon(1e-12));
    REQUIRE(diff > 0);
  }

  SECTION("input validation") {
    REQUIRE_THROWS_AS(expansion_energy(c, 0, 1.0, 10.0), InvalidConfigError);
    REQUIRE_THROWS_AS(expansion_energy(c, 4, 1.0, 0.0), InvalidConfigError);
    ExpansionConstants bad = c;
    bad.B1 = 0.0;
    REQUIRE_THROWS_AS(lambda_star(bad, 8), InvalidConfigError);
  }
}

TEST_CASE("expansion fit recovers synthetic constants") {
  const ExpansionConstants c = synthetic_constants();
  const double base = 37.0;
  std::vector<ExpansionSample> samples;
  for (int n : {8, 12}) {
    const double ls = lambda_star(c, n);
    for (double t : {0.9, 1.0, 1.12}) {
      for (double fl : {0.7, 1.0, 1.5}) {
        ExpansionSample s;
        s.t = t;
        s.lambda = fl * ls;
        s.count = n;
        s.value = expansion_energy(c, n, t, s.lambda, base);
        samples.push_back(s);
      }
    }
  }

  SECTION("exact recovery") {
    const ExpansionFit fit = fit_expansion_constants(7, 1.0, base, samples);
    REQUIRE(fit.constants.A == Catch::Approx(c.A).epsilon(1e-9));
    REQUIRE(fit.constants.B1 == Catch::Approx(c.B1).epsilon(1e-8));
    REQUIRE(fit.constants.B2 == Catch::Approx(c.B2).epsilon(1e-8));
    REQUIRE(fit.constants.B3 == Catch::Approx(c.B3).epsilon(1e-8));
    REQUIRE(fit.constants_positive);
    REQUIRE(fit.residual_rms < 1e-10 * base);
  }

  SECTION("perturbing one sample inflates the residual report") {
    const ExpansionFit clean = fit_expansion_constants(7, 1.0, base, samples);
    std::vector<ExpansionSample> noisy = samples;
    noisy[4].value += 0.05;
    const ExpansionFit dirty = fit_expansion_constants(7, 1.0, base, noisy);
    REQUIRE(dirty.residual_rms > 1e3 * std::max(clean.residual_rms, 1e-14));
    REQUIRE(dirty.residual_max > 0.02);
  }

  SECTION("rank-deficient designs are rejected") {
    // single lambda and single t: the A and B1 columns are proportional
    std::vector<ExpansionSample> degenerate;
    for (int n : {4, 6, 8, 10, 12, 14}) {
      ExpansionSample s;
      s.t = 1.0;
      s.lambda = 30.0;
      s.count = n;
      s.value = expansion_energy(c, n, s.t, s.lambda, base);
      degenerate.push_back(s);
    }
    REQUIRE_THROWS_AS(fit_expansion_constants(7, 1.0, base, degenerate), InvalidConfigError);
    REQUIRE_THROWS_AS(
        fit_expansion_constants(7, 1.0, base, std::vector<ExpansionSample>(samples.begin(),
                                                                           samples.begin() + 3)),
        InvalidConfigError);
  }
}

TEST_CASE("critical point search") {
  SECTION("paraboloid minimum") {
    const Energy2D F = [](double t, double l) {
      return (t - 1.0) * (t - 1.0) + 0.01 * (l - 30.0) * (l - 30.0);
    };
    SearchWindow w{0.5, 1.5, 10.0, 50.0};
    const CriticalPoint cp = find_critical_point(F, w);
    REQUIRE(cp.t == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(cp.lambda == Catch::Approx(30.0).margin(1e-7));
    REQUIRE(cp.kind == CriticalKind::kMinimum);
  }

  SECTION("synthetic expansion: saddle at (r0, lambda_star) to 1e-8") {
    const ExpansionConstants c = synthetic_constants();
    const int n = 8;
    const double ls = lambda_star(c, n);
    const Energy2D F = [&](double t, double l) { return expansion_energy(c, n, t, l); };
    SearchWindow w{0.8, 1.2, 0.5 * ls, 1.8 * ls};
    const CriticalPoint cp = find_critical_point(F, w);
    REQUIRE(std::abs(cp.t - c.r0) <= 1e-8);
    REQUIRE(std::abs(cp.lambda - ls) <= 1e-8 * ls);
    // minimum in t, maximum in lambda: a saddle
    REQUIRE(cp.kind == CriticalKind::kSaddle);
    REQUIRE(cp.h_tt > 0);
    REQUIRE(cp.h_ll < 0);
  }

  SECTION("window excluding the stationary scale reports a boundary hit") {
    const ExpansionConstants c = synthetic_constants();
    const int n = 8;
    const double ls = lambda_star(c, n);
    const Energy2D F = [&](double t, double l) { return expansion_energy(c, n, t, l); };
    SearchWindow w{0.8, 1.2, 2.0 * ls, 4.0 * ls};
    REQUIRE_THROWS_AS(find_critical_point(F, w), BoundaryHitError);
  }
}

TEST_CASE("interaction integral") {
  const int N = 5;

  SECTION("frozen two-bubble value at separation 50 and the normalized ratio") {
    const Bubble b1 = make_bubble(Point(N), 1.0);
    Point c2(N);
    c2[0] = 50.0;
    const Bubble b2 = make_bubble(c2, 1.0);
    IntegrationOptions opts;
    opts.abs_tol = 1e-12;
    opts.rel_tol = 1e-8;
    opts.max_regions = 200000;
    const InteractionResult r = interaction(b1, b2, opts);
    REQUIRE(r.value == Catch::Approx(0.0366515381756).epsilon(1e-7));
    REQUIRE(r.ratio_valid);
    REQUIRE(r.ratio == Catch::Approx(0.99879325).epsilon(1e-6));
    REQUIRE(r.ratio > 0.98);
    REQUIRE(r.ratio < 1.02);

    // swapping the arguments changes nothing for equal scales
    const InteractionResult rs = interaction(b2, b1, opts);
    REQUIRE(rs.value == Catch::Approx(r.value).epsilon(1e-9));
  }

  SECTION("scaling identity: value depends on (mu, d) through mu * d") {
    IntegrationOptions opts;
    opts.rel_tol = 1e-8;
    opts.max_regions = 200000;
    Point c2(N);
    c2[0] = 6.0;
    const InteractionResult a =
        interaction(make_bubble(Point(N), 1.0), make_bubble(c2, 1.0), opts);
    Point c3(N);
    c3[0] = 2.0;
    const InteractionResult b =
        interaction(make_bubble(Point(N), 3.0), make_bubble(c3, 3.0), opts);
    // int U_{0,mu}^{2*-1} U_{d e1, mu} = int U_{0,1}^{2*-1} U_{mu d e1, 1}
    REQUIRE(b.value == Catch::Approx(a.value).epsilon(1e-6));
  }

  SECTION("monotone decreasing in separation") {
    IntegrationOptions opts;
    opts.rel_tol = 1e-7;
    double prev = 0;
    bool first = true;
    for (double d : {8.0, 12.0, 18.0}) {
      Point c2(N);
      c2[1] = d;
      const InteractionResult r =
          interaction(make_bubble(Point(N), 1.0), make_bubble(c2, 1.0), opts);
      if (!first) REQUIRE(r.value < prev);
      prev = r.value;
      first = false;
    }
  }

  SECTION("coincident centers are rejected") {
    REQUIRE_THROWS_AS(interaction(make_bubble(Point(N), 1.0), make_bubble(Point(N), 2.0)),
                      InvalidConfigError);
  }
}

TEST_CASE("tower energies") {
  SECTION("single bubble at the origin matches the closed form, N = 5 and 6") {
    for (int N : {5, 6}) {
      Tower t;
      t.bubbles.push_back(make_bubble(Point(N), 1.0));
      const PotentialK K = make_constant_potential(N);
      const EnergyResult e = tower_energy_radial(t, K);
      REQUIRE(e.value == Catch::Approx(single_bubble_energy(N)).epsilon(1e-8));
    }
  }

  SECTION("energy is invariant under translation and rescaling for K == 1") {
    const int N = 5;
    const PotentialK K = make_constant_potential(N);
    IntegrationOptions opts;
    opts.rel_tol = 1e-7;

    Point c1(N);
    c1[0] = 1.3;
    Tower t1;
    t1.bubbles.push_back(make_bubble(c1, 1.0));
    CylinderFrame f1;
    f1.axis1 = normalized(c1);
    f1.axis2 = detail::complement_vector({f1.axis1}, N);
    f1.even = true;
    const EnergyResult e1 = tower_energy(t1, K, f1, opts);

    Point c2(N);
    c2[0] = 0.4;
    c2[1] = 0.3;
    Tower t2;
    t2.bubbles.push_back(make_bubble(c2, 2.7));
    CylinderFrame f2;
    f2.axis1 = normalized(c2);
    f2.axis2 = detail::complement_vector({f2.axis1}, N);
    f2.even = true;
    const EnergyResult e2 = tower_energy(t2, K, f2, opts);

    const double closed = single_bubble_energy(N);
    REQUIRE(e1.value == Catch::Approx(closed).epsilon(1e-6));
    REQUIRE(e2.value == Catch::Approx(closed).epsilon(1e-6));
  }

  SECTION("two-bubble deficit matches the interaction integral") {
    const int N = 5;
    const PotentialK K = make_constant_potential(N);
    const double d = 10.0;
    PolygonConfig cfg;
    cfg.dim = N;
    cfg.plane = {0, 1};
    cfg.count = 2;
    cfg.radius = d / 2;
    cfg.scale = 1.0;
    const Tower t = make_tower(cfg);
    IntegrationOptions opts;
    opts.rel_tol = 1e-8;
    opts.abs_tol = 1e-10;
    opts.max_regions = 200000;
    const EnergyResult e =
        tower_energy(t, K, make_cylinder_frame(N, cfg.plane, 2, true), opts);
    const double deficit = 2.0 * single_bubble_energy(N) - e.value;

    const InteractionResult inter =
        interaction(t.bubbles[0], t.bubbles[1], opts);
    REQUIRE(deficit > 0);
    // deficit = interaction + higher-order cross terms (a few percent at d = 10)
    REQUIRE(deficit == Catch::Approx(inter.value).epsilon(0.2));
  }

  SECTION("glued tower: torus reduction agrees with the cylinder reduction") {
    // a single-ring tower is a degenerate glued configuration; integrate it
    // both ways
    const int N = 7;
    PolygonConfig outer;
    outer.dim = N;
    outer.plane = {0, 1};
    outer.count = 4;
    outer.radius = 1.0;
    outer.scale = 6.0;
    const PotentialK K = make_quadratic_bump(N, 1.0, 1.0);
    const Tower t = make_tower(outer);

    IntegrationOptions copts;
    copts.rel_tol = 1e-7;
    const EnergyResult ec =
        tower_energy(t, K, make_cylinder_frame(N, outer.plane, 4, true), copts);

    IntegrationOptions topts;
    topts.rel_tol = 1e-4;
    topts.abs_tol = 1e-3;
    topts.max_regions = 120000;
    TorusFrame fr;
    fr.plane1 = make_cylinder_frame(N, outer.plane, 4, true);
    fr.plane2 = make_cylinder_frame(N, {2, 3}, 4, true);  // full rotational symmetry
    const EnergyResult et = tower_energy(t, K, fr, topts);

    REQUIRE(et.value == Catch::Approx(ec.value).epsilon(2e-4));
  }

  SECTION("radial mode rejects off-origin towers; glued helpers validate planes") {
    const int N = 5;
    Point c(N);
    c[0] = 1.0;
    Tower t;
    t.bubbles.push_back(make_bubble(c, 1.0));
    REQUIRE_THROWS_AS(tower_energy_radial(t, make_constant_potential(N)), InvalidConfigError);

    PolygonConfig a;
    a.dim = 5;
    a.plane = {0, 1};
    a.count = 2;
    a.radius = 1.0;
    a.scale = 2.0;
    PolygonConfig b = a;
    b.plane = {1, 2};
    REQUIRE_THROWS_AS(make_glued_tower(a, b), InvalidConfigError);
    b.plane = {2, 3};
    REQUIRE(make_glued_tower(a, b).bubbles.size() == 4);
  }
}

TEST_CASE("ring balance equation") {
  const PotentialK K = make_quadratic_bump(7, 1.0, 1.0);

  SECTION("frozen solutions at N = 7, c0 = 1, r0 = 1") {
    REQUIRE(solve_balance(K, 8).mu_bar == Catch::Approx(1.727139723).epsilon(1e-8));
    REQUIRE(solve_balance(K, 16).mu_bar == Catch::Approx(2.637863831).epsilon(1e-8));
    REQUIRE(solve_balance(K, 32).mu_bar == Catch::Approx(4.147640227).epsilon(1e-8));
  }

  SECTION("solution structure") {
    const BalanceSolution s = solve_balance(K, 8);
    REQUIRE(s.count == 8);
    REQUIRE(s.r_bar == Catch::Approx(8.0));
    REQUIRE(s.mu == Catch::Approx(8.0 * s.mu_bar));
    REQUIRE(s.residual < 1e-12);
    REQUIRE(s.iterations >= 1);
  }

  SECTION("nearest-neighbor guess is a 2% crosscheck at k = 8") {
    const double guess = balance_nearest_guess(K, 8);
    REQUIRE(guess == Catch::Approx(1.69246857).epsilon(1e-8));
    REQUIRE(solve_balance(K, 8).mu_bar / guess == Catch::Approx(1.0205).epsilon(1e-3));
  }

  SECTION("scale doubling approaches 2^{2/(N-4)}") {
    const double r1 = solve_balance(K, 16).mu_bar / solve_balance(K, 8).mu_bar;
    const double r2 = solve_balance(K, 32).mu_bar / solve_balance(K, 16).mu_bar;
    const double target = std::pow(2.0, 2.0 / 3.0);
    REQUIRE(std::abs(r1 - target) / target < 0.05);
    REQUIRE(std::abs(r2 - target) / target < 0.05);
    REQUIRE(std::abs(r2 - target) < std::abs(r1 - target));
  }

  SECTION("fitted growth exponents over k in {8, 16, 32}") {
    std::vector<double> ks, mubars, mus;
    for (int k : {8, 16, 32}) {
      const BalanceSolution s = solve_balance(K, k);
      ks.push_back(k);
      mubars.push_back(s.mu_bar);
      mus.push_back(s.mu);
    }
    const LineFit fbar = fit_loglog(ks, mubars);
    const LineFit fmu = fit_loglog(ks, mus);
    REQUIRE(fbar.slope == Catch::Approx(0.631953).margin(1e-5));
    REQUIRE(fmu.slope == Catch::Approx(1.631953).margin(1e-5));
    // the original-frame scale matches k^{(N-2)/(N-4)} within 5 percent
    REQUIRE(std::abs(fmu.slope - 5.0 / 3.0) / (5.0 / 3.0) < 0.05);
  }

  SECTION("flat potentials admit no balance") {
    REQUIRE_THROWS_AS(solve_balance(make_constant_potential(7), 8), InvalidConfigError);
    REQUIRE_THROWS_AS(solve_balance(K, 1), InvalidConfigError);
  }
}

TEST_CASE("least-squares line fit helpers") {
  SECTION("exact line") {
    const LineFit f = fit_line({1, 2, 3, 4}, {3.5, 5.0, 6.5, 8.0});
    REQUIRE(f.slope == Catch::Approx(1.5).epsilon(1e-13));
    REQUIRE(f.intercept == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(f.r_squared == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("power law through fit_loglog") {
    std::vector<double> x{2, 4, 8, 16}, y;
    for (double v : x) y.push_back(7.0 * std::pow(v, -1.75));
    const LineFit f = fit_loglog(x, y);
    REQUIRE(f.slope == Catch::Approx(-1.75).epsilon(1e-12));
    REQUIRE(std::exp(f.intercept) == Catch::Approx(7.0).epsilon(1e-12));
  }
  SECTION("validation") {
    REQUIRE_THROWS_AS(fit_line({1, 1}, {2, 3}), InvalidConfigError);
    REQUIRE_THROWS_AS(fit_line({1}, {2}), InvalidConfigError);
    REQUIRE_THROWS_AS(fit_loglog({1, -2}, {2, 3}), InvalidConfigError);
  }
}
