#pragma once

// Deterministic adaptive quadrature.
//
//  * 1-d: embedded 7/15-point Gauss-Legendre pair with bisection refinement.
//    Nodes are computed at runtime by Newton iteration on the Legendre
//    recurrence, not from tables.
//  * d >= 2: embedded degree-7 / degree-5 fully symmetric cubature.  The
//    generator radii are fixed; the weights are solved at runtime from the
//    monomial moment equations and cross-checked, so the rule certifies its
//    own construction.
//  * Unbounded integrals are truncated at a radius chosen from the integrand's
//    declared decay exponent so that the tail bound is below tolerance.
//  * Symmetry reductions: radial 1-d, cylinder 3-d (rotation-invariant about a
//    2-plane with a discrete fold in the plane angle), a 5-variable reduction
//    for fields with two orthogonal rotation planes, full boxes, spheres
//    (zonal / plane-cylinder / full-angle / antithetic Monte Carlo), balls.
//
// Every routine is bitwise deterministic: work queues break ties on insertion
// order and final sums are pairwise in insertion order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "multibump/core.hpp"
#include "multibump/symmetry.hpp"

namespace multibump {

// Default tolerances are calibrated to the embedded-pair error estimator,
// which is deliberately conservative (the reported error typically exceeds the
// true error by one to three orders of magnitude).
struct IntegrationOptions {
  double abs_tol = 1e-8;
  double rel_tol = 1e-7;
  long max_regions = 60000;        // refinement budget (intervals or boxes)
  double truncation_radius = 0;    // 0 = choose from the declared decay
  std::vector<double> breakpoints; // 1-d: known scales to pre-split at
};

struct IntegralResult {
  double value = 0;
  double error = 0;        // estimated absolute error of the quadrature
  long evaluations = 0;    // number of integrand evaluations
  double truncation_radius = 0;  // 0 when the domain was already bounded
};

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes by Newton iteration

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;
};

inline GaussRule compute_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));  // classical first guess
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence: (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}
      double p0 = 1.0, p1 = x;
      for (int j = 1; j < n; ++j) {
        const double p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

namespace detail {

inline const GaussRule& gauss7() {
  static const GaussRule r = compute_gauss_legendre(7);
  return r;
}
inline const GaussRule& gauss15() {
  static const GaussRule r = compute_gauss_legendre(15);
  return r;
}

struct Piece {
  double value = 0;
  double error = 0;
  double a = 0, b = 0;
  long id = 0;
};

struct PieceWorse {
  bool operator()(const Piece& x, const Piece& y) const {
    if (x.error != y.error) return x.error < y.error;  // max-heap on error
    return x.id > y.id;                                // then oldest first
  }
};

}  // namespace detail

using Fn1D = std::function<double(double)>;

/// Adaptive integral of f over the bounded interval [a, b].
inline IntegralResult integrate_interval(const Fn1D& f, double a, double b,
                                         const IntegrationOptions& opts = {}) {
  if (!(a <= b)) throw InvalidConfigError("integrate_interval: requires a <= b");
  const GaussRule& g7 = detail::gauss7();
  const GaussRule& g15 = detail::gauss15();
  IntegralResult out;

  auto evaluate = [&](double lo, double hi, long id) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double v7 = 0, v15 = 0;
    for (int i = 0; i < 7; ++i) v7 += g7.weights[i] * f(mid + half * g7.nodes[i]);
    for (int i = 0; i < 15; ++i) v15 += g15.weights[i] * f(mid + half * g15.nodes[i]);
    out.evaluations += 22;
    detail::Piece p;
    p.a = lo;
    p.b = hi;
    p.id = id;
    p.value = half * v15;
    p.error = std::abs(half * (v15 - v7));
    return p;
  };

  std::vector<double> cuts = {a};
  for (double c : opts.breakpoints)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<detail::Piece> heap;
  long next_id = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i)
    heap.push_back(evaluate(cuts[i], cuts[i + 1], next_id++));
  std::make_heap(heap.begin(), heap.end(), detail::PieceWorse{});

  // Deterministic exact totals: pairwise sums in insertion order.
  auto resum = [&heap](double& value, double& error) {
    std::vector<detail::Piece> pieces = heap;
    std::sort(pieces.begin(), pieces.end(),
              [](const detail::Piece& x, const detail::Piece& y) { return x.id < y.id; });
    std::vector<double> vals, errs;
    for (const auto& p : pieces) {
      vals.push_back(p.value);
      errs.push_back(p.error);
    }
    value = pairwise_sum(vals);
    error = pairwise_sum(errs);
  };

  double value = 0, error = 0;
  resum(value, error);
  long since_resum = 0;
  while (true) {
    if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
      resum(value, error);
      if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
        out.value = value;
        out.error = error;
        return out;
      }
    }
    if (next_id >= opts.max_regions) {
      resum(value, error);
      throw ConvergenceError("integrate_interval: refinement budget exhausted", value, error);
    }
    if (++since_resum >= 256) {  // refresh the running totals periodically
      resum(value, error);
      since_resum = 0;
    }
    std::pop_heap(heap.begin(), heap.end(), detail::PieceWorse{});
    const detail::Piece worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // interval at floating-point resolution; accept its estimate as-is
      detail::Piece p = worst;
      p.error = 0;
      error = std::max(0.0, error - worst.error);
      heap.push_back(p);
      std::push_heap(heap.begin(), heap.end(), detail::PieceWorse{});
      continue;
    }
    const detail::Piece left = evaluate(worst.a, mid, next_id++);
    const detail::Piece right = evaluate(mid, worst.b, next_id++);
    value += left.value + right.value - worst.value;
    error = std::max(0.0, error + left.error + right.error - worst.error);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), detail::PieceWorse{});
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), detail::PieceWorse{});
  }
}

// ---------------------------------------------------------------------------
// Embedded degree-7 / degree-5 fully symmetric cubature on boxes, 2 <= d <= 9

namespace detail {

struct CubatureRule {
  int dim = 0;
  double l2 = 0, l3 = 0, l4 = 0, l5 = 0;  // generator radii on [-1,1]^d
  double w1 = 0, w2 = 0, w3 = 0, w4 = 0, w5 = 0;      // degree-7 weights
  double v1 = 0, v2 = 0, v3 = 0, v4 = 0;              // embedded degree-5
  long points = 0;
};

/// Solve the cubature weights from monomial moment equations and verify the
/// remaining moment conditions, so a construction bug cannot pass silently.
inline CubatureRule make_cubature_rule(int d) {
  if (d < 2 || d > 9) throw InvalidConfigError("cubature rule: dimension must be in [2, 9]");
  CubatureRule r;
  r.dim = d;
  r.l2 = std::sqrt(9.0 / 70.0);
  r.l3 = std::sqrt(9.0 / 10.0);
  r.l4 = std::sqrt(9.0 / 10.0);
  r.l5 = std::sqrt(9.0 / 19.0);
  const double V = std::pow(2.0, d);  // volume of [-1,1]^d
  const double l2p2 = r.l2 * r.l2, l3p2 = r.l3 * r.l3, l4p2 = r.l4 * r.l4, l5p2 = r.l5 * r.l5;

  // Degree-7 rule: exact for 1, x^2, x^4, x^6, x^2 y^2, x^4 y^2, x^2 y^2 z^2.
  r.w5 = 1.0 / (27.0 * l5p2 * l5p2 * l5p2);                     // from x^2 y^2 z^2
  r.w4 = (V / 9.0 - V * r.w5 * l5p2 * l5p2) / (4.0 * l4p2 * l4p2);  // from x^2 y^2
  {
    const double r4 = V / 5.0 - 4.0 * (d - 1) * r.w4 * l4p2 * l4p2 - V * r.w5 * l5p2 * l5p2;
    const double r6 = V / 7.0 - 4.0 * (d - 1) * r.w4 * l4p2 * l4p2 * l4p2 -
                      V * r.w5 * l5p2 * l5p2 * l5p2;
    const double det = 2.0 * l2p2 * l2p2 * 2.0 * l3p2 * l3p2 * l3p2 -
                       2.0 * l3p2 * l3p2 * 2.0 * l2p2 * l2p2 * l2p2;
    r.w2 = (r4 * 2.0 * l3p2 * l3p2 * l3p2 - 2.0 * l3p2 * l3p2 * r6) / det;
    r.w3 = (2.0 * l2p2 * l2p2 * r6 - r4 * 2.0 * l2p2 * l2p2 * l2p2) / det;
  }
  r.w1 = V - 2.0 * d * (r.w2 + r.w3) - 2.0 * d * (d - 1) * r.w4 - V * r.w5;

  // Embedded degree-5 rule: exact for 1, x^2, x^4, x^2 y^2 (no corner points).
  r.v4 = (V / 9.0) / (4.0 * l4p2 * l4p2);
  {
    const double r2 = V / 3.0 - 4.0 * (d - 1) * r.v4 * l4p2;
    const double r4 = V / 5.0 - 4.0 * (d - 1) * r.v4 * l4p2 * l4p2;
    const double det = 2.0 * l2p2 * 2.0 * l3p2 * l3p2 - 2.0 * l3p2 * 2.0 * l2p2 * l2p2;
    r.v2 = (r2 * 2.0 * l3p2 * l3p2 - 2.0 * l3p2 * r4) / det;
    r.v3 = (2.0 * l2p2 * r4 - r2 * 2.0 * l2p2 * l2p2) / det;
  }
  r.v1 = V - 2.0 * d * (r.v2 + r.v3) - 2.0 * d * (d - 1) * r.v4;

  // Cross-check the over-determined moment conditions.
  const double m2 = 2.0 * r.w2 * l2p2 + 2.0 * r.w3 * l3p2 + 4.0 * (d - 1) * r.w4 * l4p2 +
                    V * r.w5 * l5p2;
  const double m42 = 4.0 * r.w4 * l4p2 * l4p2 * l4p2 + V * r.w5 * l5p2 * l5p2 * l5p2;
  if (std::abs(m2 - V / 3.0) > 1e-10 * V || std::abs(m42 - V / 15.0) > 1e-10 * V)
    throw ConvergenceError("cubature rule: moment cross-check failed", m2, m42);

  r.points = 1 + 4L * d + 2L * d * (d - 1) + (1L << d);
  return r;
}

inline const CubatureRule& cubature_rule(int d) {
  static const CubatureRule rules[] = {
      make_cubature_rule(2), make_cubature_rule(3), make_cubature_rule(4),
      make_cubature_rule(5), make_cubature_rule(6), make_cubature_rule(7),
      make_cubature_rule(8), make_cubature_rule(9)};
  if (d < 2 || d > 9) throw InvalidConfigError("cubature rule: dimension must be in [2, 9]");
  return rules[d - 2];
}

struct Box {
  Point lo, hi;
  double value = 0, error = 0;
  int split_axis = 0;
  long id = 0;
};

struct BoxWorse {
  bool operator()(const Box& x, const Box& y) const {
    if (x.error != y.error) return x.error < y.error;
    return x.id > y.id;
  }
};

}  // namespace detail

/// Adaptive integral of f over the box [lo, hi] in dimension lo.dim (>= 2).
inline IntegralResult integrate_box(const FieldFn& f, const Point& lo, const Point& hi,
                                    const IntegrationOptions& opts = {}) {
  const int d = lo.dim;
  if (hi.dim != d) throw InvalidConfigError("integrate_box: bound dimensions differ");
  for (int i = 0; i < d; ++i)
    if (!(lo[i] <= hi[i])) throw InvalidConfigError("integrate_box: requires lo <= hi");
  const detail::CubatureRule& rule = detail::cubature_rule(d);
  IntegralResult out;

  auto evaluate = [&](const Point& blo, const Point& bhi, long id) {
    detail::Box box;
    box.lo = blo;
    box.hi = bhi;
    box.id = id;
    Point c(d), h(d);
    double scale = 1.0;
    for (int i = 0; i < d; ++i) {
      c[i] = 0.5 * (blo[i] + bhi[i]);
      h[i] = 0.5 * (bhi[i] - blo[i]);
      scale *= h[i];
    }
    const double f0 = f(c);
    double sum2 = 0, sum3 = 0, sum4 = 0, sum5 = 0;
    double best_diff = -1;
    for (int i = 0; i < d; ++i) {
      Point p = c;
      p[i] = c[i] + rule.l2 * h[i];
      const double f2p = f(p);
      p[i] = c[i] - rule.l2 * h[i];
      const double f2m = f(p);
      p[i] = c[i] + rule.l3 * h[i];
      const double f3p = f(p);
      p[i] = c[i] - rule.l3 * h[i];
      const double f3m = f(p);
      sum2 += f2p + f2m;
      sum3 += f3p + f3m;
      // fourth divided difference along axis i drives the split choice
      const double ratio = (rule.l2 * rule.l2) / (rule.l3 * rule.l3);
      const double diff = std::abs((f2p + f2m - 2.0 * f0) - ratio * (f3p + f3m - 2.0 * f0));
      if (diff > best_diff) {
        best_diff = diff;
        box.split_axis = i;
      }
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int si = -1; si <= 1; si += 2)
          for (int sj = -1; sj <= 1; sj += 2) {
            Point p = c;
            p[i] = c[i] + si * rule.l4 * h[i];
            p[j] = c[j] + sj * rule.l4 * h[j];
            sum4 += f(p);
          }
    for (long mask = 0; mask < (1L << d); ++mask) {
      Point p(d);
      for (int i = 0; i < d; ++i)
        p[i] = c[i] + ((mask >> i) & 1 ? rule.l5 : -rule.l5) * h[i];
      sum5 += f(p);
    }
    out.evaluations += rule.points;
    const double v7 =
        scale * (rule.w1 * f0 + rule.w2 * sum2 + rule.w3 * sum3 + rule.w4 * sum4 + rule.w5 * sum5);
    const double v5 = scale * (rule.v1 * f0 + rule.v2 * sum2 + rule.v3 * sum3 + rule.v4 * sum4);
    box.value = v7;
    box.error = std::abs(v7 - v5);
    return box;
  };

  std::vector<detail::Box> heap;
  long next_id = 0;
  heap.push_back(evaluate(lo, hi, next_id++));

  auto resum = [&heap](double& value, double& error) {
    std::vector<const detail::Box*> boxes;
    for (const auto& b : heap) boxes.push_back(&b);
    std::sort(boxes.begin(), boxes.end(),
              [](const detail::Box* x, const detail::Box* y) { return x->id < y->id; });
    std::vector<double> vals, errs;
    for (const auto* b : boxes) {
      vals.push_back(b->value);
      errs.push_back(b->error);
    }
    value = pairwise_sum(vals);
    error = pairwise_sum(errs);
  };

  double value = 0, error = 0;
  resum(value, error);
  long since_resum = 0;
  while (true) {
    if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
      resum(value, error);
      if (error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(value))) {
        out.value = value;
        out.error = error;
        return out;
      }
    }
    if (next_id >= opts.max_regions) {
      resum(value, error);
      throw ConvergenceError("integrate_box: refinement budget exhausted", value, error);
    }
    if (++since_resum >= 256) {
      resum(value, error);
      since_resum = 0;
    }
    std::pop_heap(heap.begin(), heap.end(), detail::BoxWorse{});
    const detail::Box worst = heap.back();
    heap.pop_back();
    const int ax = worst.split_axis;
    const double mid = 0.5 * (worst.lo[ax] + worst.hi[ax]);
    if (!(mid > worst.lo[ax] && mid < worst.hi[ax])) {
      detail::Box b = worst;
      b.error = 0;
      error = std::max(0.0, error - worst.error);
      heap.push_back(b);
      std::push_heap(heap.begin(), heap.end(), detail::BoxWorse{});
      continue;
    }
    Point hi1 = worst.hi, lo2 = worst.lo;
    hi1[ax] = mid;
    lo2[ax] = mid;
    const detail::Box b1 = evaluate(worst.lo, hi1, next_id++);
    const detail::Box b2 = evaluate(lo2, worst.hi, next_id++);
    value += b1.value + b2.value - worst.value;
    error = std::max(0.0, error + b1.error + b2.error - worst.error);
    heap.push_back(b1);
    std::push_heap(heap.begin(), heap.end(), detail::BoxWorse{});
    heap.push_back(b2);
    std::push_heap(heap.begin(), heap.end(), detail::BoxWorse{});
  }
}

// ---------------------------------------------------------------------------
// Truncation radius from a declared decay exponent
//
// If |f(y)| <= M |y|^{-p} for |y| >= R with p > N, then
//   | int_{|y|>R} f |  <=  omega_{N-1} M(R) R^N / (p - N),   M(R) = sup_{|y|=R} |f|.
// We grow R until this bound is below a tenth of the absolute tolerance.

namespace detail {

inline std::vector<Point> probe_directions(int dim) {
  std::vector<Point> dirs;
  for (int i = 0; i < dim; ++i) {
    Point p(dim);
    p[i] = 1.0;
    dirs.push_back(p);
    p[i] = -1.0;
    dirs.push_back(p);
  }
  SplitMix64 rng(0x9e3779b97f4a7c15ull);  // fixed seed: deterministic probes
  for (int s = 0; s < 16; ++s) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = rng.normal();
    dirs.push_back(normalized(p));
  }
  return dirs;
}

}  // namespace detail

inline double choose_truncation_radius(const ScalarField& f, int dim,
                                       const IntegrationOptions& opts) {
  if (opts.truncation_radius > 0) return opts.truncation_radius;
  const double p = f.decay_exponent;
  if (!(p > dim))
    throw DivergentIntegralError(
        "choose_truncation_radius: declared decay exponent must exceed the dimension");
  const double target = (opts.abs_tol > 0 ? opts.abs_tol : 1e-12) / 10.0;
  const std::vector<Point> dirs = detail::probe_directions(dim);
  double radius = 8.0;
  for (int doubling = 0; doubling < 60; ++doubling) {
    double peak = 0;
    for (const Point& d : dirs) peak = std::max(peak, std::abs(f.value(radius * d)));
    const double tail = sphere_area(dim - 1) * peak * std::pow(radius, dim) / (p - dim);
    if (tail < target) return radius;
    radius *= 2.0;
  }
  throw ConvergenceError("choose_truncation_radius: tail bound does not fall below tolerance",
                         radius, 0.0);
}

// ---------------------------------------------------------------------------
// Frames for symmetry-reduced volume integrals

/// An orthonormal 2-plane together with the discrete symmetry of the integrand
/// in the plane angle: invariance under rotation by 2 pi / fold, and (if
/// `even`) under negation of the angle measured from axis1.
struct CylinderFrame {
  Point axis1, axis2;
  int fold = 1;
  bool even = false;
};

inline CylinderFrame make_cylinder_frame(int dim, const CoordPlane& plane, int fold, bool even) {
  if (fold < 1) throw InvalidConfigError("cylinder frame: fold must be >= 1");
  if (plane.first < 0 || plane.second < 0 || plane.first >= dim || plane.second >= dim ||
      plane.first == plane.second)
    throw InvalidConfigError("cylinder frame: invalid coordinate plane");
  CylinderFrame fr;
  fr.axis1 = Point(dim);
  fr.axis2 = Point(dim);
  fr.axis1[plane.first] = 1.0;
  fr.axis2[plane.second] = 1.0;
  fr.fold = fold;
  fr.even = even;
  return fr;
}

/// Two orthogonal 2-planes, for fields invariant under independent rotations.
struct TorusFrame {
  CylinderFrame plane1, plane2;
};

namespace detail {

/// First unit vector orthogonal to all of `span`, built from the standard
/// basis by Gram-Schmidt; deterministic.
inline Point complement_vector(const std::vector<Point>& span, int dim) {
  for (int i = 0; i < dim; ++i) {
    Point e(dim);
    e[i] = 1.0;
    for (const Point& s : span) e -= dot(e, s) * s;
    const double n = norm(e);
    if (n > 1e-8) return (1.0 / n) * e;
  }
  throw InvalidConfigError("complement_vector: span already covers the space");
}

inline void check_orthonormal_pair(const Point& a, const Point& b, const char* who) {
  if (std::abs(norm(a) - 1.0) > 1e-12 || std::abs(norm(b) - 1.0) > 1e-12 ||
      std::abs(dot(a, b)) > 1e-12)
    throw InvalidConfigError(std::string(who) + ": plane axes must be orthonormal");
}

}  // namespace detail

/// Integral over R^dim of a field that is radial about the origin.
inline IntegralResult integrate_radial(const ScalarField& f, int dim,
                                       const IntegrationOptions& opts = {}) {
  const double R = choose_truncation_radius(f, dim, opts);
  Point e1(dim);
  e1[0] = 1.0;
  const double area = sphere_area(dim - 1);
  IntegralResult res = integrate_interval(
      [&](double r) { return area * std::pow(r, dim - 1) * f.value(r * e1); }, 0.0, R, opts);
  res.truncation_radius = R;
  return res;
}

/// Integral over R^dim of a field invariant under rotations of the complement
/// of the frame plane, using coordinates (s, theta, t):
///   y = s cos(theta) a1 + s sin(theta) a2 + t w,   w normal to the plane,
///   dV = s t^{q-1} omega_{q-1} ds dtheta dt,       q = dim - 2.
/// The declared fold/evenness of the frame restricts the theta range.
inline IntegralResult integrate_cylinder(const ScalarField& f, int dim,
                                         const CylinderFrame& frame,
                                         const IntegrationOptions& opts = {}) {
  if (dim < 4) throw InvalidConfigError("integrate_cylinder: dimension must be >= 4");
  detail::check_orthonormal_pair(frame.axis1, frame.axis2, "integrate_cylinder");
  const double R = choose_truncation_radius(f, dim, opts);
  const Point w = detail::complement_vector({frame.axis1, frame.axis2}, dim);
  const int q = dim - 2;
  const double shell = sphere_area(q - 1);
  const double theta_max = frame.even ? kPi / frame.fold : 2.0 * kPi / frame.fold;
  const double fold_factor = frame.even ? 2.0 * frame.fold : 1.0 * frame.fold;

  FieldFn g = [&](const Point& x) {
    // x = (s, theta, t)
    const double s = x[0], th = x[1], t = x[2];
    const Point y = (s * std::cos(th)) * frame.axis1 + (s * std::sin(th)) * frame.axis2 + t * w;
    return fold_factor * shell * s * std::pow(t, q - 1) * f.value(y);
  };
  Point lo(3), hi(3);
  hi[0] = R;
  hi[1] = theta_max;
  hi[2] = R;
  IntegralResult res = integrate_box(g, lo, hi, opts);
  res.truncation_radius = R;
  return res;
}

/// Integral over R^dim of a field invariant under rotations of the complement
/// of the two frame planes, using (s1, theta1, s2, theta2, t).
inline IntegralResult integrate_torus(const ScalarField& f, int dim, const TorusFrame& frame,
                                      const IntegrationOptions& opts = {}) {
  if (dim < 5) throw InvalidConfigError("integrate_torus: dimension must be >= 5");
  detail::check_orthonormal_pair(frame.plane1.axis1, frame.plane1.axis2, "integrate_torus");
  detail::check_orthonormal_pair(frame.plane2.axis1, frame.plane2.axis2, "integrate_torus");
  for (const Point& a : {frame.plane1.axis1, frame.plane1.axis2})
    for (const Point& b : {frame.plane2.axis1, frame.plane2.axis2})
      if (std::abs(dot(a, b)) > 1e-12)
        throw InvalidConfigError("integrate_torus: planes must be orthogonal");
  const double R = choose_truncation_radius(f, dim, opts);
  const int q = dim - 4;  // complement dimension, >= 1 for dim >= 5
  const double shell = sphere_area(q - 1);
  const double th1_max =
      frame.plane1.even ? kPi / frame.plane1.fold : 2.0 * kPi / frame.plane1.fold;
  const double fold1 = frame.plane1.even ? 2.0 * frame.plane1.fold : 1.0 * frame.plane1.fold;
  const double th2_max =
      frame.plane2.even ? kPi / frame.plane2.fold : 2.0 * kPi / frame.plane2.fold;
  const double fold2 = frame.plane2.even ? 2.0 * frame.plane2.fold : 1.0 * frame.plane2.fold;
  const Point w = detail::complement_vector(
      {frame.plane1.axis1, frame.plane1.axis2, frame.plane2.axis1, frame.plane2.axis2}, dim);

  FieldFn g = [&](const Point& x) {
    const double s1 = x[0], th1 = x[1], s2 = x[2], th2 = x[3], t = x[4];
    const Point y = (s1 * std::cos(th1)) * frame.plane1.axis1 +
                    (s1 * std::sin(th1)) * frame.plane1.axis2 +
                    (s2 * std::cos(th2)) * frame.plane2.axis1 +
                    (s2 * std::sin(th2)) * frame.plane2.axis2 + t * w;
    return fold1 * fold2 * shell * s1 * s2 * std::pow(t, q - 1) * f.value(y);
  };
  Point lo(5), hi(5);
  hi[0] = R;
  hi[1] = th1_max;
  hi[2] = R;
  hi[3] = th2_max;
  hi[4] = R;
  IntegralResult res = integrate_box(g, lo, hi, opts);
  res.truncation_radius = R;
  return res;
}

/// Integral over R^dim with no symmetry assumption: cubature on [-R, R]^dim.
inline IntegralResult integrate_fullbox(const ScalarField& f, int dim,
                                        const IntegrationOptions& opts = {}) {
  const double R = choose_truncation_radius(f, dim, opts);
  Point lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = -R;
    hi[i] = R;
  }
  IntegralResult res = integrate_box(f.value, lo, hi, opts);
  res.truncation_radius = R;
  return res;
}

// ---------------------------------------------------------------------------
// Sphere and ball integrals

enum class SphereMode {
  kZonal,          // integrand depends only on the angle from frame axis1
  kPlaneCylinder,  // integrand depends on the two plane components and |rest|
  kFullAngles,     // product rule over all spherical angles (dim <= 7)
  kMonteCarlo,     // seeded antithetic sampling (any structure)
};

struct SphereFrame {
  Point axis1, axis2;       // axis2 only used by kPlaneCylinder
  std::uint64_t seed = 1;   // kMonteCarlo
  long samples = 200000;    // kMonteCarlo
};

inline SphereFrame make_axis_frame(int dim, int axis) {
  if (axis < 0 || axis >= dim) throw InvalidConfigError("make_axis_frame: axis out of range");
  SphereFrame fr;
  fr.axis1 = Point(dim);
  fr.axis1[axis] = 1.0;
  return fr;
}

/// Integral of f over the sphere of given center and radius in R^dim.
inline IntegralResult integrate_sphere(const FieldFn& f, int dim, const Point& center,
                                       double radius, SphereMode mode, const SphereFrame& frame,
                                       const IntegrationOptions& opts = {}) {
  if (!(radius > 0)) throw InvalidConfigError("integrate_sphere: radius must be positive");
  if (center.dim != dim) throw InvalidConfigError("integrate_sphere: center dimension mismatch");
  const double rpow = std::pow(radius, dim - 1);

  if (mode == SphereMode::kZonal) {
    if (std::abs(norm(frame.axis1) - 1.0) > 1e-12)
      throw InvalidConfigError("integrate_sphere: zonal axis must be a unit vector");
    const Point w = detail::complement_vector({frame.axis1}, dim);
    const double band = sphere_area(dim - 2);
    IntegralResult res = integrate_interval(
        [&](double phi) {
          const Point y =
              center + (radius * std::cos(phi)) * frame.axis1 + (radius * std::sin(phi)) * w;
          return band * rpow * std::pow(std::sin(phi), dim - 2) * f(y);
        },
        0.0, kPi, opts);
    return res;
  }

  if (mode == SphereMode::kPlaneCylinder) {
    detail::check_orthonormal_pair(frame.axis1, frame.axis2, "integrate_sphere");
    const Point w = detail::complement_vector({frame.axis1, frame.axis2}, dim);
    const double band = sphere_area(dim - 3);
    FieldFn g = [&](const Point& x) {
      const double p1 = x[0], p2 = x[1];
      const double s1 = std::sin(p1), c1 = std::cos(p1), s2 = std::sin(p2), c2 = std::cos(p2);
      const Point y = center + (radius * c1) * frame.axis1 + (radius * s1 * c2) * frame.axis2 +
                      (radius * s1 * s2) * w;
      return band * rpow * std::pow(s1, dim - 2) * std::pow(s2, dim - 3) * f(y);
    };
    Point lo(2), hi(2);
    hi[0] = kPi;
    hi[1] = kPi;
    return integrate_box(g, lo, hi, opts);
  }

  if (mode == SphereMode::kFullAngles) {
    if (dim > 7)
      throw InvalidConfigError("integrate_sphere: full-angle mode limited to dimension <= 7");
    const int na = dim - 1;  // number of angles
    FieldFn g = [&](const Point& phi) {
      Point y = center;
      double weight = rpow;
      double sin_prod = 1.0;
      for (int i = 0; i < na; ++i) {
        Point e(dim);
        e[i] = 1.0;
        y += (radius * sin_prod * std::cos(phi[i])) * e;
        if (i < na - 1) weight *= std::pow(std::sin(phi[i]), na - 1 - i);
        sin_prod *= std::sin(phi[i]);
      }
      Point e(dim);
      e[dim - 1] = 1.0;
      y += (radius * sin_prod) * e;
      return weight * f(y);
    };
    Point lo(na), hi(na);
    for (int i = 0; i < na - 1; ++i) hi[i] = kPi;
    hi[na - 1] = 2.0 * kPi;
    return integrate_box(g, lo, hi, opts);
  }

  // Monte Carlo: antithetic pairs of uniform sphere directions.
  SplitMix64 rng(frame.seed);
  const double area = sphere_area(dim - 1) * rpow;
  std::vector<double> contrib;
  contrib.reserve(frame.samples);
  double sum_sq = 0;
  for (long s = 0; s < frame.samples; ++s) {
    Point x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.normal();
    const Point u = normalized(x);
    const double v = 0.5 * (f(center + radius * u) + f(center - radius * u));
    contrib.push_back(v);
    sum_sq += v * v;
  }
  IntegralResult res;
  const double mean = pairwise_sum(contrib) / frame.samples;
  res.value = area * mean;
  const double var = std::max(0.0, sum_sq / frame.samples - mean * mean);
  res.error = area * std::sqrt(var / frame.samples);
  res.evaluations = 2 * frame.samples;
  return res;
}

/// Integral of f over the ball of given center and radius, as a radial stack
/// of sphere integrals (the sphere mode must match the integrand symmetry).
inline IntegralResult integrate_ball(const FieldFn& f, int dim, const Point& center,
                                     double radius, SphereMode mode, const SphereFrame& frame,
                                     const IntegrationOptions& opts = {}) {
  IntegrationOptions inner = opts;
  inner.abs_tol = std::max(opts.abs_tol / (4.0 * std::max(radius, 1.0)), 1e-14);
  inner.rel_tol = std::max(opts.rel_tol / 4.0, 1e-12);
  long evals = 0;
  IntegralResult res = integrate_interval(
      [&](double r) {
        if (r <= 0) return 0.0;
        IntegralResult s = integrate_sphere(f, dim, center, r, mode, frame, inner);
        evals += s.evaluations;
        return s.value;
      },
      0.0, radius, opts);
  res.evaluations += evals;
  return res;
}

}  // namespace multibump
