// Energy calculus for bubble towers.
//
// Provides, in closed form where one exists and by symmetry-reduced quadrature
// otherwise:
//   * the single-bubble energy of the functional
//       I(u) = 1/2 int |grad u|^2 - (1/2^*) int K(|y|) |u|^{2^*},
//   * pairwise interaction integrals int U_1^{2^*-1} U_2 with their
//     normalized far-field ratio,
//   * direct tower energies in radial, cylinder and torus reductions,
//   * the five-constant reduced-energy model
//       F(t, lambda) = base + n A + n (B1/lambda^2 + B2 (r0 - t)^2
//                                      - B3 n^{N-2}/lambda^{N-2}),
//     its closed-form stationary scale lambda*, and a least-squares fit of
//     the constants from sampled energies,
//   * the ring balance equation fixing the rescaled concentration parameter
//     mu_bar from the potential curvature and the neighbor attraction,
//   * a damped-Newton search for interior stationary points of smooth
//     two-variable energies with Hessian classification.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "multibump/bubble.hpp"
#include "multibump/core.hpp"
#include "multibump/potential.hpp"
#include "multibump/quadrature.hpp"
#include "multibump/symmetry.hpp"

namespace multibump {

// ---------------------------------------------------------------------------
// Closed-form single-bubble energy

/// I(U_{x,mu}) for K == 1: equals (1/N) int U^{2^*} for every center and
/// scale, by integration by parts and the exact bubble equation.
inline double single_bubble_energy(int dim) { return closed_moments(dim).volume_mass / dim; }

// ---------------------------------------------------------------------------
// Pairwise interaction

struct InteractionResult {
  double value = 0;        // int U_1^{2^*-1} U_2
  double error = 0;        // quadrature error estimate
  double ratio = 0;        // value * (mu d)^{N-2} / (c_N int U^{2^*-1});
  bool ratio_valid = false;  // the ratio is only meaningful for equal scales
};

/// int U_1^{2^*-1} U_2 over all of R^N, reduced to a 3-d cylinder integral
/// about the axis through the two centers.  For equal scales the value
/// depends on (mu, d) only through mu * d, and
///   value * (mu d)^{N-2} -> c_N * int U^{2^*-1}   as  mu d -> infinity.
inline InteractionResult interaction(const Bubble& b1, const Bubble& b2,
                                     const IntegrationOptions& opts = {}) {
  if (b1.dim != b2.dim) throw InvalidConfigError("interaction: dimension mismatch");
  const int N = b1.dim;
  const double d = dist(b1.center, b2.center);
  if (!(d > 1e-12))
    throw InvalidConfigError("interaction: bubble centers coincide (degenerate configuration)");

  // Translate the first center to the origin; both bubbles then sit on one
  // axis and the integrand is symmetric about it.
  const Point dir = normalized(b2.center - b1.center);
  const Bubble u1 = make_bubble(Point(N), b1.scale);
  const Bubble u2 = make_bubble(d * dir, b2.scale);
  const double p = critical_exponent(N) - 1.0;

  ScalarField f;
  f.value = [u1, u2, p](const Point& y) {
    return std::pow(bubble_value(u1, y), p) * bubble_value(u2, y);
  };
  f.decay_exponent = 2.0 * N;  // (N+2) from the power, (N-2) from the factor

  CylinderFrame fr;
  fr.axis1 = dir;
  fr.axis2 = detail::complement_vector({dir}, N);
  fr.fold = 1;
  fr.even = true;  // both centers lie on axis1

  const IntegralResult r = integrate_cylinder(f, N, fr, opts);
  InteractionResult out;
  out.value = r.value;
  out.error = r.error;
  if (std::abs(b1.scale - b2.scale) <= 1e-12 * b1.scale) {
    const MomentTable mt = closed_moments(N);
    out.ratio = r.value * std::pow(b1.scale * d, N - 2.0) / (mt.c_dim * mt.mass_flux);
    out.ratio_valid = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Direct tower energies

struct EnergyResult {
  double value = 0;
  double error = 0;
  long evaluations = 0;
};

namespace detail {

/// Pointwise energy density 1/2 |grad u|^2 - (1/2^*) K |u|^{2^*}.
inline ScalarField energy_density(const Tower& t, const PotentialK& K) {
  const double p = critical_exponent(K.dim);
  ScalarField f;
  f.value = [t, K, p](const Point& y) {
    const Point g = tower_gradient(t, y);
    const double u = tower_value(t, y);
    return 0.5 * norm2(g) - (1.0 / p) * K_value(K, y) * std::pow(std::abs(u), p);
  };
  // |grad u|^2 ~ |y|^{-2(N-1)} dominates the |u|^{2^*} ~ |y|^{-2N} tail.
  f.decay_exponent = 2.0 * K.dim - 2.0;
  return f;
}

}  // namespace detail

/// Energy of a radial configuration (every bubble centered at the origin).
inline EnergyResult tower_energy_radial(const Tower& t, const PotentialK& K,
                                        const IntegrationOptions& opts = {}) {
  for (const Bubble& b : t.bubbles)
    if (norm(b.center) > 1e-14)
      throw InvalidConfigError("tower_energy_radial: all centers must sit at the origin");
  const IntegralResult r = integrate_radial(detail::energy_density(t, K), K.dim, opts);
  return {r.value, r.error, r.evaluations};
}

/// Energy of a tower whose field is invariant under the frame's fold in one
/// coordinate plane and all rotations of the complement (single-ring towers).
inline EnergyResult tower_energy(const Tower& t, const PotentialK& K, const CylinderFrame& frame,
                                 const IntegrationOptions& opts = {}) {
  const IntegralResult r = integrate_cylinder(detail::energy_density(t, K), K.dim, frame, opts);
  return {r.value, r.error, r.evaluations};
}

/// Energy of a tower invariant under independent folds in two orthogonal
/// planes (glued double-ring towers).
inline EnergyResult tower_energy(const Tower& t, const PotentialK& K, const TorusFrame& frame,
                                 const IntegrationOptions& opts = {}) {
  const IntegralResult r = integrate_torus(detail::energy_density(t, K), K.dim, frame, opts);
  return {r.value, r.error, r.evaluations};
}

/// Tower holding both rings of a glued two-ring configuration.
inline Tower make_glued_tower(const PolygonConfig& outer, const PolygonConfig& inner) {
  if (outer.dim != inner.dim) throw InvalidConfigError("make_glued_tower: dimension mismatch");
  validate(outer);
  validate(inner);
  if (outer.plane.first == inner.plane.first || outer.plane.first == inner.plane.second ||
      outer.plane.second == inner.plane.first || outer.plane.second == inner.plane.second)
    throw InvalidConfigError("make_glued_tower: ring planes must be disjoint");
  Tower t = make_tower(outer);
  for (const Point& p : build_polygon(inner)) t.bubbles.push_back(make_bubble(p, inner.scale));
  return t;
}

/// Torus frame matching make_glued_tower: each ring contributes its own fold,
/// and both rings start on the first axis of their plane, so the field is
/// even in both angles.
inline TorusFrame make_glued_frame(const PolygonConfig& outer, const PolygonConfig& inner) {
  TorusFrame fr;
  fr.plane1 = make_cylinder_frame(outer.dim, outer.plane, outer.count, /*even=*/true);
  fr.plane2 = make_cylinder_frame(inner.dim, inner.plane, inner.count, /*even=*/true);
  return fr;
}

// ---------------------------------------------------------------------------
// Reduced-energy expansion model

struct ExpansionConstants {
  int dim = 7;
  double r0 = 1.0;  // preferred ring radius of the quadratic term
  double A = 0;     // per-bubble energy
  double B1 = 0;    // scale penalty ~ 1/lambda^2
  double B2 = 0;    // radius penalty ~ (r0 - t)^2
  double B3 = 0;    // neighbor attraction ~ n^{N-2}/lambda^{N-2}
  double sigma = 0.5;  // declared remainder exponent (reporting only)
  // The source display writes the radius penalty as B2/lambda^2 (lambda r0 - t)^2,
  // which cannot vanish for t near r0; the adopted reading is B2 (r0 - t)^2.
  // Set this flag to evaluate the verbatim form instead.
  bool verbatim_quadratic = false;
};

inline void validate(const ExpansionConstants& c) {
  if (c.dim < 5 || c.dim > kMaxDim)
    throw InvalidConfigError("expansion constants: dimension out of range");
  if (!(c.r0 > 0)) throw InvalidConfigError("expansion constants: r0 must be positive");
}

/// F(t, lambda) for a ring of `count` bubbles on top of a fixed background
/// energy `base`.
inline double expansion_energy(const ExpansionConstants& c, int count, double t, double lambda,
                               double base = 0.0) {
  validate(c);
  if (count < 1) throw InvalidConfigError("expansion_energy: count must be positive");
  if (!(lambda > 0)) throw InvalidConfigError("expansion_energy: lambda must be positive");
  const double n = count;
  const double quad = c.verbatim_quadratic
                          ? (lambda * c.r0 - t) * (lambda * c.r0 - t) / (lambda * lambda)
                          : (c.r0 - t) * (c.r0 - t);
  const double bracket = c.B1 / (lambda * lambda) + c.B2 * quad -
                         c.B3 * std::pow(n, c.dim - 2.0) / std::pow(lambda, c.dim - 2.0);
  return base + n * c.A + n * bracket;
}

/// The unique stationary scale of lambda -> B1/lambda^2 - B3 n^{N-2}/lambda^{N-2}:
///   lambda* = ((N-2) B3 / (2 B1))^{1/(N-4)} * n^{(N-2)/(N-4)}.
inline double lambda_star(const ExpansionConstants& c, int count) {
  validate(c);
  if (!(c.B1 > 0) || !(c.B3 > 0))
    throw InvalidConfigError("lambda_star: requires positive B1 and B3");
  if (c.dim < 5) throw InvalidConfigError("lambda_star: requires dimension >= 5");
  const double N = c.dim;
  return std::pow((N - 2.0) * c.B3 / (2.0 * c.B1), 1.0 / (N - 4.0)) *
         std::pow(static_cast<double>(count), (N - 2.0) / (N - 4.0));
}

// ---------------------------------------------------------------------------
// Fitting the expansion constants

struct ExpansionSample {
  double t = 0;
  double lambda = 0;
  int count = 0;
  double value = 0;  // measured energy of the glued tower
};

struct ExpansionFit {
  ExpansionConstants constants;
  double base = 0;          // background energy subtracted before fitting
  double residual_rms = 0;  // root-mean-square misfit over the samples
  double residual_max = 0;
  bool constants_positive = false;  // false flags a failed fit of the model signs
};

namespace detail {

/// Gaussian elimination with partial pivoting for a small dense system.
/// `a` is row-major n x n, `b` length n; both are overwritten.  Returns the
/// solution in `b`.  Throws on a vanishing pivot.
inline void solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
  double scale = 0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (!(scale > 0)) throw InvalidConfigError("solve_dense: zero matrix");
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-13 * scale)
      throw InvalidConfigError("solve_dense: singular system (rank-deficient design)");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a[piv * n + j], a[col * n + j]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double m = a[r * n + col] / a[col * n + col];
      for (int j = col; j < n; ++j) a[r * n + j] -= m * a[col * n + j];
      b[r] -= m * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < n; ++j) s -= a[r * n + j] * b[j];
    b[r] = s / a[r * n + r];
  }
}

}  // namespace detail

/// Least-squares fit of (A, B1, B2, B3) to energies of glued towers, with the
/// background energy `base` held fixed.  Model per sample:
///   value - base = A n + B1 n/lambda^2 + B2 n (r0-t)^2 - B3 n^{N-1}/lambda^{N-2}.
/// Columns are rescaled to unit norm before forming the normal equations.
inline ExpansionFit fit_expansion_constants(int dim, double r0, double base,
                                            const std::vector<ExpansionSample>& samples) {
  if (dim < 5 || dim > kMaxDim) throw InvalidConfigError("fit: dimension out of range");
  const std::size_t m = samples.size();
  if (m < 4) throw InvalidConfigError("fit: need at least four samples (rank-deficient design)");

  constexpr int kCols = 4;
  std::vector<double> g(m * kCols), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    const ExpansionSample& s = samples[i];
    if (s.count < 1 || !(s.lambda > 0))
      throw InvalidConfigError("fit: samples need positive count and lambda");
    const double n = s.count;
    g[i * kCols + 0] = n;
    g[i * kCols + 1] = n / (s.lambda * s.lambda);
    g[i * kCols + 2] = n * (r0 - s.t) * (r0 - s.t);
    g[i * kCols + 3] = -std::pow(n, dim - 1.0) / std::pow(s.lambda, dim - 2.0);
    y[i] = s.value - base;
  }

  double colscale[kCols];
  for (int j = 0; j < kCols; ++j) {
    double s2 = 0;
    for (std::size_t i = 0; i < m; ++i) s2 += g[i * kCols + j] * g[i * kCols + j];
    colscale[j] = std::sqrt(s2);
    if (!(colscale[j] > 0))
      throw InvalidConfigError("fit: singular system (rank-deficient design)");
    for (std::size_t i = 0; i < m; ++i) g[i * kCols + j] /= colscale[j];
  }

  std::vector<double> normal(kCols * kCols, 0.0), rhs(kCols, 0.0);
  for (int a = 0; a < kCols; ++a) {
    for (int b = 0; b < kCols; ++b) {
      double s = 0;
      for (std::size_t i = 0; i < m; ++i) s += g[i * kCols + a] * g[i * kCols + b];
      normal[a * kCols + b] = s;
    }
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += g[i * kCols + a] * y[i];
    rhs[a] = s;
  }
  detail::solve_dense(normal, rhs, kCols);

  ExpansionFit fit;
  fit.constants.dim = dim;
  fit.constants.r0 = r0;
  fit.constants.A = rhs[0] / colscale[0];
  fit.constants.B1 = rhs[1] / colscale[1];
  fit.constants.B2 = rhs[2] / colscale[2];
  fit.constants.B3 = rhs[3] / colscale[3];
  fit.base = base;
  fit.constants_positive =
      fit.constants.B1 > 0 && fit.constants.B2 > 0 && fit.constants.B3 > 0;

  double ss = 0, mx = 0;
  for (const ExpansionSample& s : samples) {
    const double model = expansion_energy(fit.constants, s.count, s.t, s.lambda, base);
    const double r = s.value - model;
    ss += r * r;
    mx = std::max(mx, std::abs(r));
  }
  fit.residual_rms = std::sqrt(ss / m);
  fit.residual_max = mx;
  return fit;
}

// ---------------------------------------------------------------------------
// Ring balance equation
//
// For a ring of `count` bubbles at radius r0 under a radial potential with
// negative Laplacian at r0, the rescaled concentration parameter mu_bar
// balances the outward curvature force against the neighbor attraction:
//   |lap K(r0)| / (2^* N mu_bar^3 k^2) * M2
//     = (N-2)/(2 mu_bar^{N-1}) * c_N * A * sum_j |x_j - x_1|^{-(N-2)},
// with M2 = int U^{2^*}|y|^2, A = int U^{2^*-1}, |x_j - x_1| = 2 r_bar
// sin((j-1) pi/k) and r_bar = k r0.

struct BalanceSolution {
  int count = 0;       // number of ring bubbles k
  double mu_bar = 0;   // rescaled concentration parameter
  double r_bar = 0;    // rescaled ring radius, count * r0
  double mu = 0;       // concentration in the original frame, count * mu_bar
  double residual = 0; // relative residual of the balance relation at mu_bar
  int iterations = 0;  // Newton steps taken from the nearest-neighbor guess
};

namespace detail {

/// sum over j of |x_j - x_1|^{-(N-2)} on the ring; `nearest_only` keeps the
/// two adjacent bubbles.
inline double ring_neighbor_sum(int dim, int count, double r_bar, bool nearest_only) {
  std::vector<double> terms;
  for (int j = 2; j <= count; ++j) {
    if (nearest_only && j != 2 && j != count) continue;
    const double gap = 2.0 * r_bar * std::sin((j - 1) * kPi / count);
    terms.push_back(std::pow(gap, -(dim - 2.0)));
  }
  return pairwise_sum(terms);
}

struct BalanceSides {
  double lhs = 0;  // curvature force
  double rhs = 0;  // neighbor attraction
};

inline BalanceSides balance_sides(int dim, int count, double lap_abs, double mu_bar,
                                  double neighbor_sum, const MomentTable& mt) {
  const double p = critical_exponent(dim);
  BalanceSides s;
  s.lhs = lap_abs * mt.second_moment /
          (p * dim * std::pow(mu_bar, 3) * count * static_cast<double>(count));
  s.rhs = (dim - 2.0) / (2.0 * std::pow(mu_bar, dim - 1.0)) * mt.c_dim * mt.mass_flux *
          neighbor_sum;
  return s;
}

inline double balance_closed_form(int dim, int count, double lap_abs, double neighbor_sum,
                                  const MomentTable& mt) {
  const double p = critical_exponent(dim);
  const double c = p * dim * (dim - 2.0) * mt.c_dim * mt.mass_flux * neighbor_sum * count *
                   static_cast<double>(count) / (2.0 * lap_abs * mt.second_moment);
  return std::pow(c, 1.0 / (dim - 4.0));
}

}  // namespace detail

/// Closed-form solution of the balance equation truncated to the two nearest
/// neighbors; the solver's initial guess and crosscheck.
inline double balance_nearest_guess(const PotentialK& K, int count) {
  const int N = K.dim;
  if (N < 5 || N > kMaxDim) throw InvalidConfigError("balance: dimension out of range");
  if (count < 2) throw InvalidConfigError("balance: need at least two ring bubbles");
  if (!(K.r0 > 0)) throw InvalidConfigError("balance: potential has no ring radius");
  const double lap = K_laplacian(K, K.r0);
  if (!(lap < 0))
    throw InvalidConfigError(
        "balance: potential Laplacian at the ring radius must be negative");
  const MomentTable mt = closed_moments(N);
  const double r_bar = count * K.r0;
  return detail::balance_closed_form(N, count, -lap,
                                     detail::ring_neighbor_sum(N, count, r_bar, true), mt);
}

/// Solve the full balance equation (all ring neighbors) by Newton iteration
/// from the nearest-neighbor guess.
inline BalanceSolution solve_balance(const PotentialK& K, int count, double tol = 1e-12) {
  const int N = K.dim;
  const double guess = balance_nearest_guess(K, count);  // also validates
  const double lap_abs = -K_laplacian(K, K.r0);
  const MomentTable mt = closed_moments(N);
  const double r_bar = count * K.r0;
  const double nsum = detail::ring_neighbor_sum(N, count, r_bar, false);
  const double p = critical_exponent(N);

  // f(m) = lhs(m) - rhs(m) with lhs ~ m^{-3} and rhs ~ m^{-(N-1)}; the root
  // is unique on (0, inf).
  auto f = [&](double m) {
    const detail::BalanceSides s = detail::balance_sides(N, count, lap_abs, m, nsum, mt);
    return s.lhs - s.rhs;
  };
  auto fprime = [&](double m) {
    const double lhs = -3.0 * lap_abs * mt.second_moment /
                       (p * N * std::pow(m, 4) * count * static_cast<double>(count));
    const double rhs = -(N - 1.0) * (N - 2.0) / (2.0 * std::pow(m, N)) * mt.c_dim *
                       mt.mass_flux * nsum;
    return lhs - rhs;
  };

  BalanceSolution sol;
  sol.count = count;
  sol.r_bar = r_bar;
  double m = guess;
  int it = 0;
  for (; it < 60; ++it) {
    const double step = f(m) / fprime(m);
    m -= step;
    if (!(m > 0)) throw ConvergenceError("solve_balance: iterate left (0, inf)", m, 0);
    if (std::abs(step) <= tol * m) break;
  }
  sol.mu_bar = m;
  sol.mu = count * m;
  sol.iterations = it + 1;
  const detail::BalanceSides s = detail::balance_sides(N, count, lap_abs, m, nsum, mt);
  sol.residual = std::abs(s.lhs - s.rhs) / std::max(std::abs(s.lhs), std::abs(s.rhs));
  if (sol.residual > 1e-10)
    throw ConvergenceError("solve_balance: residual did not contract", m, sol.residual);
  return sol;
}

// ---------------------------------------------------------------------------
// Critical-point search in (t, lambda)

struct SearchWindow {
  double t_lo = 0, t_hi = 0;
  double lambda_lo = 0, lambda_hi = 0;
};

enum class CriticalKind { kMinimum, kMaximum, kSaddle, kDegenerate };

struct CriticalPoint {
  double t = 0;
  double lambda = 0;
  CriticalKind kind = CriticalKind::kDegenerate;
  double grad_norm = 0;
  double h_tt = 0, h_tl = 0, h_ll = 0;  // numeric Hessian at the point
  int iterations = 0;
};

using Energy2D = std::function<double(double, double)>;

/// Interior stationary point of F on the window by damped Newton iteration
/// from a 3x3 grid of starts, classified by the numeric Hessian signature.
/// Starts that converge onto the window boundary are rejected; if no start
/// yields an interior stationary point the search reports a boundary hit.
inline CriticalPoint find_critical_point(const Energy2D& F, const SearchWindow& w,
                                         double grad_tol = 0) {
  if (!(w.t_hi > w.t_lo) || !(w.lambda_hi > w.lambda_lo))
    throw InvalidConfigError("find_critical_point: empty window");
  const double span_t = w.t_hi - w.t_lo;
  const double span_l = w.lambda_hi - w.lambda_lo;
  const double hg_t = 1e-4 * span_t, hg_l = 1e-4 * span_l;   // gradient steps
  const double hh_t = 5e-4 * span_t, hh_l = 5e-4 * span_l;   // Hessian steps

  // Fourth-order central differences keep the discretization bias of the
  // gradient below the rounding floor, so stationary points are located to
  // ~1e-8 of the window span.
  auto diff4 = [](double fp1, double fm1, double fp2, double fm2, double h) {
    return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
  };
  auto gradient = [&](double t, double l, double& gt, double& gl) {
    gt = diff4(F(t + hg_t, l), F(t - hg_t, l), F(t + 2 * hg_t, l), F(t - 2 * hg_t, l), hg_t);
    gl = diff4(F(t, l + hg_l), F(t, l - hg_l), F(t, l + 2 * hg_l), F(t, l - 2 * hg_l), hg_l);
  };
  auto hessian = [&](double t, double l, double& htt, double& htl, double& hll) {
    const double f0 = F(t, l);
    htt = (F(t + hh_t, l) - 2.0 * f0 + F(t - hh_t, l)) / (hh_t * hh_t);
    hll = (F(t, l + hh_l) - 2.0 * f0 + F(t, l - hh_l)) / (hh_l * hh_l);
    htl = (F(t + hh_t, l + hh_l) - F(t + hh_t, l - hh_l) - F(t - hh_t, l + hh_l) +
           F(t - hh_t, l - hh_l)) /
          (4.0 * hh_t * hh_l);
  };

  // Reference gradient scale over the start grid, for the default tolerance.
  const double fracs[3] = {0.25, 0.5, 0.75};
  double gscale = 0;
  for (double ft : fracs)
    for (double fl : fracs) {
      double gt, gl;
      gradient(w.t_lo + ft * span_t, w.lambda_lo + fl * span_l, gt, gl);
      gscale = std::max(gscale, std::hypot(gt * span_t, gl * span_l));
    }
  const double gtol =
      grad_tol > 0 ? grad_tol : 1e-7 * std::max(gscale / std::min(span_t, span_l), 1e-300);

  bool saw_boundary = false;
  for (double ft : fracs) {
    for (double fl : fracs) {
      double t = w.t_lo + ft * span_t;
      double l = w.lambda_lo + fl * span_l;
      // Newton stalls at the differencing noise floor rather than meeting a
      // pure step criterion, so keep the iterate with the smallest gradient.
      double best_t = t, best_l = l, best_g = std::numeric_limits<double>::infinity();
      int iters = 0;
      for (int it = 0; it < 60; ++it) {
        iters = it + 1;
        double gt, gl, htt, htl, hll;
        gradient(t, l, gt, gl);
        const double gnorm = std::hypot(gt, gl);
        if (gnorm < best_g) {
          best_g = gnorm;
          best_t = t;
          best_l = l;
        }
        hessian(t, l, htt, htl, hll);
        const double det = htt * hll - htl * htl;
        const double hmag = std::abs(htt) + std::abs(hll) + std::abs(htl);
        if (!(std::abs(det) > 1e-14 * hmag * hmag)) break;  // singular Hessian
        double st = -(hll * gt - htl * gl) / det;
        double sl = -(htt * gl - htl * gt) / det;
        // Trust-region style cap: never move more than a third of the window.
        const double frac =
            std::max(std::abs(st) / (0.33 * span_t), std::abs(sl) / (0.33 * span_l));
        if (frac > 1.0) {
          st /= frac;
          sl /= frac;
        }
        t += st;
        l += sl;
        t = std::min(std::max(t, w.t_lo), w.t_hi);
        l = std::min(std::max(l, w.lambda_lo), w.lambda_hi);
        if (std::abs(st) < 1e-14 * span_t && std::abs(sl) < 1e-14 * span_l) break;
      }
      const double edge_t = 1e-9 * span_t, edge_l = 1e-9 * span_l;
      const bool interior = best_t > w.t_lo + edge_t && best_t < w.t_hi - edge_t &&
                            best_l > w.lambda_lo + edge_l && best_l < w.lambda_hi - edge_l;
      if (!interior) {
        saw_boundary = true;
        continue;
      }
      if (best_g > gtol) continue;  // never reached a stationary point

      CriticalPoint cp;
      cp.t = best_t;
      cp.lambda = best_l;
      cp.grad_norm = best_g;
      cp.iterations = iters;
      hessian(best_t, best_l, cp.h_tt, cp.h_tl, cp.h_ll);
      const double det = cp.h_tt * cp.h_ll - cp.h_tl * cp.h_tl;
      const double hmag = std::abs(cp.h_tt) + std::abs(cp.h_ll) + std::abs(cp.h_tl);
      const double tol_det = 1e-10 * hmag * hmag;
      if (det > tol_det)
        cp.kind = cp.h_tt > 0 ? CriticalKind::kMinimum : CriticalKind::kMaximum;
      else if (det < -tol_det)
        cp.kind = CriticalKind::kSaddle;
      else
        cp.kind = CriticalKind::kDegenerate;
      return cp;
    }
  }
  if (saw_boundary)
    throw BoundaryHitError("find_critical_point: stationary point sits on the window boundary");
  throw BoundaryHitError("find_critical_point: no interior stationary point in the window");
}

}  // namespace multibump
