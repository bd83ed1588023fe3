#pragma once

// Linearized operators, ansatz residuals, and kernel projections for glued
// two-ring bubble configurations.
//
// A glued configuration couples an outer ring of k bubbles (concentration mu,
// one coordinate plane) with an inner ring of n bubbles (concentration
// lambda, an orthogonal coordinate plane).  Around that ansatz this module
// provides the pieces of a finite-dimensional reduction:
//
//   * apply_linearized        - the operator -Delta - (2*-1) K |B|^{2*-2}
//                               around an arbitrary background tower B, with
//                               wrappers for "outer tower only" and "full
//                               glued ansatz" backgrounds;
//   * ansatz_residual         - the defect left by gluing the inner ring onto
//                               the outer tower, its exact three-part split
//                               (outer coupling / inner cross terms /
//                               potential deviation), a weighted-sup-norm
//                               estimate, and a decay-rate sweep over the
//                               inner concentration;
//   * nonlinear_remainder     - the superlinear Taylor remainder of the
//                               critical nonlinearity, with scaling probes
//                               that extract its growth exponent;
//   * kernel_projection       - coefficients of a field on the scale and
//                               translation kernel directions of a single
//                               bubble, via a bubble-weighted inner product;
//   * gram_matrix             - the Gram system of the inner-ring kernel
//                               directions under the same weight.
//
// Weighted norms follow the conventions of norms.hpp: the double-star
// envelope anchored at the inner centers measures residual-type quantities.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "multibump/bubble.hpp"
#include "multibump/core.hpp"
#include "multibump/norms.hpp"
#include "multibump/potential.hpp"
#include "multibump/quadrature.hpp"
#include "multibump/symmetry.hpp"

namespace multibump {

// ---------------------------------------------------------------------------
// Glued configuration

// The outer tower is a finite-bubble stand-in for the full background
// solution (ring radius and concentration from the balance solver); the
// background's own fixed-point correction is not desk-computable and is
// deliberately omitted.
struct GluedConfig {
  PolygonConfig outer;    // background ring; count 0 means no background
  PolygonConfig inner;    // concentrating ring
  PotentialK potential;
  double window_lo = 0.5;   // admissible inner-concentration window is
  double window_hi = 12.0;  // [lo, hi] * n^{(N-2)/(N-4)}
};

inline int glued_dim(const GluedConfig& g) { return g.inner.dim; }

inline void validate(const GluedConfig& g) {
  validate(g.inner);
  // Ring counts are even by symmetry; a single inner bubble is kept as the
  // degenerate sanity configuration (its residual vanishes identically).
  if (g.inner.count != 1 && g.inner.count % 2 != 0)
    throw InvalidConfigError("GluedConfig: inner count must be even or 1");
  if (g.outer.count != 0) {
    validate(g.outer);
    if (g.outer.count % 2 != 0)
      throw InvalidConfigError("GluedConfig: outer count must be even (or 0 for none)");
    if (g.outer.dim != g.inner.dim)
      throw InvalidConfigError("GluedConfig: outer and inner dimensions differ");
    const int a = g.outer.plane.first, b = g.outer.plane.second;
    const int c = g.inner.plane.first, d = g.inner.plane.second;
    if (a == c || a == d || b == c || b == d)
      throw InvalidConfigError("GluedConfig: ring planes must be disjoint");
  }
  if (g.potential.dim != g.inner.dim)
    throw InvalidConfigError("GluedConfig: potential dimension mismatch");
  if (!(g.window_lo > 0) || !(g.window_hi > g.window_lo))
    throw InvalidConfigError("GluedConfig: window coefficients must satisfy 0 < lo < hi");
}

/// Admissible range of the inner concentration: both ends grow like
/// n^{(N-2)/(N-4)} with the inner count n.
inline std::pair<double, double> concentration_window(const GluedConfig& g) {
  validate(g);
  const int N = glued_dim(g);
  if (N < 7)
    throw InvalidConfigError("concentration_window: defined for dimension >= 7");
  const double growth =
      std::pow(static_cast<double>(g.inner.count), (N - 2.0) / (N - 4.0));
  return {g.window_lo * growth, g.window_hi * growth};
}

inline void require_in_window(const GluedConfig& g) {
  const auto [lo, hi] = concentration_window(g);
  if (g.inner.scale < lo || g.inner.scale > hi)
    throw InvalidConfigError("GluedConfig: inner concentration " +
                             std::to_string(g.inner.scale) +
                             " outside the admissible window [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
}

/// The background tower alone (empty when the outer count is 0).
inline Tower outer_tower(const GluedConfig& g) {
  validate(g);
  Tower t;
  if (g.outer.count > 0) t = make_tower(g.outer);
  return t;
}

/// Outer tower plus the inner ring: the full glued ansatz.
inline Tower glued_ansatz(const GluedConfig& g) {
  Tower t = outer_tower(g);
  for (const Point& p : build_polygon(g.inner))
    t.bubbles.push_back(make_bubble(p, g.inner.scale));
  return t;
}

/// Kernel direction of inner bubble j: index 1 differentiates along the ring
/// radius (the center's radial motion), index 2 along the concentration.
inline ScalarField inner_kernel_field(const GluedConfig& g, int j, int index) {
  validate(g);
  const std::vector<Point> centers = build_polygon(g.inner);
  if (j < 0 || j >= static_cast<int>(centers.size()))
    throw InvalidConfigError("inner_kernel_field: bubble index out of range");
  const Bubble b = make_bubble(centers[j], g.inner.scale);
  if (index == 2) return dscale_field(b);
  if (index != 1)
    throw InvalidConfigError("inner_kernel_field: direction index must be 1 or 2");
  const double theta = 2.0 * kPi * j / g.inner.count;
  const double c = std::cos(theta), s = std::sin(theta);
  const ScalarField f1 = dcenter_field(b, g.inner.plane.first);
  const ScalarField f2 = dcenter_field(b, g.inner.plane.second);
  ScalarField f;
  f.value = [f1, f2, c, s](const Point& y) { return c * f1.value(y) + s * f2.value(y); };
  f.gradient = [f1, f2, c, s](const Point& y) {
    Point out = f1.gradient(y);
    out *= c;
    out += s * f2.gradient(y);
    return out;
  };
  f.laplacian = [f1, f2, c, s](const Point& y) {
    return c * f1.laplacian(y) + s * f2.laplacian(y);
  };
  f.decay_exponent = f1.decay_exponent;
  return f;
}

// ---------------------------------------------------------------------------
// Linearized operators

/// -Delta xi - (2*-1) K(y) |B(y)|^{2*-2} xi(y) with B the background tower.
/// Uses the field's declared Laplacian, falling back to finite differences.
inline double apply_linearized(const ScalarField& xi, const Tower& background,
                               const PotentialK& K, const Point& y) {
  if (!xi.value) throw InvalidConfigError("apply_linearized: field has no value function");
  const double q = critical_exponent(y.dim) - 1.0;  // 2*-1
  const double B = std::abs(tower_value(background, y));
  const double coeff = q * K_value(K, y) * std::pow(B, q - 1.0);
  return -field_laplacian(xi, y) - coeff * xi.value(y);
}

/// Linearization around the outer tower alone.
inline double apply_outer_linearized(const ScalarField& xi, const GluedConfig& g,
                                     const Point& y) {
  return apply_linearized(xi, outer_tower(g), g.potential, y);
}

/// Linearization around the full glued ansatz (outer tower + inner ring).
inline double apply_glued_linearized(const ScalarField& xi, const GluedConfig& g,
                                     const Point& y) {
  return apply_linearized(xi, glued_ansatz(g), g.potential, y);
}

// ---------------------------------------------------------------------------
// Ansatz residual and its exact split
//
// With u = outer tower, S = sum of inner bubbles, q = 2*-1:
//   residual = K (u+S)^q - K u^q - sum_j U_j^q
// splits exactly into
//   outer_coupling    = K [ (u+S)^q - u^q - S^q ]
//   inner_cross       = S^q - sum_j U_j^q
//   potential_defect  = (K - 1) S^q .

struct ResidualSplit {
  double outer_coupling = 0;
  double inner_cross = 0;
  double potential_defect = 0;
  double total() const { return outer_coupling + inner_cross + potential_defect; }
};

namespace detail {

struct ResidualData {
  std::vector<Bubble> outer, inner;
  PotentialK K;
  double q = 0;

  double outer_value(const Point& y) const {
    double s = 0;
    for (const auto& b : outer) s += bubble_value(b, y);
    return s;
  }
  double inner_sum(const Point& y) const {
    double s = 0;
    for (const auto& b : inner) s += bubble_value(b, y);
    return s;
  }
  double inner_power_sum(const Point& y) const {
    double s = 0;
    for (const auto& b : inner) s += std::pow(bubble_value(b, y), q);
    return s;
  }
};

inline ResidualData make_residual_data(const GluedConfig& g) {
  validate(g);
  ResidualData d;
  if (g.outer.count > 0)
    for (const Point& p : build_polygon(g.outer)) d.outer.push_back(make_bubble(p, g.outer.scale));
  for (const Point& p : build_polygon(g.inner))
    d.inner.push_back(make_bubble(p, g.inner.scale));
  d.K = g.potential;
  d.q = critical_exponent(glued_dim(g)) - 1.0;
  return d;
}

}  // namespace detail

/// Pointwise gluing defect, computed from its definition in one expression.
inline double ansatz_residual(const GluedConfig& g, const Point& y) {
  const detail::ResidualData d = detail::make_residual_data(g);
  const double Kv = K_value(d.K, y);
  const double u = d.outer_value(y), S = d.inner_sum(y);
  return Kv * std::pow(u + S, d.q) - Kv * std::pow(u, d.q) - d.inner_power_sum(y);
}

/// The same defect split into its three mechanisms; parts sum to the total
/// exactly (algebraically; to rounding in floating point).
inline ResidualSplit ansatz_residual_parts(const GluedConfig& g, const Point& y) {
  const detail::ResidualData d = detail::make_residual_data(g);
  const double Kv = K_value(d.K, y);
  const double u = d.outer_value(y), S = d.inner_sum(y);
  const double Sq = std::pow(S, d.q);
  ResidualSplit out;
  out.outer_coupling = Kv * (std::pow(u + S, d.q) - std::pow(u, d.q) - Sq);
  out.inner_cross = Sq - d.inner_power_sum(y);
  out.potential_defect = (Kv - 1.0) * Sq;
  return out;
}

/// Residual as a reusable field (value only; residuals are not differentiated).
inline ScalarField ansatz_residual_field(const GluedConfig& g) {
  const detail::ResidualData d = detail::make_residual_data(g);
  ScalarField f;
  f.value = [d](const Point& y) {
    const double Kv = K_value(d.K, y);
    const double u = d.outer_value(y), S = d.inner_sum(y);
    return Kv * std::pow(u + S, d.q) - Kv * std::pow(u, d.q) - d.inner_power_sum(y);
  };
  f.decay_exponent = static_cast<double>(glued_dim(g) + 2);
  return f;
}

struct ResidualNormOptions {
  double tau = 0;               // 0 = the base rate (N-4)/(N-2)
  bool enforce_window = true;   // reject concentrations outside the window
  SupNormOptions search;
};

/// Double-star weight anchored at the inner centers, at the inner scale.
inline WeightSpec residual_weight(const GluedConfig& g, double tau = 0) {
  validate(g);
  WeightSpec w;
  w.kind = WeightKind::kDoubleStar;
  w.dim = glued_dim(g);
  w.centers = build_polygon(g.inner);
  w.scale = g.inner.scale;
  w.tau = tau > 0 ? tau : tau_inner(w.dim);
  return w;
}

/// Lower-bound estimate of the weighted sup norm of the gluing defect.
inline SupNormResult ansatz_residual_norm(const GluedConfig& g,
                                          const ResidualNormOptions& opts = {}) {
  validate(g);
  if (glued_dim(g) < 7)
    throw InvalidConfigError("ansatz_residual_norm: norm estimates need dimension >= 7");
  if (opts.enforce_window) require_in_window(g);
  const ScalarField f = ansatz_residual_field(g);
  return weighted_sup_norm(f.value, residual_weight(g, opts.tau), opts.search);
}

struct DecayFit {
  std::vector<double> scales;
  std::vector<double> values;
  LineFit fit;                 // log(value) against log(scale)
  bool all_converged = true;   // every norm search refined to tolerance
};

/// Sweep the inner concentration and fit the decay rate of the residual norm.
inline DecayFit residual_decay_sweep(GluedConfig g, const std::vector<double>& lambdas,
                                     const ResidualNormOptions& opts = {}) {
  if (lambdas.size() < 2)
    throw InvalidConfigError("residual_decay_sweep: need at least two scales");
  DecayFit out;
  for (double L : lambdas) {
    if (!(L > 0)) throw InvalidConfigError("residual_decay_sweep: scales must be positive");
    g.inner.scale = L;
    const SupNormResult r = ansatz_residual_norm(g, opts);
    out.scales.push_back(L);
    out.values.push_back(r.value);
    out.all_converged = out.all_converged && r.refinement_converged;
  }
  out.fit = fit_loglog(out.scales, out.values);
  return out;
}

// ---------------------------------------------------------------------------
// Superlinear remainder of the critical nonlinearity

/// K [ (B+xi)^q - B^q - q B^{q-1} xi ] at the glued ansatz B, with the odd
/// power extension for sign-changing arguments.  Requires dimension >= 7 so
/// the remainder is superlinear with exponent q = 2*-1 < 2.
inline double nonlinear_remainder(const ScalarField& xi, const GluedConfig& g,
                                  const Point& y) {
  validate(g);
  if (glued_dim(g) < 7)
    throw InvalidConfigError("nonlinear_remainder: superlinear regime needs dimension >= 7");
  if (!xi.value) throw InvalidConfigError("nonlinear_remainder: field has no value function");
  const double q = critical_exponent(glued_dim(g)) - 1.0;
  const Tower t = glued_ansatz(g);
  const double B = tower_value(t, y);
  const double v = xi.value(y);
  return K_value(g.potential, y) *
         (odd_power(B + v, q) - odd_power(B, q) - q * std::pow(std::abs(B), q - 1.0) * v);
}

/// Probe field that saturates the superlinear growth bound: the double-star
/// envelope raised to 1/q.  It decays slower than the ansatz, so far from the
/// rings the remainder of s * probe scales exactly like s^q.
inline ScalarField saturating_probe_field(const GluedConfig& g, double tau = 0) {
  const WeightSpec w = residual_weight(g, tau);
  const double inv_q = 1.0 / (critical_exponent(w.dim) - 1.0);
  ScalarField f;
  f.value = [w, inv_q](const Point& y) { return std::pow(weight_value(w, y), inv_q); };
  f.decay_exponent = (0.5 * (w.dim + 2) + w.tau) * inv_q;
  return f;
}

struct ProbeOptions {
  int directions = 6;       // seeded random rays, plus the outward radial one
  int radii = 160;          // log-spaced radii per ray
  double r_lo = 1e-3;
  double r_hi = 2e4;
  std::uint64_t seed = 7;
  double tau = 0;           // weight strengthening; 0 = default
};

struct ScalingProbe {
  std::vector<double> scales;
  std::vector<double> values;  // weighted sup of the remainder over the probe set
  LineFit fit;                 // log(value) against log(scale)
};

/// Measure how the weighted remainder of s * xi0 scales with s: evaluate
/// |remainder| / double-star weight over a deterministic ray sample anchored
/// at the first inner bubble and fit the log-log slope.
inline ScalingProbe remainder_scaling(const GluedConfig& g, const ScalarField& xi0,
                                      const std::vector<double>& scales,
                                      const ProbeOptions& opts = {}) {
  validate(g);
  const int N = glued_dim(g);
  if (N < 7)
    throw InvalidConfigError("remainder_scaling: superlinear regime needs dimension >= 7");
  if (scales.size() < 2)
    throw InvalidConfigError("remainder_scaling: need at least two probe scales");
  for (double s : scales)
    if (!(s > 0)) throw InvalidConfigError("remainder_scaling: probe scales must be positive");
  if (!xi0.value) throw InvalidConfigError("remainder_scaling: probe field has no value function");
  if (opts.directions < 0 || opts.radii < 2 || !(opts.r_lo > 0) || !(opts.r_hi > opts.r_lo))
    throw InvalidConfigError("remainder_scaling: bad probe geometry");

  const double q = critical_exponent(N) - 1.0;
  const Tower t = glued_ansatz(g);
  const WeightSpec w = residual_weight(g, opts.tau);
  const Point anchor = build_polygon(g.inner)[0];

  std::vector<Point> dirs;
  dirs.push_back(normalized(anchor));
  SplitMix64 rng(opts.seed);
  for (int d = 0; d < opts.directions; ++d) {
    Point v(N);
    for (int i = 0; i < N; ++i) v[i] = rng.normal();
    dirs.push_back(normalized(v));
  }

  struct Sample {
    double base, coeff, xi, weight;
  };
  std::vector<Sample> samples;
  const double lr = std::log(opts.r_hi / opts.r_lo);
  for (const Point& d : dirs)
    for (int i = 0; i < opts.radii; ++i) {
      const double r = opts.r_lo * std::exp(lr * i / (opts.radii - 1.0));
      const Point y = anchor + r * d;
      Sample s;
      s.base = tower_value(t, y);
      s.coeff = K_value(g.potential, y);
      s.xi = xi0.value(y);
      s.weight = weight_value(w, y);
      samples.push_back(s);
    }

  ScalingProbe out;
  for (double sc : scales) {
    double best = 0;
    for (const Sample& s : samples) {
      const double v = sc * s.xi;
      const double rem = s.coeff * (odd_power(s.base + v, q) - odd_power(s.base, q) -
                                    q * std::pow(std::abs(s.base), q - 1.0) * v);
      best = std::max(best, std::abs(rem) / s.weight);
    }
    if (!(best > 0))
      throw InvalidConfigError("remainder_scaling: remainder vanished on the probe set");
    out.scales.push_back(sc);
    out.values.push_back(best);
  }
  out.fit = fit_loglog(out.scales, out.values);
  return out;
}

// ---------------------------------------------------------------------------
// Kernel projection
//
// Rescale xi to the unit-bubble frame of a given bubble,
//   xi~(z) = mu^{-(N-2)/2} xi(x + z/mu),
// and project onto the scale kernel psi_0 and one translation kernel psi_axis
// under the inner product  <f,g> = int_{B_R(0)} U^{2*-2} f g .
// Exact on the kernel span for any R because both sides use the same domain.

struct KernelCoefficients {
  double b0 = 0;           // coefficient of the scale kernel
  double b1 = 0;           // coefficient of the probed translation kernel
  int bubble_index = -1;   // caller-assigned label
  double residual = 0;     // weighted L2 norm of the unprojected part
  double input_norm = 0;   // weighted L2 norm of the rescaled input
  double quad_error = 0;
};

struct ProjectionOptions {
  int axis = 0;            // translation direction probed by b1
  double radius = 20.0;    // projection ball radius in the unit-bubble frame
  SphereMode mode = SphereMode::kZonal;
  SphereFrame frame;       // default: zonal about `axis`
  // The absolute floor stays above the rounding noise of the odd cross
  // integrals, which cancel to ~0 against integrands of much larger scale.
  IntegrationOptions quad = [] {
    IntegrationOptions o;
    o.abs_tol = 1e-8;
    o.rel_tol = 1e-10;
    o.breakpoints = {1.0};  // sign change of the scale kernel
    return o;
  }();
};

inline KernelCoefficients kernel_projection(const ScalarField& xi, const Bubble& b,
                                            const ProjectionOptions& opts = {}) {
  if (!xi.value) throw InvalidConfigError("kernel_projection: field has no value function");
  if (opts.axis < 0 || opts.axis >= b.dim)
    throw InvalidConfigError("kernel_projection: axis out of range");
  if (!(opts.radius > 0))
    throw InvalidConfigError("kernel_projection: radius must be positive");
  const int N = b.dim;
  const double q = critical_exponent(N) - 1.0;
  const double amp = std::pow(b.scale, -0.5 * (N - 2.0));
  const Bubble unit = make_bubble(Point(N), 1.0);
  const SphereFrame frame =
      opts.frame.axis1.dim == N ? opts.frame : make_axis_frame(N, opts.axis);

  auto tilde = [&xi, &b, amp](const Point& z) {
    return amp * xi.value(b.center + (1.0 / b.scale) * z);
  };
  auto weight = [&unit, q](const Point& z) {
    return std::pow(bubble_value(unit, z), q - 1.0);  // U^{2*-2}
  };
  auto psi0 = [N](const Point& z) { return kernel_value(0, z, N); };
  auto psi1 = [N, &opts](const Point& z) { return kernel_value(opts.axis + 1, z, N); };

  KernelCoefficients out;
  auto pair_integral = [&](const FieldFn& f, const FieldFn& h) {
    const FieldFn prod = [&](const Point& z) { return weight(z) * f(z) * h(z); };
    const IntegralResult r = integrate_ball(prod, N, Point(N), opts.radius, opts.mode,
                                            frame, opts.quad);
    out.quad_error += r.error;
    return r.value;
  };
  const FieldFn fx = tilde, f0 = psi0, f1 = psi1;
  const double s00 = pair_integral(f0, f0);
  const double s11 = pair_integral(f1, f1);
  const double s01 = pair_integral(f0, f1);
  const double sx0 = pair_integral(fx, f0);
  const double sx1 = pair_integral(fx, f1);
  const double sxx = pair_integral(fx, fx);

  const double det = s00 * s11 - s01 * s01;
  if (!(det > 0))
    throw InvalidConfigError("kernel_projection: kernel Gram degenerate on the ball");
  out.b0 = (sx0 * s11 - sx1 * s01) / det;
  out.b1 = (s00 * sx1 - s01 * sx0) / det;
  out.input_norm = std::sqrt(std::max(0.0, sxx));
  out.residual = std::sqrt(std::max(0.0, sxx - out.b0 * sx0 - out.b1 * sx1));
  return out;
}

// ---------------------------------------------------------------------------
// Gram system of the inner-ring kernel directions
//
// Entries  G[(j,i),(j',i')] = int U_{p_j,lambda}^{2*-2} Z_{j,i} Z_{j',i'}
// over all space, with Z_{j,1} the ring-radius direction and Z_{j,2} the
// concentration direction of inner bubble j.  Ring symmetry makes the two
// weight orderings of an off-diagonal pair equal, so the upper triangle is
// computed and mirrored.

struct GramOptions {
  double radius = 0;                  // 0 = auto from ring radius and scale
  std::optional<SphereMode> mode;     // default: zonal for <= 2 bubbles,
  SphereFrame frame;                  //   plane-cylinder for more
  // Entries span many orders of magnitude; the absolute floor keeps the
  // near-zero parity entries from chasing an unreachable tolerance.
  IntegrationOptions quad = [] {
    IntegrationOptions o;
    o.abs_tol = 1e-6;
    o.rel_tol = 1e-9;
    return o;
  }();
};

inline std::vector<double> gram_matrix(const GluedConfig& g, const GramOptions& opts = {}) {
  validate(g);
  const int N = glued_dim(g);
  const int n = g.inner.count;
  const double lambda = g.inner.scale;
  const double q = critical_exponent(N) - 1.0;
  const std::vector<Point> centers = build_polygon(g.inner);

  const bool zonal_ok = n <= 2;  // all centers on one axis line through 0
  const SphereMode mode = opts.mode.value_or(zonal_ok ? SphereMode::kZonal
                                                      : SphereMode::kPlaneCylinder);
  SphereFrame frame = opts.frame;
  if (frame.axis1.dim != N) {
    frame = make_axis_frame(N, g.inner.plane.first);
    frame.axis2 = unit_vector(g.inner.plane.second, N);
  }
  const bool centered_on_bubble = (n == 1);
  const Point center = centered_on_bubble ? centers[0] : Point(N);
  double radius = opts.radius;
  if (!(radius > 0))
    radius = (centered_on_bubble ? 0.0 : g.inner.radius) + 60.0 / lambda;

  IntegrationOptions quad = opts.quad;
  if (quad.breakpoints.empty()) {
    if (centered_on_bubble) {
      quad.breakpoints = {0.5 / lambda, 2.0 / lambda, 8.0 / lambda};
    } else {
      for (double d : {g.inner.radius - 2.0 / lambda, g.inner.radius,
                       g.inner.radius + 2.0 / lambda})
        if (d > 0 && d < radius) quad.breakpoints.push_back(d);
    }
  }

  std::vector<ScalarField> Z;
  for (int j = 0; j < n; ++j)
    for (int i = 1; i <= 2; ++i) Z.push_back(inner_kernel_field(g, j, i));
  std::vector<Bubble> bubbles;
  for (const Point& p : centers) bubbles.push_back(make_bubble(p, lambda));

  const int m = 2 * n;
  std::vector<double> G(static_cast<std::size_t>(m) * m, 0.0);
  for (int row = 0; row < m; ++row) {
    const Bubble& wb = bubbles[row / 2];
    for (int col = row; col < m; ++col) {
      const FieldFn f = [&wb, &Z, row, col, q](const Point& y) {
        return std::pow(bubble_value(wb, y), q - 1.0) * Z[row].value(y) * Z[col].value(y);
      };
      const IntegralResult r = integrate_ball(f, N, center, radius, mode, frame, quad);
      G[static_cast<std::size_t>(row) * m + col] = r.value;
      G[static_cast<std::size_t>(col) * m + row] = r.value;
    }
  }
  return G;
}

}  // namespace multibump
