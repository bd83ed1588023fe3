#pragma once

// Pohozaev-type boundary/volume identities for -Delta u = K(|y|) u^{2*-1}:
// the translation identity (pairing a solution with a derivative direction
// against the radial drift of K) and the dilation identity (pairing against
// the scaling direction about a pivot), each evaluated on a ball with full
// per-term reporting.  Also: the three-term boundary quantity Q that survives
// when K-terms are dropped, its closed-form limit for sums of singular
// harmonic kernels on a polygon, the free-space kernel of -Delta, a far-field
// single-layer fit, and the local flux coefficients of a concentrating tower.
//
// Both identities come from one divergence-theorem computation; which
// equations the pair (u, xi) satisfies fixes the coefficient of the two
// K-terms.  When xi solves the linearized equation the factor is 1; when
// xi = u solves the same nonlinear equation the factor is 2/2*.  Everything
// else in the identity is pure calculus and holds for any smooth pair.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "multibump/bubble.hpp"
#include "multibump/core.hpp"
#include "multibump/potential.hpp"
#include "multibump/quadrature.hpp"

namespace multibump {

enum class PohozaevIdentity { kTranslation, kDilation };

/// Equation pair assumed for (u, xi); determines the K-term coefficient.
enum class PohozaevPairing {
  kLinearized,  // -Delta u = K u^{2*-1} and -Delta xi = (2*-1) K u^{2*-2} xi
  kDiagonal,    // xi = u with -Delta u = K u^{2*-1}
};

struct PohozaevOptions {
  SphereMode mode = SphereMode::kZonal;
  SphereFrame frame;        // must match the symmetry of the integrands
  IntegrationOptions quad;  // per-term quadrature control
  PohozaevPairing pairing = PohozaevPairing::kLinearized;
};

struct PohozaevReport {
  PohozaevIdentity identity = PohozaevIdentity::kTranslation;
  PohozaevPairing pairing = PohozaevPairing::kLinearized;
  int axis = -1;      // translation direction (translation identity only)
  double radius = 0;  // ball radius (largest radius for the all-space sweep)
  std::vector<std::string> term_names;
  std::vector<double> boundary_terms;  // signed values, identity order
  double boundary_sum = 0;
  double volume = 0;       // signed volume-term side
  double residual = 0;     // |boundary side - volume side|
  double scale = 0;        // largest term magnitude (boundary or volume)
  double relative = 0;     // residual / scale (0 when scale is 0)
  double quad_error = 0;   // accumulated quadrature error estimates
  bool converged = true;   // false if any term hit its refinement budget
  // All-space sweep (dilation only): per-radius data and the extrapolation.
  std::vector<double> sweep_radii;
  std::vector<double> sweep_volumes;
  std::vector<double> sweep_boundary;
  double extrapolated = 0;
};

namespace detail {

inline double pairing_factor(PohozaevPairing pairing, int dim) {
  if (pairing == PohozaevPairing::kLinearized) return 1.0;
  return 2.0 / critical_exponent(dim);  // 2/2* = (N-2)/N
}

/// Radial-profile gradient of K; zero at the origin (smooth even profile).
inline Point potential_gradient_safe(const PotentialK& K, const Point& y) {
  Point g(y.dim);
  if (K.form == PotentialForm::kConstantOne) return g;
  const double r = norm(y);
  if (r < 1e-12) return g;
  return (K_radial_d1(K, r) / r) * y;
}

/// Runs one term integral, downgrading a budget-exhaustion failure to a
/// partial value so the report can still be assembled.
template <typename Run>
inline void accumulate_term(PohozaevReport& rep, const std::string& name, Run&& run) {
  double value = 0, error = 0;
  try {
    const IntegralResult r = run();
    value = r.value;
    error = r.error;
  } catch (const ConvergenceError& e) {
    value = e.value;
    error = e.error;
    rep.converged = false;
  }
  rep.term_names.push_back(name);
  rep.boundary_terms.push_back(value);
  rep.quad_error += error;
}

inline void finish_report(PohozaevReport& rep) {
  rep.boundary_sum = pairwise_sum(rep.boundary_terms);
  rep.residual = std::abs(rep.boundary_sum - rep.volume);
  rep.scale = std::abs(rep.volume);
  for (double t : rep.boundary_terms) rep.scale = std::max(rep.scale, std::abs(t));
  rep.relative = rep.scale > 0 ? rep.residual / rep.scale : 0.0;
}

struct IdentityGeometry {
  Point center;
  double radius = 0;
};

inline void check_identity_inputs(const ScalarField& u, const ScalarField& xi,
                                  const PotentialK& K, const Point& center, double radius) {
  if (!u.value || !xi.value)
    throw InvalidConfigError("pohozaev: both fields need a value function");
  if (center.dim < 3) throw InvalidConfigError("pohozaev: dimension must be >= 3");
  if (K.dim != 0 && K.dim != center.dim)
    throw InvalidConfigError("pohozaev: potential dimension mismatch");
  if (!(radius > 0)) throw InvalidConfigError("pohozaev: ball radius must be positive");
}

}  // namespace detail

/// Translation identity on B_radius(center) in direction `axis`:
///   -S u_nu xi_i - S xi_nu u_i + S <grad u, grad xi> nu_i
///     - kappa S K u^{2*-1} xi nu_i  =  -kappa V (dK/dy_i) u^{2*-1} xi,
/// S = boundary integral, V = ball integral, kappa = pairing factor.
inline PohozaevReport pohozaev_translation(const ScalarField& u, const ScalarField& xi,
                                           const PotentialK& K, const Point& center,
                                           double radius, int axis,
                                           const PohozaevOptions& opts = {}) {
  detail::check_identity_inputs(u, xi, K, center, radius);
  const int dim = center.dim;
  if (axis < 0 || axis >= dim)
    throw InvalidConfigError("pohozaev_translation: axis out of range");
  const double kappa = detail::pairing_factor(opts.pairing, dim);
  const double pm1 = critical_exponent(dim) - 1.0;

  PohozaevReport rep;
  rep.identity = PohozaevIdentity::kTranslation;
  rep.pairing = opts.pairing;
  rep.axis = axis;
  rep.radius = radius;

  const auto nu = [center, radius](const Point& y) { return (1.0 / radius) * (y - center); };

  detail::accumulate_term(rep, "-S du/dnu dxi/di", [&] {
    FieldFn f = [&](const Point& y) {
      return -dot(field_gradient(u, y), nu(y)) * field_gradient(xi, y)[axis];
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "-S dxi/dnu du/di", [&] {
    FieldFn f = [&](const Point& y) {
      return -dot(field_gradient(xi, y), nu(y)) * field_gradient(u, y)[axis];
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "+S <gu,gxi> nu_i", [&] {
    FieldFn f = [&](const Point& y) {
      return dot(field_gradient(u, y), field_gradient(xi, y)) * nu(y)[axis];
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "-k S K u^p xi nu_i", [&] {
    FieldFn f = [&](const Point& y) {
      return -kappa * K_value(K, y) * odd_power(u.value(y), pm1) * xi.value(y) * nu(y)[axis];
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });

  if (K.form != PotentialForm::kConstantOne) {
    try {
      FieldFn f = [&](const Point& y) {
        return -kappa * detail::potential_gradient_safe(K, y)[axis] *
               odd_power(u.value(y), pm1) * xi.value(y);
      };
      const IntegralResult r =
          integrate_ball(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
      rep.volume = r.value;
      rep.quad_error += r.error;
    } catch (const ConvergenceError& e) {
      rep.volume = e.value;
      rep.quad_error += e.error;
      rep.converged = false;
    }
  }
  detail::finish_report(rep);
  return rep;
}

/// Dilation identity on B_radius(center) about the pivot x0 (z = y - x0):
///   kappa V <grad K, z> u^{2*-1} xi
///     = kappa S K u^{2*-1} xi <nu,z> + S u_nu <grad xi, z> + S xi_nu <grad u, z>
///       - S <grad u, grad xi> <nu,z> + (N-2)/2 S xi u_nu + (N-2)/2 S u xi_nu.
inline PohozaevReport pohozaev_dilation(const ScalarField& u, const ScalarField& xi,
                                        const PotentialK& K, const Point& center,
                                        double radius, const Point& pivot,
                                        const PohozaevOptions& opts = {}) {
  detail::check_identity_inputs(u, xi, K, center, radius);
  const int dim = center.dim;
  if (pivot.dim != dim) throw InvalidConfigError("pohozaev_dilation: pivot dimension mismatch");
  const double kappa = detail::pairing_factor(opts.pairing, dim);
  const double pm1 = critical_exponent(dim) - 1.0;
  const double half_nm2 = 0.5 * (dim - 2.0);

  PohozaevReport rep;
  rep.identity = PohozaevIdentity::kDilation;
  rep.pairing = opts.pairing;
  rep.radius = radius;

  const auto nu = [center, radius](const Point& y) { return (1.0 / radius) * (y - center); };
  const auto zv = [pivot](const Point& y) { return y - pivot; };

  detail::accumulate_term(rep, "+k S K u^p xi <nu,z>", [&] {
    FieldFn f = [&](const Point& y) {
      return kappa * K_value(K, y) * odd_power(u.value(y), pm1) * xi.value(y) *
             dot(nu(y), zv(y));
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "+S du/dnu <gxi,z>", [&] {
    FieldFn f = [&](const Point& y) {
      return dot(field_gradient(u, y), nu(y)) * dot(field_gradient(xi, y), zv(y));
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "+S dxi/dnu <gu,z>", [&] {
    FieldFn f = [&](const Point& y) {
      return dot(field_gradient(xi, y), nu(y)) * dot(field_gradient(u, y), zv(y));
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "-S <gu,gxi> <nu,z>", [&] {
    FieldFn f = [&](const Point& y) {
      return -dot(field_gradient(u, y), field_gradient(xi, y)) * dot(nu(y), zv(y));
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "+(N-2)/2 S xi du/dnu", [&] {
    FieldFn f = [&](const Point& y) {
      return half_nm2 * xi.value(y) * dot(field_gradient(u, y), nu(y));
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });
  detail::accumulate_term(rep, "+(N-2)/2 S u dxi/dnu", [&] {
    FieldFn f = [&](const Point& y) {
      return half_nm2 * u.value(y) * dot(field_gradient(xi, y), nu(y));
    };
    return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
  });

  if (K.form != PotentialForm::kConstantOne) {
    try {
      FieldFn f = [&](const Point& y) {
        return kappa * dot(detail::potential_gradient_safe(K, y), zv(y)) *
               odd_power(u.value(y), pm1) * xi.value(y);
      };
      const IntegralResult r =
          integrate_ball(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
      rep.volume = r.value;
      rep.quad_error += r.error;
    } catch (const ConvergenceError& e) {
      rep.volume = e.value;
      rep.quad_error += e.error;
      rep.converged = false;
    }
  }
  detail::finish_report(rep);
  return rep;
}

/// All-space dilation identity: on balls B_R(0) with R in {R0, 2R0, 4R0} the
/// boundary terms must decay (fields falling off like |y|^{2-N}) and the
/// volume integral kappa V <grad K, y - pivot> u^{2*-1} xi must contract; the
/// Richardson-extrapolated volume value is the all-space residual.
inline PohozaevReport pohozaev_dilation_allspace(const ScalarField& u, const ScalarField& xi,
                                                 const PotentialK& K, const Point& pivot,
                                                 double base_radius,
                                                 const PohozaevOptions& opts = {}) {
  if (!(base_radius > 0))
    throw InvalidConfigError("pohozaev_dilation_allspace: base radius must be positive");
  const int dim = pivot.dim;
  const Point origin(dim);
  PohozaevReport rep;
  std::vector<double> volumes, boundaries;
  double total_quad_error = 0;
  bool all_converged = true;
  for (double factor : {1.0, 2.0, 4.0}) {
    const double R = factor * base_radius;
    rep = pohozaev_dilation(u, xi, K, origin, R, pivot, opts);
    volumes.push_back(rep.volume);
    boundaries.push_back(rep.boundary_sum);
    total_quad_error += rep.quad_error;
    all_converged = all_converged && rep.converged;
  }
  rep.quad_error = total_quad_error;
  rep.converged = all_converged;
  rep.sweep_radii = {base_radius, 2.0 * base_radius, 4.0 * base_radius};
  rep.sweep_volumes = volumes;
  rep.sweep_boundary = boundaries;

  const double noise = 10.0 * rep.quad_error + 1e-10 * rep.scale;
  if (std::abs(boundaries[2]) > 0.5 * std::abs(boundaries[0]) &&
      std::abs(boundaries[2]) > noise)
    throw DivergentIntegralError(
        "pohozaev_dilation_allspace: boundary terms persist along the radius sweep; "
        "fields lack |y|^{2-N} falloff");

  const double d1 = volumes[1] - volumes[0];
  const double d2 = volumes[2] - volumes[1];
  const double vol_noise = 10.0 * rep.quad_error +
                           1e-12 * std::max({std::abs(volumes[0]), std::abs(volumes[1]),
                                             std::abs(volumes[2])});
  if (std::abs(d2) <= vol_noise) {
    rep.extrapolated = volumes[2];
  } else if (std::abs(d2) < std::abs(d1)) {
    const double q = d2 / d1;
    rep.extrapolated = volumes[2] + d2 * q / (1.0 - q);
  } else {
    throw DivergentIntegralError(
        "pohozaev_dilation_allspace: volume integral does not contract on expanding balls");
  }
  rep.residual = std::abs(rep.extrapolated);
  rep.relative = rep.scale > 0 ? rep.residual / rep.scale : 0.0;
  return rep;
}

/// Three-term boundary quantity on the sphere around one concentration
/// center (the translation identity stripped of its K-terms):
///   Q = -S u_nu xi_i - S xi_nu u_i + S <grad u, grad xi> nu_i.
inline IntegralResult boundary_Q(const ScalarField& u, const ScalarField& xi,
                                 const Point& center, double radius, int axis,
                                 const PohozaevOptions& opts = {}) {
  if (!u.value || !xi.value)
    throw InvalidConfigError("boundary_Q: both fields need a value function");
  if (!(radius > 0)) throw InvalidConfigError("boundary_Q: radius must be positive");
  const int dim = center.dim;
  if (axis < 0 || axis >= dim) throw InvalidConfigError("boundary_Q: axis out of range");
  FieldFn f = [&](const Point& y) {
    const Point nu = (1.0 / radius) * (y - center);
    const Point gu = field_gradient(u, y);
    const Point gxi = field_gradient(xi, y);
    return -dot(gu, nu) * gxi[axis] - dot(gxi, nu) * gu[axis] + dot(gu, gxi) * nu[axis];
  };
  return integrate_sphere(f, dim, center, radius, opts.mode, opts.frame, opts.quad);
}

// ---------------------------------------------------------------------------
// Free-space kernel of -Delta and polygon closed forms

/// G(y, x) = |y-x|^{2-N} / ((N-2) omega_{N-1}), the kernel of -Delta on R^N.
inline double green_function(int dim, const Point& y, const Point& x) {
  if (dim < 3) throw InvalidConfigError("green_function: dimension must be >= 3");
  const double d = dist(y, x);
  if (!(d > 0)) throw InvalidConfigError("green_function: evaluation at the pole");
  return std::pow(d, 2.0 - dim) / ((dim - 2.0) * sphere_area(dim - 1));
}

/// Sum of free-space kernels centred at the given poles, with the analytic
/// gradient (harmonic away from the poles).
inline ScalarField green_sum_field(const std::vector<Point>& poles, int dim) {
  if (poles.empty()) throw InvalidConfigError("green_sum_field: needs at least one pole");
  for (const Point& p : poles)
    if (p.dim != dim) throw InvalidConfigError("green_sum_field: pole dimension mismatch");
  const double A = 1.0 / ((dim - 2.0) * sphere_area(dim - 1));
  ScalarField f;
  f.value = [poles, dim, A](const Point& y) {
    std::vector<double> parts;
    parts.reserve(poles.size());
    for (const Point& p : poles) parts.push_back(A * std::pow(dist(y, p), 2.0 - dim));
    return pairwise_sum(parts);
  };
  f.gradient = [poles, dim, A](const Point& y) {
    Point g(dim);
    for (const Point& p : poles) {
      const double d2v = dist2(y, p);
      g += (A * (2.0 - dim) * std::pow(d2v, -0.5 * dim)) * (y - p);
    }
    return g;
  };
  f.laplacian = [](const Point&) { return 0.0; };
  f.decay_exponent = static_cast<double>(dim - 2);
  return f;
}

/// Small-sphere limit of Q for the kernel sum over a regular polygon of
/// `count` poles at ring radius r in the (1,2)-plane, evaluated at the first
/// pole along the first coordinate:
///   Q -> (2/omega_{N-1}) sum_{j>=2} (x_j - x_1)_1 / |x_j - x_1|^N.
inline double ring_Q_green_sum(int dim, int count, double ring_radius) {
  if (dim < 3) throw InvalidConfigError("ring_Q_green_sum: dimension must be >= 3");
  if (count < 2) throw InvalidConfigError("ring_Q_green_sum: needs at least two poles");
  if (!(ring_radius > 0))
    throw InvalidConfigError("ring_Q_green_sum: ring radius must be positive");
  std::vector<double> parts;
  parts.reserve(count - 1);
  for (int j = 1; j < count; ++j) {
    const double theta = 2.0 * kPi * j / count;
    const double first = ring_radius * (std::cos(theta) - 1.0);
    const double gap = 2.0 * ring_radius * std::abs(std::sin(0.5 * theta));
    parts.push_back(first / std::pow(gap, static_cast<double>(dim)));
  }
  return 2.0 / sphere_area(dim - 1) * pairwise_sum(parts);
}

// ---------------------------------------------------------------------------
// Far-field single-layer fit

struct FarFieldFit {
  double coefficient = 0;     // fitted multiple of the summed kernels
  double relative_misfit = 0; // rms residual over rms field value
  long samples = 0;
};

/// Least-squares fit of u against the kernel sum over the given poles, on a
/// spherical shell [r_lo, r_hi] sampled with seeded directions.  For a tower
/// concentrating at scale mu the coefficient approaches a_flux / mu^{(N-2)/2}.
inline FarFieldFit green_farfield_fit(const FieldFn& u, const std::vector<Point>& poles,
                                      int dim, double r_lo, double r_hi, int n_radii = 6,
                                      int n_dirs = 64, std::uint64_t seed = 7) {
  if (!u) throw InvalidConfigError("green_farfield_fit: field is empty");
  if (poles.empty()) throw InvalidConfigError("green_farfield_fit: needs at least one pole");
  if (!(0 < r_lo && r_lo < r_hi))
    throw InvalidConfigError("green_farfield_fit: need 0 < r_lo < r_hi");
  for (const Point& p : poles) {
    if (p.dim != dim) throw InvalidConfigError("green_farfield_fit: pole dimension mismatch");
    if (norm(p) >= r_lo)
      throw InvalidConfigError("green_farfield_fit: sample shell must enclose every pole");
  }
  if (n_radii < 2 || n_dirs < 1)
    throw InvalidConfigError("green_farfield_fit: need at least two radii and one direction");

  SplitMix64 rng(seed);
  const ScalarField g = green_sum_field(poles, dim);
  double sgg = 0, sug = 0, suu = 0;
  long count = 0;
  for (int ir = 0; ir < n_radii; ++ir) {
    const double r = r_lo * std::pow(r_hi / r_lo, double(ir) / (n_radii - 1));
    for (int id = 0; id < n_dirs; ++id) {
      Point dir(dim);
      for (int i = 0; i < dim; ++i) dir[i] = rng.normal();
      const Point y = r * normalized(dir);
      const double gv = g.value(y);
      const double uv = u(y);
      sgg += gv * gv;
      sug += uv * gv;
      suu += uv * uv;
      ++count;
    }
  }
  if (!(suu > 0))
    throw InvalidConfigError("green_farfield_fit: field vanishes on the sample shell");
  FarFieldFit fit;
  fit.coefficient = sug / sgg;
  const double res2 = std::max(0.0, suu - 2.0 * fit.coefficient * sug +
                                        fit.coefficient * fit.coefficient * sgg);
  fit.relative_misfit = std::sqrt(res2 / suu);
  fit.samples = count;
  return fit;
}

// ---------------------------------------------------------------------------
// Local flux coefficients at a concentration center

struct FluxCoefficients {
  double a_flux = 0;        // mu^{(N-2)/2} V_{B_delta} K u^{2*-1}
  double b_flux_local = 0;  // mu^{(N-2)/2} (2*-1) V_{B_delta} K u^{2*-2} xi
  double radius = 0;
  int center_index = -1;
  double a_error = 0;
  double b_error = 0;
};

/// Flux coefficients of the tower near one of its centers, normalized by the
/// concentration scale so that for a single bubble with K = 1 the value
/// a_flux approaches the full-space mass integral as mu*delta grows, and
/// b_flux_local with xi = mu dU/dmu approaches the kernel-flux moment.
inline FluxCoefficients flux_coefficients(const Tower& t, const ScalarField& xi,
                                          const PotentialK& K, int center_index,
                                          double radius, const PohozaevOptions& opts = {}) {
  if (t.bubbles.empty()) throw InvalidConfigError("flux_coefficients: tower has no bubbles");
  if (center_index < 0 || center_index >= static_cast<int>(t.bubbles.size()))
    throw InvalidConfigError("flux_coefficients: center index out of range");
  if (!(radius > 0)) throw InvalidConfigError("flux_coefficients: radius must be positive");
  if (!xi.value) throw InvalidConfigError("flux_coefficients: xi needs a value function");
  const Bubble& b = t.bubbles[center_index];
  const int dim = b.dim;
  if (K.dim != 0 && K.dim != dim)
    throw InvalidConfigError("flux_coefficients: potential dimension mismatch");
  for (int j = 0; j < static_cast<int>(t.bubbles.size()); ++j) {
    if (j == center_index) continue;
    if (radius > 0.5 * dist(b.center, t.bubbles[j].center) * (1.0 + 1e-12))
      throw InvalidConfigError(
          "flux_coefficients: ball leaves the cell of its center (reaches a neighbor)");
  }
  const double pm1 = critical_exponent(dim) - 1.0;
  const double pref = std::pow(b.scale, 0.5 * (dim - 2.0));

  FluxCoefficients out;
  out.radius = radius;
  out.center_index = center_index;

  FieldFn fa = [&](const Point& y) {
    return K_value(K, y) * odd_power(tower_value(t, y), pm1);
  };
  const IntegralResult ra =
      integrate_ball(fa, dim, b.center, radius, opts.mode, opts.frame, opts.quad);
  out.a_flux = pref * ra.value;
  out.a_error = pref * ra.error;

  FieldFn fb = [&](const Point& y) {
    const double uv = tower_value(t, y);
    return K_value(K, y) * std::pow(std::abs(uv), pm1 - 1.0) * xi.value(y);
  };
  const IntegralResult rb =
      integrate_ball(fb, dim, b.center, radius, opts.mode, opts.frame, opts.quad);
  out.b_flux_local = pref * pm1 * rb.value;
  out.b_error = pref * pm1 * rb.error;
  return out;
}

}  // namespace multibump
