#pragma once

// The standard concentrating solution ("bubble") of the critical equation
// -Delta u = u^{(N+2)/(N-2)} on R^N,
//     U_{x,mu}(y) = c_N mu^{(N-2)/2} (1 + mu^2 |y-x|^2)^{-(N-2)/2},
//     c_N = (N(N-2))^{(N-2)/4},
// its first kernels (scale and translation derivatives), sums of bubbles on
// polygon configurations ("towers"), and the closed-form moment table of the
// integrals that drive every expansion in the library.
//
// Gradients and Laplacians are explicit closed forms, written via the radial
// composition rule Delta f(|z|^2) = 2N f' + 4|z|^2 f'' rather than through the
// equation itself, so PDE identities remain honest numerical checks.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "multibump/core.hpp"
#include "multibump/symmetry.hpp"

namespace multibump {

inline double bubble_constant(int dim) {
  if (dim < 3) throw InvalidConfigError("bubble_constant: dimension must be >= 3");
  return std::pow(dim * (dim - 2.0), (dim - 2.0) / 4.0);
}

struct Bubble {
  int dim = 0;
  Point center;
  double scale = 1.0;  // concentration parameter mu
};

inline Bubble make_bubble(const Point& center, double scale) {
  if (!(scale > 0)) throw InvalidConfigError("Bubble: scale must be positive");
  if (center.dim < 3) throw InvalidConfigError("Bubble: dimension must be >= 3");
  return Bubble{center.dim, center, scale};
}

inline double bubble_value(const Bubble& b, const Point& y) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double rho2 = dist2(y, b.center);
  return bubble_constant(N) * std::pow(b.scale, a) *
         std::pow(1.0 + b.scale * b.scale * rho2, -a);
}

inline Point bubble_gradient(const Bubble& b, const Point& y) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double mu2 = b.scale * b.scale;
  const double rho2 = dist2(y, b.center);
  const double coef = -(N - 2.0) * bubble_constant(N) * std::pow(b.scale, a) * mu2 *
                      std::pow(1.0 + mu2 * rho2, -a - 1.0);
  return coef * (y - b.center);
}

inline double bubble_laplacian(const Bubble& b, const Point& y) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double mu2 = b.scale * b.scale;
  const double t = dist2(y, b.center);
  const double base = 1.0 + mu2 * t;
  const double c = bubble_constant(N) * std::pow(b.scale, a);
  const double g1 = -a * mu2 * std::pow(base, -a - 1.0);
  const double g2 = a * (a + 1.0) * mu2 * mu2 * std::pow(base, -a - 2.0);
  return c * (2.0 * N * g1 + 4.0 * t * g2);
}

// ---------------------------------------------------------------------------
// Kernels of the linearized operator at the standard bubble U_{0,1}
//
// index 0:      d/dmu U_{0,mu} at mu = 1   (scale direction)
// index i>=1:   d/dy_i U_{0,1}             (translation directions)
// These satisfy -Delta psi = (2^*-1) U^{2^*-2} psi.

inline double kernel_value(int index, const Point& y, int dim) {
  const int N = dim;
  const double c = bubble_constant(N);
  const double s = norm2(y);
  if (index == 0) return c * 0.5 * (N - 2) * (1.0 - s) * std::pow(1.0 + s, -0.5 * N);
  if (index < 1 || index > N) throw InvalidConfigError("kernel_value: index out of range");
  return -(N - 2.0) * c * y[index - 1] * std::pow(1.0 + s, -0.5 * N);
}

inline Point kernel_gradient(int index, const Point& y, int dim) {
  const int N = dim;
  const double c = bubble_constant(N);
  const double s = norm2(y);
  if (index == 0) {
    // psi_0 = c*a*(1-s)(1+s)^{-N/2};  d/ds = -c*a*(1+s)^{-N/2-1}[(1+N/2)+s(1-N/2)]
    const double a = 0.5 * (N - 2);
    const double gp =
        -c * a * std::pow(1.0 + s, -0.5 * N - 1.0) * ((1.0 + 0.5 * N) + s * (1.0 - 0.5 * N));
    return (2.0 * gp) * y;
  }
  if (index < 1 || index > N) throw InvalidConfigError("kernel_gradient: index out of range");
  const int i = index - 1;
  Point g(y.dim);
  const double h = std::pow(1.0 + s, -0.5 * N);
  const double h1 = std::pow(1.0 + s, -0.5 * N - 1.0);
  for (int j = 0; j < y.dim; ++j) {
    const double delta = (i == j) ? 1.0 : 0.0;
    g[j] = -(N - 2.0) * c * (delta * h - N * y[i] * y[j] * h1);
  }
  return g;
}

inline double kernel_laplacian(int index, const Point& y, int dim) {
  const int N = dim;
  const double c = bubble_constant(N);
  const double s = norm2(y);
  if (index == 0) {
    const double a = 0.5 * (N - 2);
    const double phi = (1.0 + 0.5 * N) + s * (1.0 - 0.5 * N);
    const double g1 = -c * a * std::pow(1.0 + s, -0.5 * N - 1.0) * phi;
    const double g2 = -c * a * (-(0.5 * N + 1.0) * std::pow(1.0 + s, -0.5 * N - 2.0) * phi +
                                (1.0 - 0.5 * N) * std::pow(1.0 + s, -0.5 * N - 1.0));
    return 2.0 * N * g1 + 4.0 * s * g2;
  }
  if (index < 1 || index > N) throw InvalidConfigError("kernel_laplacian: index out of range");
  const double h1 = -0.5 * N * std::pow(1.0 + s, -0.5 * N - 1.0);
  const double h2 = 0.5 * N * (0.5 * N + 1.0) * std::pow(1.0 + s, -0.5 * N - 2.0);
  return -(N - 2.0) * c * y[index - 1] * ((2.0 * N + 4.0) * h1 + 4.0 * s * h2);
}

// ---------------------------------------------------------------------------
// Scale / center derivatives of a general bubble (the "Z" directions)

/// d U_{x,mu} / d mu.
inline double bubble_dscale(const Bubble& b, const Point& y) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double mu = b.scale;
  const double t = dist2(y, b.center);
  const double base = 1.0 + mu * mu * t;
  return bubble_constant(N) * a * std::pow(mu, a - 1.0) * (1.0 - mu * mu * t) *
         std::pow(base, -a - 1.0);
}

inline Point bubble_dscale_gradient(const Bubble& b, const Point& y) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double mu = b.scale;
  const double t = dist2(y, b.center);
  const double base = 1.0 + mu * mu * t;
  // f(t) = c*a*mu^{a-1}(1-mu^2 t)(base)^{-a-1};  f'(t) = -c*a*mu^{a+1}(base)^{-a-2}[(a+2)-a mu^2 t]
  const double fp = -bubble_constant(N) * a * std::pow(mu, a + 1.0) *
                    std::pow(base, -a - 2.0) * ((a + 2.0) - a * mu * mu * t);
  return (2.0 * fp) * (y - b.center);
}

inline double bubble_dscale_laplacian(const Bubble& b, const Point& y) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double mu = b.scale;
  const double t = dist2(y, b.center);
  const double base = 1.0 + mu * mu * t;
  const double c = bubble_constant(N);
  const double fp =
      -c * a * std::pow(mu, a + 1.0) * std::pow(base, -a - 2.0) * ((a + 2.0) - a * mu * mu * t);
  const double fpp = c * a * std::pow(mu, a + 3.0) * std::pow(base, -a - 3.0) *
                     ((a + 2.0) * ((a + 2.0) - a * mu * mu * t) + a * base);
  return 2.0 * N * fp + 4.0 * t * fpp;
}

/// Directional derivative of U_{x,mu} with respect to the center x along `dir`.
inline double bubble_dcenter(const Bubble& b, const Point& y, const Point& dir) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double mu2 = b.scale * b.scale;
  const double rho2 = dist2(y, b.center);
  const double coef = (N - 2.0) * bubble_constant(N) * std::pow(b.scale, a) * mu2 *
                      std::pow(1.0 + mu2 * rho2, -a - 1.0);
  return coef * dot(y - b.center, dir);
}

// ---------------------------------------------------------------------------
// Field wrappers: value/gradient/Laplacian bundles for a bubble and its two
// kernel directions, with the correct far-field decay exponents declared.

inline ScalarField bubble_field(const Bubble& b) {
  ScalarField f;
  f.value = [b](const Point& y) { return bubble_value(b, y); };
  f.gradient = [b](const Point& y) { return bubble_gradient(b, y); };
  f.laplacian = [b](const Point& y) { return bubble_laplacian(b, y); };
  f.decay_exponent = static_cast<double>(b.dim - 2);
  return f;
}

/// d U_{x,mu} / d mu as a field (scale direction; decays like |y|^{2-N}).
inline ScalarField dscale_field(const Bubble& b) {
  ScalarField f;
  f.value = [b](const Point& y) { return bubble_dscale(b, y); };
  f.gradient = [b](const Point& y) { return bubble_dscale_gradient(b, y); };
  f.laplacian = [b](const Point& y) { return bubble_dscale_laplacian(b, y); };
  f.decay_exponent = static_cast<double>(b.dim - 2);
  return f;
}

namespace detail {
// d U_{x,mu} / d x_i = w_i * g(|w|^2) with w = y - x and
// g(t) = (N-2) c_N mu^{a+2} (1 + mu^2 t)^{-a-1}, a = (N-2)/2.
inline double dcenter_profile(const Bubble& b, double t, int order) {
  const int N = b.dim;
  const double a = 0.5 * (N - 2);
  const double mu2 = b.scale * b.scale;
  const double base = 1.0 + mu2 * t;
  const double c0 = (N - 2.0) * bubble_constant(N) * std::pow(b.scale, a + 2.0);
  if (order == 0) return c0 * std::pow(base, -a - 1.0);
  if (order == 1) return -c0 * (a + 1.0) * mu2 * std::pow(base, -a - 2.0);
  return c0 * (a + 1.0) * (a + 2.0) * mu2 * mu2 * std::pow(base, -a - 3.0);
}
}  // namespace detail

/// d U_{x,mu} / d x_axis as a field (translation direction; decays like
/// |y|^{1-N}).  At x = 0, mu = 1 this is the negative of kernel index axis+1.
inline ScalarField dcenter_field(const Bubble& b, int axis) {
  if (axis < 0 || axis >= b.dim) throw InvalidConfigError("dcenter_field: axis out of range");
  ScalarField f;
  f.value = [b, axis](const Point& y) {
    const double t = dist2(y, b.center);
    return (y[axis] - b.center[axis]) * detail::dcenter_profile(b, t, 0);
  };
  f.gradient = [b, axis](const Point& y) {
    const Point w = y - b.center;
    const double t = norm2(w);
    const double g = detail::dcenter_profile(b, t, 0);
    const double gp = detail::dcenter_profile(b, t, 1);
    Point out = (2.0 * w[axis] * gp) * w;
    out[axis] += g;
    return out;
  };
  f.laplacian = [b, axis](const Point& y) {
    const Point w = y - b.center;
    const double t = norm2(w);
    const double gp = detail::dcenter_profile(b, t, 1);
    const double gpp = detail::dcenter_profile(b, t, 2);
    return w[axis] * (2.0 * (b.dim + 2.0) * gp + 4.0 * t * gpp);
  };
  f.decay_exponent = static_cast<double>(b.dim - 1);
  return f;
}

// ---------------------------------------------------------------------------
// Towers: sums of bubbles plus an optional smooth background field

struct Tower {
  std::vector<Bubble> bubbles;
  ScalarField background;  // background.value may be empty
};

inline Tower make_tower(const PolygonConfig& cfg) {
  Tower t;
  for (const Point& p : build_polygon(cfg)) t.bubbles.push_back(make_bubble(p, cfg.scale));
  return t;
}

inline double tower_value(const Tower& t, const Point& y) {
  double s = 0;
  for (const auto& b : t.bubbles) s += bubble_value(b, y);
  if (t.background.value) s += t.background.value(y);
  return s;
}

inline Point tower_gradient(const Tower& t, const Point& y) {
  Point g(y.dim);
  for (const auto& b : t.bubbles) g += bubble_gradient(b, y);
  if (t.background.value) g += field_gradient(t.background, y);
  return g;
}

inline double tower_laplacian(const Tower& t, const Point& y) {
  double s = 0;
  for (const auto& b : t.bubbles) s += bubble_laplacian(b, y);
  if (t.background.value) s += field_laplacian(t.background, y);
  return s;
}

inline ScalarField tower_field(const Tower& t) {
  ScalarField f;
  f.value = [t](const Point& y) { return tower_value(t, y); };
  f.gradient = [t](const Point& y) { return tower_gradient(t, y); };
  f.laplacian = [t](const Point& y) { return tower_laplacian(t, y); };
  f.decay_exponent = t.bubbles.empty() ? t.background.decay_exponent
                                       : static_cast<double>(t.bubbles[0].dim - 2);
  return f;
}

// ---------------------------------------------------------------------------
// Closed-form moments
//
// moment_integral(N, a, b) = int_{R^N} |y|^b (1+|y|^2)^{-a} dy
//                          = (omega_{N-1}/2) * Beta((N+b)/2, a-(N+b)/2),
// finite iff 2a - b > N and b > -N.

inline double moment_integral(int dim, double a, double b) {
  if (!(b > -dim))
    throw DivergentIntegralError("moment_integral: |y|^b not integrable at the origin");
  if (!(2 * a - b > dim))
    throw DivergentIntegralError("moment_integral: integrand does not decay fast enough");
  return 0.5 * sphere_area(dim - 1) * beta_function(0.5 * (dim + b), a - 0.5 * (dim + b));
}

struct MomentTable {
  int dim = 0;
  double c_dim = 0;          // bubble normalization c_N
  double sphere = 0;         // omega_{N-1}, area of the unit sphere in R^N
  double mass_flux = 0;      // int U^{2^*-1}
  double kernel_flux = 0;    // (2^*-1) int U^{2^*-2} psi_0
  double volume_mass = 0;    // int U^{2^*}
  double second_moment = 0;  // int U^{2^*} |y|^2
  double kernel0_mass2 = 0;  // int U^{2^*-1} psi_0 |y|^2
  double kernel0_norm = 0;   // int U^{2^*-2} psi_0^2
  double kernel1_norm = 0;   // int U^{2^*-2} psi_1^2

  std::map<std::string, double> as_map() const {
    return {
        {"dim", static_cast<double>(dim)},
        {"c_dim", c_dim},
        {"sphere", sphere},
        {"mass_flux", mass_flux},
        {"kernel_flux", kernel_flux},
        {"volume_mass", volume_mass},
        {"second_moment", second_moment},
        {"kernel0_mass2", kernel0_mass2},
        {"kernel0_norm", kernel0_norm},
        {"kernel1_norm", kernel1_norm},
    };
  }
};

inline MomentTable closed_moments(int dim) {
  if (dim < 5 || dim > kMaxDim)
    throw InvalidConfigError("closed_moments: dimension must be in [5, 9]");
  const int N = dim;
  const double c = bubble_constant(N);
  const double a = 0.5 * (N - 2);
  const double NN2 = N * (N - 2.0);  // c^{2^*-2}
  const double p = critical_exponent(N) - 1.0;
  MomentTable m;
  m.dim = N;
  m.c_dim = c;
  m.sphere = sphere_area(N - 1);
  m.mass_flux = NN2 * c * moment_integral(N, 0.5 * (N + 2), 0);
  m.kernel_flux =
      p * NN2 * c * a * (moment_integral(N, 0.5 * N + 2, 0) - moment_integral(N, 0.5 * N + 2, 2));
  m.volume_mass = std::pow(NN2, 0.5 * N) * moment_integral(N, N, 0);
  m.second_moment = std::pow(NN2, 0.5 * N) * moment_integral(N, N, 2);
  m.kernel0_mass2 =
      NN2 * c * c * a * (moment_integral(N, N + 1, 2) - moment_integral(N, N + 1, 4));
  m.kernel0_norm = NN2 * c * c * a * a *
                   (moment_integral(N, N + 2, 0) - 2.0 * moment_integral(N, N + 2, 2) +
                    moment_integral(N, N + 2, 4));
  m.kernel1_norm = (N - 2.0) * (N - 2.0) * NN2 / N * c * c * moment_integral(N, N + 2, 2);
  return m;
}

}  // namespace multibump
