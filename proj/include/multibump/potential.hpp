#pragma once

// Radial coefficient profiles K(|y|) for the critical equation
// -Delta u = K(|y|) u^{(N+2)/(N-2)}, with closed-form derivatives, the radial
// Laplacian, and an optional 1/k spatial rescaling K_k(y) = K(|y|/k).
//
// Supported forms:
//   * constant-one
//   * quadratic-bump: K(r) = 1 - c0 (r-r0)^2 exp(-(r-r0)^2); it has a
//     non-degenerate interior maximum K(r0) = 1 with K''(r0) = -2 c0, and is
//     globally positive iff c0 * max_s s^2 e^{-s^2} = c0/e < 1.
//   * user-table: monotone piecewise-cubic interpolation of (r, K) samples
//     (Fritsch-Carlson limited slopes, no overshoot), clamped outside the
//     table range.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "multibump/core.hpp"

namespace multibump {

enum class PotentialForm { kConstantOne, kQuadraticBump, kUserTable };

struct PotentialK {
  PotentialForm form = PotentialForm::kConstantOne;
  int dim = 0;
  double r0 = 1.0;       // bump location
  double c0 = 1.0;       // bump curvature parameter
  double rescale = 1.0;  // evaluates K(r / rescale)
  // user-table data
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> slopes;
};

inline PotentialK make_constant_potential(int dim) {
  PotentialK K;
  K.form = PotentialForm::kConstantOne;
  K.dim = dim;
  return K;
}

inline PotentialK make_quadratic_bump(int dim, double r0, double c0) {
  if (!(r0 > 0)) throw InvalidConfigError("quadratic-bump: r0 must be positive");
  if (!(c0 > 0)) throw InvalidConfigError("quadratic-bump: c0 must be positive");
  if (!(c0 < std::exp(1.0)))
    throw InvalidConfigError("quadratic-bump: c0 must be below e to keep K positive");
  PotentialK K;
  K.form = PotentialForm::kQuadraticBump;
  K.dim = dim;
  K.r0 = r0;
  K.c0 = c0;
  return K;
}

namespace detail {
// Fritsch-Carlson monotone cubic slopes: secant-limited so the interpolant
// never overshoots the data on any interval.
inline std::vector<double> monotone_slopes(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = d[0];
  m[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i)
    m[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      m[i] = m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / d[i], b = m[i + 1] / d[i];
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double t = 3.0 / std::sqrt(s);
      m[i] = t * a * d[i];
      m[i + 1] = t * b * d[i];
    }
  }
  return m;
}
}  // namespace detail

inline PotentialK make_table_potential(int dim, std::vector<double> knots,
                                       std::vector<double> values) {
  if (knots.size() < 2 || knots.size() != values.size())
    throw InvalidConfigError("table potential: need at least two (r, K) samples");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    if (!(knots[i] < knots[i + 1]))
      throw InvalidConfigError("table potential: radii must be strictly increasing");
  if (knots.front() < 0) throw InvalidConfigError("table potential: radii must be nonnegative");
  for (double v : values)
    if (!(v > 0)) throw InvalidConfigError("table potential: K samples must be positive");
  PotentialK K;
  K.form = PotentialForm::kUserTable;
  K.dim = dim;
  K.slopes = detail::monotone_slopes(knots, values);
  K.knots = std::move(knots);
  K.values = std::move(values);
  return K;
}

/// Reads a two-column CSV (r, K); a non-numeric first line is treated as a header.
inline PotentialK load_table_potential(int dim, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfigError("table potential: cannot open " + path);
  std::vector<double> r, k;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b;
    if (ss >> a >> b) {
      r.push_back(a);
      k.push_back(b);
    } else if (!r.empty()) {
      throw InvalidConfigError("table potential: malformed row in " + path + ": " + line);
    }
  }
  return make_table_potential(dim, std::move(r), std::move(k));
}

/// Same profile evaluated at |y|/k (spatially stretched by k).
inline PotentialK rescaled(PotentialK K, double k) {
  if (!(k > 0)) throw InvalidConfigError("potential rescale factor must be positive");
  K.rescale *= k;
  return K;
}

namespace detail {
struct Deriv2 {
  double f = 0, d1 = 0, d2 = 0;
};

inline Deriv2 bump_eval(const PotentialK& K, double r) {
  const double s = r - K.r0;
  const double e = std::exp(-s * s);
  Deriv2 out;
  out.f = 1.0 - K.c0 * s * s * e;
  out.d1 = -K.c0 * e * (2 * s - 2 * s * s * s);
  out.d2 = -K.c0 * e * (2 - 10 * s * s + 4 * s * s * s * s);
  return out;
}

inline Deriv2 table_eval(const PotentialK& K, double r) {
  const auto& x = K.knots;
  Deriv2 out;
  if (r <= x.front()) {
    out.f = K.values.front();
    return out;  // clamped: zero slope outside the table
  }
  if (r >= x.back()) {
    out.f = K.values.back();
    return out;
  }
  const auto it = std::upper_bound(x.begin(), x.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double h = x[i + 1] - x[i], t = (r - x[i]) / h;
  const double y0 = K.values[i], y1 = K.values[i + 1];
  const double m0 = K.slopes[i] * h, m1 = K.slopes[i + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  out.f = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
          (t3 - t2) * m1;
  out.d1 = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 +
            (3 * t2 - 2 * t) * m1) /
           h;
  out.d2 = ((12 * t - 6) * y0 + (6 * t - 4) * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * m1) /
           (h * h);
  return out;
}

inline Deriv2 profile_eval(const PotentialK& K, double r_unscaled) {
  const double r = r_unscaled / K.rescale;
  Deriv2 out;
  switch (K.form) {
    case PotentialForm::kConstantOne:
      out.f = 1.0;
      break;
    case PotentialForm::kQuadraticBump:
      out = bump_eval(K, r);
      break;
    case PotentialForm::kUserTable:
      out = table_eval(K, r);
      break;
  }
  out.d1 /= K.rescale;
  out.d2 /= K.rescale * K.rescale;
  return out;
}
}  // namespace detail

inline double K_radial(const PotentialK& K, double r) { return detail::profile_eval(K, r).f; }
inline double K_radial_d1(const PotentialK& K, double r) { return detail::profile_eval(K, r).d1; }
inline double K_radial_d2(const PotentialK& K, double r) { return detail::profile_eval(K, r).d2; }

inline double K_value(const PotentialK& K, const Point& y) { return K_radial(K, norm(y)); }

/// Gradient of K(|y|); at the origin this exists only when K'(0) = 0.
inline Point K_gradient(const PotentialK& K, const Point& y) {
  const double r = norm(y);
  if (r == 0.0) {
    if (std::abs(K_radial_d1(K, 0.0)) > 0)
      throw std::domain_error("K_gradient: radial profile has a corner at the origin");
    return Point(y.dim);
  }
  return (K_radial_d1(K, r) / r) * y;
}

/// Radial Laplacian K'' + (N-1) K'/r, with the r -> 0 limit N*K''(0) when K'(0)=0.
inline double K_laplacian(const PotentialK& K, double r) {
  const auto d = detail::profile_eval(K, r);
  if (r == 0.0) {
    if (std::abs(d.d1) > 0)
      throw std::domain_error("K_laplacian: radial profile has a corner at the origin");
    return K.dim * d.d2;
  }
  return d.d2 + (K.dim - 1) * d.d1 / r;
}

/// Lower bound of K over [0, rmax] by dense sampling (validation helper).
inline double K_min_on(const PotentialK& K, double rmax, int samples = 4096) {
  double lo = K_radial(K, 0.0);
  for (int i = 1; i <= samples; ++i) lo = std::min(lo, K_radial(K, rmax * i / samples));
  return lo;
}

}  // namespace multibump
