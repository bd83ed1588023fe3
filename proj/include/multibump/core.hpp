#pragma once

// Shared small-vector type, dimensional constants and numeric helpers for the
// multibump library.  Ambient dimensions are small (5 <= N <= 9), so points are
// fixed-capacity stack arrays carrying their runtime dimension.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace multibump {

inline constexpr int kMaxDim = 9;
inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Errors

/// Bad user input: dimensions, tolerances, geometry, config files.
class InvalidConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A declared-divergent or non-integrable request.
class DivergentIntegralError : public InvalidConfigError {
 public:
  using InvalidConfigError::InvalidConfigError;
};

struct IntegralResult;  // fwd

/// Tolerance not reached within the subdivision budget; carries the best value.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_value, double best_error)
      : std::runtime_error(what), value(best_value), error(best_error) {}
  double value;
  double error;
};

/// Root/critical-point searches that leave their admissible window.
class BoundaryHitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Point

struct Point {
  std::array<double, kMaxDim> v{};
  int dim = 0;

  Point() = default;
  explicit Point(int n) : dim(n) {
    if (n < 0 || n > kMaxDim) throw InvalidConfigError("Point: dimension out of range");
  }
  Point(std::initializer_list<double> xs) {
    if (static_cast<int>(xs.size()) > kMaxDim)
      throw InvalidConfigError("Point: dimension out of range");
    dim = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) v[i++] = x;
  }

  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim; ++i) v[i] += o.v[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim; ++i) v[i] -= o.v[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim; ++i) v[i] *= s;
    return *this;
  }
};

inline Point operator+(Point a, const Point& b) { return a += b; }
inline Point operator-(Point a, const Point& b) { return a -= b; }
inline Point operator*(double s, Point a) { return a *= s; }
inline Point operator*(Point a, double s) { return a *= s; }

inline double dot(const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < a.dim; ++i) s += a.v[i] * b.v[i];
  return s;
}
inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }
inline double dist2(const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < a.dim; ++i) {
    const double d = a.v[i] - b.v[i];
    s += d * d;
  }
  return s;
}
inline double dist(const Point& a, const Point& b) { return std::sqrt(dist2(a, b)); }

inline Point unit_vector(int axis, int dim) {
  Point e(dim);
  e[axis] = 1.0;
  return e;
}

inline Point normalized(const Point& a) {
  const double n = norm(a);
  if (!(n > 0)) throw InvalidConfigError("normalized: zero vector");
  return (1.0 / n) * a;
}

// ---------------------------------------------------------------------------
// Scalar fields
//
// value is mandatory; gradient/laplacian may be empty, in which case callers
// fall back to central finite differences.  decay_exponent declares p with
// |f(y)| <= C |y|^-p for large |y| (0 = unknown / no decay claimed).

using FieldFn = std::function<double(const Point&)>;
using VectorFieldFn = std::function<Point(const Point&)>;

struct ScalarField {
  FieldFn value;
  VectorFieldFn gradient;   // optional
  FieldFn laplacian;        // optional
  double decay_exponent = 0.0;
};

inline Point fd_gradient(const FieldFn& f, const Point& y, double h = 1e-5) {
  Point g(y.dim);
  Point z = y;
  for (int i = 0; i < y.dim; ++i) {
    const double yi = y[i];
    z[i] = yi + h;
    const double fp = f(z);
    z[i] = yi - h;
    const double fm = f(z);
    z[i] = yi;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

inline double fd_laplacian(const FieldFn& f, const Point& y, double h = 1e-4) {
  const double f0 = f(y);
  double s = 0;
  Point z = y;
  for (int i = 0; i < y.dim; ++i) {
    const double yi = y[i];
    z[i] = yi + h;
    const double fp = f(z);
    z[i] = yi - h;
    const double fm = f(z);
    z[i] = yi;
    s += fp - 2 * f0 + fm;
  }
  return s / (h * h);
}

inline Point field_gradient(const ScalarField& f, const Point& y) {
  return f.gradient ? f.gradient(y) : fd_gradient(f.value, y);
}
inline double field_laplacian(const ScalarField& f, const Point& y) {
  return f.laplacian ? f.laplacian(y) : fd_laplacian(f.value, y);
}

// ---------------------------------------------------------------------------
// Special values

/// Surface area of the unit sphere S^m embedded in R^{m+1}.
/// m = 0 gives 2 (two points), m = 1 gives 2*pi, m = 3 gives 2*pi^2.
inline double sphere_area(int m) {
  if (m < 0) throw InvalidConfigError("sphere_area: negative sphere dimension");
  return 2.0 * std::exp(0.5 * (m + 1) * std::log(kPi) - std::lgamma(0.5 * (m + 1)));
}

/// Log-gamma based Euler beta.
inline double beta_function(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

/// Critical Sobolev exponent 2N/(N-2).
inline double critical_exponent(int dim) {
  if (dim <= 2) throw InvalidConfigError("critical_exponent: dimension must exceed 2");
  return 2.0 * dim / (dim - 2.0);
}

/// Signed power |x|^{p-1} x, the odd extension used for u^{2^*-1} on sign-changing inputs.
inline double odd_power(double x, double p) {
  if (x == 0.0) return 0.0;
  return x > 0 ? std::pow(x, p) : -std::pow(-x, p);
}

// ---------------------------------------------------------------------------
// Least-squares line fit
//
// Used for asymptotic exponent extraction: fit log(y) against log(x) and read
// the decay or growth rate off the slope.

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 1;  // coefficient of determination
};

/// Ordinary least squares for y ~ slope * x + intercept.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw InvalidConfigError("fit_line: need two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0) throw InvalidConfigError("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy > 0) {
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (f.slope * x[i] + f.intercept);
      ss_res += r * r;
    }
    f.r_squared = 1.0 - ss_res / syy;
  }
  return f;
}

/// Least squares on (log x, log y); all entries must be positive.
inline LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0)) throw InvalidConfigError("fit_loglog: abscissae must be positive");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0)) throw InvalidConfigError("fit_loglog: ordinates must be positive");
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

/// Eigenvalues of a dense symmetric matrix (row-major, n x n) by cyclic
/// Jacobi rotations, returned in ascending order.  Intended for the small
/// Gram systems assembled elsewhere; cost is O(n^3) per sweep.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n)
    throw InvalidConfigError("symmetric_eigenvalues: matrix size mismatch");
  auto at = [&a, n](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  double scale = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(at(i, j)));
  if (scale == 0) return std::vector<double>(n, 0.0);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(at(i, j)));
    if (off <= 1e-14 * scale) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) <= 1e-16 * scale) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = at(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

// ---------------------------------------------------------------------------
// Deterministic reduction
//
// Pairwise (tree) summation over a fixed index order.  Used for all quadrature
// cell reductions so results are bit-identical for identical inputs.

inline double pairwise_sum(const double* xs, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += xs[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs, half) + pairwise_sum(xs + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& xs) {
  return pairwise_sum(xs.data(), xs.size());
}

// ---------------------------------------------------------------------------
// Small deterministic RNG (splitmix64) for seeded sampling fallbacks.

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97f4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform in [0,1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller (uses two uniforms).
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace multibump
