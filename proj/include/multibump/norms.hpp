#pragma once

// Weighted supremum norms for multi-bump analysis.
//
// The weights are sums of algebraically decaying envelopes anchored at the
// bubble centers:
//   star:        sum_j  mu^{(N-2)/2} (1 + mu |y - c_j|)^{-((N-2)/2 + tau)}
//   double star: sum_j  mu^{(N+2)/2} (1 + mu |y - c_j|)^{-((N+2)/2 + tau)}
// The star weight measures functions at the bubbles' own decay rate, the
// double-star weight measures right-hand sides (two powers stronger).
//
// weighted_sup_norm returns a certified LOWER bound of sup |f| / w obtained
// from a deterministic multi-start direct search (seeded low-discrepancy
// starts + Nelder-Mead refinement).  It never overstates the norm; the
// `refinement_converged` flag reports whether the local searches settled.

#include <algorithm>
#include <cmath>
#include <vector>

#include "multibump/core.hpp"

namespace multibump {

enum class WeightKind { kStar, kDoubleStar };

struct WeightSpec {
  WeightKind kind = WeightKind::kStar;
  int dim = 0;
  std::vector<Point> centers;
  double scale = 1.0;  // concentration parameter mu
  double tau = 0.0;    // extra decay beyond the base rate
};

/// Base-rate exponent tau used by the inner (contraction-map) estimates.
inline double tau_inner(int dim) { return double(dim - 4) / (dim - 2); }

/// Slightly strengthened tau used by the outer residual norms.
inline double tau_outer(int dim, double sigma_bar = 0.01) {
  return tau_inner(dim) + sigma_bar;
}

inline void validate(const WeightSpec& w) {
  if (w.dim < 5 || w.dim > kMaxDim)
    throw InvalidConfigError("WeightSpec: dimension must be in [5, 9]");
  if (w.centers.empty()) throw InvalidConfigError("WeightSpec: needs at least one center");
  if (!(w.scale > 0)) throw InvalidConfigError("WeightSpec: scale must be positive");
  if (!(w.tau > 0)) throw InvalidConfigError("WeightSpec: tau must be positive");
  for (const Point& c : w.centers)
    if (c.dim != w.dim) throw InvalidConfigError("WeightSpec: center dimension mismatch");
}

inline double weight_value(const WeightSpec& w, const Point& y) {
  const double base = w.kind == WeightKind::kStar ? 0.5 * (w.dim - 2) : 0.5 * (w.dim + 2);
  const double amp = std::pow(w.scale, base);
  double s = 0;
  for (const Point& c : w.centers)
    s += amp * std::pow(1.0 + w.scale * dist(y, c), -(base + w.tau));
  return s;
}

// ---------------------------------------------------------------------------
// Certified-lower-bound weighted sup norm

struct SupNormOptions {
  int random_starts = 64;       // low-discrepancy starts beyond structural ones
  long max_iterations = 400;    // Nelder-Mead iterations per start
  double xtol = 1e-7;           // simplex size stop
  double ftol = 1e-10;          // objective spread stop
  double search_radius = 0;     // 0 = derived from the configuration
  std::uint64_t seed = 0x5deece66dull;
};

struct SupNormResult {
  double value = 0;             // lower bound of sup |f|/w
  Point arg;                    // where it was attained
  bool refinement_converged = false;
  long evaluations = 0;
};

namespace detail {

/// Deterministic Nelder-Mead maximization of `ratio`; returns best (x, f(x)).
inline std::pair<Point, double> nelder_mead_max(const std::function<double(const Point&)>& ratio,
                                                const Point& start, double step,
                                                const SupNormOptions& opts, long& evals,
                                                bool& converged) {
  const int n = start.dim;
  struct Vertex {
    Point x;
    double f = 0;
  };
  std::vector<Vertex> simplex(n + 1);
  simplex[0].x = start;
  simplex[0].f = ratio(start);
  ++evals;
  for (int i = 0; i < n; ++i) {
    Point p = start;
    p[i] += step;
    simplex[i + 1].x = p;
    simplex[i + 1].f = ratio(p);
    ++evals;
  }
  auto by_worse = [](const Vertex& a, const Vertex& b) { return a.f > b.f; };  // descending
  converged = false;
  for (long iter = 0; iter < opts.max_iterations; ++iter) {
    std::stable_sort(simplex.begin(), simplex.end(), by_worse);
    // stopping: simplex diameter and objective spread
    double diam = 0;
    for (int i = 1; i <= n; ++i) diam = std::max(diam, dist(simplex[0].x, simplex[i].x));
    if (diam < opts.xtol || std::abs(simplex[0].f - simplex[n].f) < opts.ftol) {
      converged = true;
      break;
    }
    Point centroid(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i].x;
    centroid *= 1.0 / n;
    const Vertex& worst = simplex[n];
    auto eval = [&](const Point& p) {
      ++evals;
      return ratio(p);
    };
    const Point xr = centroid + (centroid - worst.x);
    const double fr = eval(xr);
    if (fr > simplex[0].f) {
      const Point xe = centroid + 2.0 * (centroid - worst.x);
      const double fe = eval(xe);
      if (fe > fr) {
        simplex[n] = {xe, fe};
      } else {
        simplex[n] = {xr, fr};
      }
    } else if (fr > simplex[n - 1].f) {
      simplex[n] = {xr, fr};
    } else {
      const Point xc = centroid + 0.5 * (worst.x - centroid);
      const double fc = eval(xc);
      if (fc > worst.f) {
        simplex[n] = {xc, fc};
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[i].x = simplex[0].x + 0.5 * (simplex[i].x - simplex[0].x);
          simplex[i].f = eval(simplex[i].x);
        }
      }
    }
  }
  std::stable_sort(simplex.begin(), simplex.end(), by_worse);
  return {simplex[0].x, simplex[0].f};
}

}  // namespace detail

/// Lower bound of sup_y |f(y)| / w(y) by deterministic multi-start search.
inline SupNormResult weighted_sup_norm(const FieldFn& f, const WeightSpec& w,
                                       const SupNormOptions& opts = {}) {
  validate(w);
  const int n = w.dim;
  auto ratio = [&](const Point& y) { return std::abs(f(y)) / weight_value(w, y); };

  // structural starts: the centers, pairwise midpoints, near-center offsets
  std::vector<Point> starts;
  double config_radius = 1.0 / w.scale;
  for (const Point& c : w.centers) {
    starts.push_back(c);
    config_radius = std::max(config_radius, norm(c) + 1.0 / w.scale);
  }
  for (std::size_t i = 0; i < w.centers.size(); ++i)
    for (std::size_t j = i + 1; j < w.centers.size(); ++j)
      starts.push_back(0.5 * (w.centers[i] + w.centers[j]));
  for (const Point& c : w.centers)
    for (int axis = 0; axis < n; ++axis) {
      starts.push_back(c + (1.0 / w.scale) * unit_vector(axis, n));
      starts.push_back(c - (1.0 / w.scale) * unit_vector(axis, n));
    }
  starts.push_back(Point(n));
  const double R = opts.search_radius > 0 ? opts.search_radius : 4.0 * config_radius;
  SplitMix64 rng(opts.seed);
  for (int s = 0; s < opts.random_starts; ++s) {
    Point p(n);
    for (int i = 0; i < n; ++i) p[i] = R * (2.0 * rng.uniform() - 1.0);
    starts.push_back(p);
  }

  SupNormResult out;
  out.arg = Point(n);
  bool all_converged = true;
  // coarse scan first: keep the most promising starts for refinement
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const double v = ratio(starts[i]);
    ++out.evaluations;
    ranked.push_back({v, i});
    if (v > out.value) {
      out.value = v;
      out.arg = starts[i];
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const std::size_t keep = std::min<std::size_t>(ranked.size(), 12);
  for (std::size_t r = 0; r < keep; ++r) {
    bool converged = false;
    const double step = 0.25 / w.scale;
    auto [x, v] =
        detail::nelder_mead_max(ratio, starts[ranked[r].second], step, opts, out.evaluations,
                                converged);
    all_converged = all_converged && converged;
    if (v > out.value) {
      out.value = v;
      out.arg = x;
    }
  }
  out.refinement_converged = all_converged;
  return out;
}

}  // namespace multibump
