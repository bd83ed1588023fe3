#pragma once

// Polygonal bubble configurations, their finite symmetry groups, symmetrized
// averages of fields and point masses, and angular sector (cell) membership.
//
// Group elements are stored combinatorially (rotation index, in-plane
// reflection flag, sign flips on the remaining axes) and composed by index
// arithmetic, so composition and inverses are exact; only the final action on
// coordinates evaluates trigonometric functions.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "multibump/core.hpp"

namespace multibump {

// ---------------------------------------------------------------------------
// Polygon configurations

struct CoordPlane {
  int first = 0;
  int second = 1;
};

struct PolygonConfig {
  int dim = 0;          // ambient dimension N
  CoordPlane plane;     // plane carrying the regular polygon
  int count = 0;        // number of vertices/bubbles
  double radius = 0.0;  // ring radius
  double scale = 0.0;   // bubble concentration parameter
};

inline void validate(const PolygonConfig& cfg) {
  if (cfg.dim < 5 || cfg.dim > kMaxDim)
    throw InvalidConfigError("PolygonConfig: dimension must be in [5, 9]");
  if (cfg.count < 1) throw InvalidConfigError("PolygonConfig: count must be >= 1");
  if (!(cfg.radius > 0)) throw InvalidConfigError("PolygonConfig: radius must be positive");
  if (!(cfg.scale > 0)) throw InvalidConfigError("PolygonConfig: scale must be positive");
  if (cfg.plane.first == cfg.plane.second || cfg.plane.first < 0 || cfg.plane.second < 0 ||
      cfg.plane.first >= cfg.dim || cfg.plane.second >= cfg.dim)
    throw InvalidConfigError("PolygonConfig: plane axes must be distinct and inside [0, dim)");
}

/// Vertices of the regular polygon: the j-th point sits at angle 2*pi*j/count
/// in the configured plane, the first one on the positive `plane.first` axis.
inline std::vector<Point> build_polygon(const PolygonConfig& cfg) {
  validate(cfg);
  std::vector<Point> pts;
  pts.reserve(cfg.count);
  for (int j = 0; j < cfg.count; ++j) {
    const double th = 2.0 * kPi * j / cfg.count;
    Point p(cfg.dim);
    p[cfg.plane.first] = cfg.radius * std::cos(th);
    p[cfg.plane.second] = cfg.radius * std::sin(th);
    pts.push_back(p);
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Symmetry groups

enum class SymmetryClass {
  kRing,       // dihedral in one plane + sign flips on the other axes
  kDoubleRing  // two orthogonal dihedral planes + sign flips on the rest
};

struct SymmetryGroup {
  int dim = 0;
  SymmetryClass cls = SymmetryClass::kRing;
  CoordPlane plane;     // primary rotation plane
  int fold = 1;         // rotation order in the primary plane
  CoordPlane plane2;    // secondary plane (kDoubleRing only)
  int fold2 = 1;        // rotation order in the secondary plane
  std::vector<int> sign_axes;  // non-plane axes carrying enforced evenness
};

/// Ring group: `fold`-fold rotations and the in-plane reflection in `plane`,
/// plus sign flips on every axis outside the plane.
inline SymmetryGroup make_ring_group(int dim, CoordPlane plane, int fold) {
  SymmetryGroup g;
  g.dim = dim;
  g.cls = SymmetryClass::kRing;
  g.plane = plane;
  g.fold = fold;
  for (int i = 0; i < dim; ++i)
    if (i != plane.first && i != plane.second) g.sign_axes.push_back(i);
  if (fold < 1) throw InvalidConfigError("SymmetryGroup: fold must be >= 1");
  if (plane.first == plane.second || plane.first < 0 || plane.second >= dim || plane.first >= dim || plane.second < 0)
    throw InvalidConfigError("SymmetryGroup: invalid rotation plane");
  return g;
}

/// Double-ring group: dihedral symmetry in two orthogonal planes plus sign
/// flips on the remaining axes.  Requires even folds, since evenness across a
/// plane's own axes is delivered by the half-turn combined with the in-plane
/// reflection.
inline SymmetryGroup make_double_ring_group(int dim, CoordPlane plane, int fold,
                                            CoordPlane plane2, int fold2) {
  SymmetryGroup g = make_ring_group(dim, plane, fold);
  g.cls = SymmetryClass::kDoubleRing;
  g.plane2 = plane2;
  g.fold2 = fold2;
  if (plane2.first == plane2.second || plane2.first < 0 || plane2.second < 0 ||
      plane2.first >= dim || plane2.second >= dim)
    throw InvalidConfigError("SymmetryGroup: invalid secondary plane");
  if (plane2.first == plane.first || plane2.first == plane.second ||
      plane2.second == plane.first || plane2.second == plane.second)
    throw InvalidConfigError("SymmetryGroup: secondary plane must be orthogonal to the primary");
  if (fold % 2 != 0 || fold2 % 2 != 0)
    throw InvalidConfigError("SymmetryGroup: double-ring groups need even folds for full evenness");
  if (fold2 < 1) throw InvalidConfigError("SymmetryGroup: fold2 must be >= 1");
  g.sign_axes.clear();
  for (int i = 0; i < dim; ++i)
    if (i != plane.first && i != plane.second && i != plane2.first && i != plane2.second)
      g.sign_axes.push_back(i);
  return g;
}

struct GroupElement {
  int rot = 0;             // rotation index mod fold (primary plane)
  bool reflect = false;    // in-plane reflection (angle -> -angle) before rotating
  int rot2 = 0;            // secondary plane rotation index (kDoubleRing)
  bool reflect2 = false;   // secondary plane reflection
  std::uint32_t signs = 0; // bit i set => flip sign_axes[i]
};

/// Left action y -> g.y.
inline Point group_apply(const SymmetryGroup& g, const GroupElement& e, const Point& y) {
  Point z = y;
  {
    double a = y[g.plane.first], b = y[g.plane.second];
    if (e.reflect) b = -b;
    const double th = 2.0 * kPi * e.rot / g.fold;
    const double c = std::cos(th), s = std::sin(th);
    z[g.plane.first] = c * a - s * b;
    z[g.plane.second] = s * a + c * b;
  }
  if (g.cls == SymmetryClass::kDoubleRing) {
    double a = y[g.plane2.first], b = y[g.plane2.second];
    if (e.reflect2) b = -b;
    const double th = 2.0 * kPi * e.rot2 / g.fold2;
    const double c = std::cos(th), s = std::sin(th);
    z[g.plane2.first] = c * a - s * b;
    z[g.plane2.second] = s * a + c * b;
  }
  for (std::size_t i = 0; i < g.sign_axes.size(); ++i)
    if (e.signs & (1u << i)) z[g.sign_axes[i]] = -z[g.sign_axes[i]];
  return z;
}

inline int mod_pos(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

/// Composition a*b acting as (a*b).y = a.(b.y); exact index arithmetic.
inline GroupElement group_compose(const SymmetryGroup& g, const GroupElement& a,
                                  const GroupElement& b) {
  GroupElement c;
  // Dihedral composition: writing an element as R(rot) * F^reflect with
  // F R(j) = R(-j) F, we get (R(i) F^p)(R(j) F^q) = R(i + (p ? -j : j)) F^(p^q).
  c.rot = mod_pos(a.rot + (a.reflect ? -b.rot : b.rot), g.fold);
  c.reflect = a.reflect != b.reflect;
  if (g.cls == SymmetryClass::kDoubleRing) {
    c.rot2 = mod_pos(a.rot2 + (a.reflect2 ? -b.rot2 : b.rot2), g.fold2);
    c.reflect2 = a.reflect2 != b.reflect2;
  }
  c.signs = a.signs ^ b.signs;
  return c;
}

inline GroupElement group_inverse(const SymmetryGroup& g, const GroupElement& a) {
  GroupElement inv;
  inv.reflect = a.reflect;
  inv.rot = a.reflect ? a.rot : mod_pos(-a.rot, g.fold);
  if (g.cls == SymmetryClass::kDoubleRing) {
    inv.reflect2 = a.reflect2;
    inv.rot2 = a.reflect2 ? a.rot2 : mod_pos(-a.rot2, g.fold2);
  }
  inv.signs = a.signs;
  return inv;
}

inline std::vector<GroupElement> group_enumerate(const SymmetryGroup& g) {
  std::vector<GroupElement> out;
  const std::uint32_t nsigns = 1u << g.sign_axes.size();
  const int nrot2 = g.cls == SymmetryClass::kDoubleRing ? g.fold2 : 1;
  const int nref2 = g.cls == SymmetryClass::kDoubleRing ? 2 : 1;
  for (int r = 0; r < g.fold; ++r)
    for (int f = 0; f < 2; ++f)
      for (int r2 = 0; r2 < nrot2; ++r2)
        for (int f2 = 0; f2 < nref2; ++f2)
          for (std::uint32_t s = 0; s < nsigns; ++s) {
            GroupElement e;
            e.rot = r;
            e.reflect = f != 0;
            e.rot2 = r2;
            e.reflect2 = f2 != 0;
            e.signs = s;
            out.push_back(e);
          }
  return out;
}

// ---------------------------------------------------------------------------
// Symmetrized averages
//
// The display form averages a field first over the plane rotations and then
// over per-axis reflection pairs:
//     fbar(y) = (1/k) sum_j f(A_j y)
//     f*(y)   = (1/(N-1)) sum_{i=2..N} (fbar(y) + fbar(B_i y)) / 2
// where A_j rotates the primary plane and B_i flips coordinate i.  With
// `include_first_axis` the i-sum runs over all N axes with weight 1/N.
//
// The display form is linear and fixes every fully invariant field, but on
// arbitrary fields it is neither idempotent nor invariant under every group
// element (it mixes per-axis even parts and omits double flips);
// `group_average` below is the full invariant mean with all three properties.

namespace detail {
inline Point rotate_primary(const SymmetryGroup& g, int j, const Point& y) {
  Point z = y;
  const double th = 2.0 * kPi * j / g.fold;
  const double c = std::cos(th), s = std::sin(th);
  const double a = y[g.plane.first], b = y[g.plane.second];
  z[g.plane.first] = c * a - s * b;
  z[g.plane.second] = s * a + c * b;
  return z;
}
}  // namespace detail

inline FieldFn symmetrize(FieldFn f, const SymmetryGroup& g, bool include_first_axis = false) {
  return [f = std::move(f), g, include_first_axis](const Point& y) {
    const int N = g.dim;
    auto fbar = [&](const Point& z) {
      std::vector<double> vals(static_cast<std::size_t>(g.fold));
      for (int j = 0; j < g.fold; ++j) vals[j] = f(detail::rotate_primary(g, j, z));
      return pairwise_sum(vals) / g.fold;
    };
    const double fb = fbar(y);
    std::vector<double> terms;
    const int first_axis = include_first_axis ? 0 : 1;
    for (int i = first_axis; i < N; ++i) {
      Point flipped = y;
      flipped[i] = -flipped[i];
      terms.push_back(0.5 * (fb + fbar(flipped)));
    }
    return pairwise_sum(terms) / static_cast<double>(N - first_axis);
  };
}

/// Full group mean (1/|G|) sum_g f(g.y): invariant, linear, idempotent.
inline FieldFn group_average(FieldFn f, const SymmetryGroup& g) {
  auto elems = group_enumerate(g);
  return [f = std::move(f), g, elems = std::move(elems)](const Point& y) {
    std::vector<double> vals(elems.size());
    for (std::size_t i = 0; i < elems.size(); ++i) vals[i] = f(group_apply(g, elems[i], y));
    return pairwise_sum(vals) / static_cast<double>(elems.size());
  };
}

// ---------------------------------------------------------------------------
// Symmetrized point masses

struct WeightedPoint {
  Point x;
  double weight = 0.0;
};

/// Discrete orbit of the display-form average applied to a point mass at x.
/// Coinciding images are coalesced; weights sum to one.
inline std::vector<WeightedPoint> symmetrize_point(const Point& x, const SymmetryGroup& g,
                                                   bool include_first_axis = false,
                                                   double coalesce_tol = 1e-13) {
  std::vector<WeightedPoint> out;
  auto add = [&](const Point& p, double w) {
    for (auto& q : out) {
      if (dist(q.x, p) <= coalesce_tol * (1.0 + norm(p))) {
        q.weight += w;
        return;
      }
    }
    out.push_back({p, w});
  };
  const int N = g.dim;
  const int first_axis = include_first_axis ? 0 : 1;
  const double axis_w = 1.0 / (N - first_axis);
  for (int i = first_axis; i < N; ++i) {
    for (int j = 0; j < g.fold; ++j) {
      const Point aj = detail::rotate_primary(g, j, x);
      Point bi = aj;
      bi[i] = -bi[i];
      add(aj, 0.5 * axis_w / g.fold);
      add(bi, 0.5 * axis_w / g.fold);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Angular sector cells
//
// Cell j of a count-fold ring in a plane: points whose plane projection makes
// an angle within pi/count of the j-th vertex direction (closed inequality, so
// boundary points belong to both adjacent cells).  A vanishing projection is
// degenerate; by convention it is assigned to cell 0.

struct Cell {
  CoordPlane plane;
  int count = 0;
  int index = 0;  // 0-based sector index
};

inline bool cell_axis_degenerate(const Cell& cell, const Point& y) {
  const double a = y[cell.plane.first], b = y[cell.plane.second];
  return a == 0.0 && b == 0.0;
}

inline bool cell_contains(const Cell& cell, const Point& y) {
  if (cell.count < 1 || cell.index < 0 || cell.index >= cell.count)
    throw InvalidConfigError("Cell: index out of range");
  const double a = y[cell.plane.first], b = y[cell.plane.second];
  const double r = std::hypot(a, b);
  if (r == 0.0) return cell.index == 0;  // degenerate-axis convention
  const double th = 2.0 * kPi * cell.index / cell.count;
  const double cosang = (a * std::cos(th) + b * std::sin(th)) / r;
  return cosang >= std::cos(kPi / cell.count);
}

}  // namespace multibump
