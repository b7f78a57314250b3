#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace reconnect2d {

using Point = std::complex<double>;
using Polygon = std::vector<Point>;

inline double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Signed area, positive for counterclockwise vertex order.
inline double shoelace_area(const Polygon& p) {
  double s = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i) s += cross(p[i], p[(i + 1) % n]);
  return 0.5 * s;
}

inline void require_polygon(const Polygon& p) {
  if (p.size() < 3) throw GeometryError("polygon: fewer than 3 vertices");
  if (!(std::abs(shoelace_area(p)) > 0.0)) throw GeometryError("polygon: zero area");
}

// Crossing-number test; points exactly on an edge count as whichever side the
// half-open rule assigns.
inline bool point_in_polygon(Point q, const Polygon& p) {
  bool inside = false;
  for (std::size_t i = 0, n = p.size(), j = n - 1; i < n; j = i++) {
    const Point a = p[i], b = p[j];
    if ((a.imag() > q.imag()) != (b.imag() > q.imag())) {
      const double x = a.real() + (q.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (q.real() < x) inside = !inside;
    }
  }
  return inside;
}

// Parameter s in [0, 1] along ab where ab meets cd, if the open segments cross.
inline bool segment_crossing(Point a, Point b, Point c, Point d, double& s) {
  const Point r = b - a, q = d - c;
  const double den = cross(r, q);
  if (den == 0.0) return false;
  const double sa = cross(c - a, q) / den;
  const double sc = cross(c - a, r) / den;
  if (sa < 0.0 || sa > 1.0 || sc < 0.0 || sc > 1.0) return false;
  s = sa;
  return true;
}

struct BoundingBox {
  double x0, x1, y0, y1;
  bool meets(const BoundingBox& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
};

inline BoundingBox bounding_box(Point a, Point b) {
  return {std::min(a.real(), b.real()), std::max(a.real(), b.real()), std::min(a.imag(), b.imag()),
          std::max(a.imag(), b.imag())};
}

inline BoundingBox bounding_box(const Polygon& p) {
  BoundingBox bb{p[0].real(), p[0].real(), p[0].imag(), p[0].imag()};
  for (auto z : p) {
    bb.x0 = std::min(bb.x0, z.real());
    bb.x1 = std::max(bb.x1, z.real());
    bb.y0 = std::min(bb.y0, z.imag());
    bb.y1 = std::max(bb.y1, z.imag());
  }
  return bb;
}

namespace detail {

inline double segment_distance(Point p, Point u, Point v) {
  const Point e = v - u;
  const double l2 = std::norm(e);
  const double s = l2 > 0.0 ? std::clamp(std::real(std::conj(e) * (p - u)) / l2, 0.0, 1.0) : 0.0;
  return std::abs(p - (u + s * e));
}

inline bool on_boundary(Point z, const Polygon& q, double tol) {
  for (std::size_t j = 0, m = q.size(); j < m; ++j)
    if (segment_distance(z, q[j], q[(j + 1) % m]) <= tol) return true;
  return false;
}

// Green's-theorem contribution of the parts of p's boundary lying inside q.
// Edges are split at every crossing with q; each piece is classified by its
// midpoint. Pieces on q's boundary count only when `keep_shared` is set, so a
// shared stretch of boundary enters once. Returns the number of crossings.
inline std::size_t boundary_inside(const Polygon& p, const Polygon& q, bool keep_shared, double& twice_area) {
  std::size_t crossings = 0;
  std::vector<double> cuts;
  const BoundingBox qb = bounding_box(q);
  const double tol = 1e-12 * std::max(qb.x1 - qb.x0, qb.y1 - qb.y0);
  for (std::size_t i = 0, n = p.size(); i < n; ++i) {
    const Point a = p[i], b = p[(i + 1) % n];
    const BoundingBox eb = bounding_box(a, b);
    cuts.assign({0.0, 1.0});
    if (eb.meets(qb)) {
      for (std::size_t j = 0, m = q.size(); j < m; ++j) {
        const Point c = q[j], d = q[(j + 1) % m];
        if (!eb.meets(bounding_box(c, d))) continue;
        double s;
        if (segment_crossing(a, b, c, d, s)) {
          cuts.push_back(s);
          ++crossings;
        }
      }
      std::sort(cuts.begin(), cuts.end());
    }
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (cuts[k + 1] - cuts[k] <= 0.0) continue;
      const Point u = a + cuts[k] * (b - a), v = a + cuts[k + 1] * (b - a);
      const Point mid = 0.5 * (u + v);
      const bool in = eb.meets(qb) && on_boundary(mid, q, tol) ? keep_shared : point_in_polygon(mid, q);
      if (in) twice_area += cross(u, v);
    }
  }
  return crossings;
}

}  // namespace detail

// Area of the intersection of two simple, counterclockwise polygons. The
// boundary of the intersection is made of the pieces of each boundary lying
// inside the other polygon.
inline double intersection_area(const Polygon& a, const Polygon& b, std::size_t* crossings = nullptr) {
  require_polygon(a);
  require_polygon(b);
  double twice = 0.0;
  std::size_t c = detail::boundary_inside(a, b, true, twice);
  detail::boundary_inside(b, a, false, twice);
  if (crossings) *crossings = c;
  return std::max(0.0, 0.5 * twice);
}

inline double min_distance(const Polygon& a, const Polygon& b) {
  const auto seg_dist = detail::segment_distance;
  double m = INFINITY;
  for (auto p : a)
    for (std::size_t j = 0; j < b.size(); ++j) m = std::min(m, seg_dist(p, b[j], b[(j + 1) % b.size()]));
  for (auto p : b)
    for (std::size_t j = 0; j < a.size(); ++j) m = std::min(m, seg_dist(p, a[j], a[(j + 1) % a.size()]));
  return m;
}

// True if two non-adjacent edges of p cross.
inline bool self_intersects(const Polygon& p) {
  const std::size_t n = p.size();
  std::vector<BoundingBox> boxes(n);
  for (std::size_t i = 0; i < n; ++i) boxes[i] = bounding_box(p[i], p[(i + 1) % n]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (!boxes[i].meets(boxes[j])) continue;
      double s;
      if (segment_crossing(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n], s)) return true;
    }
  return false;
}

// Area, centroid and central second moments of a simple polygon.
struct PolygonMoments {
  double area = 0.0;
  Point centroid;
  double ixx = 0.0, iyy = 0.0, ixy = 0.0;  // int x^2, int y^2, int xy about the centroid
};

inline PolygonMoments polygon_moments(const Polygon& p) {
  require_polygon(p);
  double a = 0.0, cx = 0.0, cy = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0, n = p.size(); i < n; ++i) {
    const double x0 = p[i].real(), y0 = p[i].imag();
    const double x1 = p[(i + 1) % n].real(), y1 = p[(i + 1) % n].imag();
    const double c = x0 * y1 - x1 * y0;
    a += c;
    cx += (x0 + x1) * c;
    cy += (y0 + y1) * c;
    xx += (x0 * x0 + x0 * x1 + x1 * x1) * c;
    yy += (y0 * y0 + y0 * y1 + y1 * y1) * c;
    xy += (x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * c;
  }
  PolygonMoments m;
  m.area = 0.5 * a;
  m.centroid = {cx / (3.0 * a), cy / (3.0 * a)};
  m.ixx = xx / 12.0 - m.area * m.centroid.real() * m.centroid.real();
  m.iyy = yy / 12.0 - m.area * m.centroid.imag() * m.centroid.imag();
  m.ixy = xy / 24.0 - m.area * m.centroid.real() * m.centroid.imag();
  return m;
}

// Ellipse with the same area, centroid and second moments as the polygon.
struct EllipseFit {
  Point center;
  double major = 0.0, minor = 0.0;
  double angle = 0.0;  // of the major axis, in (-pi/2, pi/2]

  // Radial distance from the fitted ellipse, max over vertices.
  double residual(const Polygon& p) const {
    double r = 0.0;
    const Point rot = std::polar(1.0, -angle);
    for (auto z : p) {
      const Point w = (z - center) * rot;
      const double th = std::arg(w);
      const double c = std::cos(th), s = std::sin(th);
      const double re = major * minor / std::sqrt(minor * minor * c * c + major * major * s * s);
      r = std::max(r, std::abs(std::abs(w) - re));
    }
    return r;
  }
};

inline EllipseFit fit_ellipse(const Polygon& p) {
  const auto m = polygon_moments(p);
  const double tr = 0.5 * (m.ixx + m.iyy);
  const double dif = 0.5 * (m.ixx - m.iyy);
  const double root = std::hypot(dif, m.ixy);
  const double l1 = tr + root, l2 = tr - root;
  EllipseFit e;
  e.center = m.centroid;
  e.major = 2.0 * std::sqrt(l1 / std::abs(m.area));
  e.minor = 2.0 * std::sqrt(std::max(l2, 0.0) / std::abs(m.area));
  e.angle = 0.5 * std::atan2(2.0 * m.ixy, m.ixx - m.iyy);
  return e;
}

}  // namespace reconnect2d
