#pragma once

// Planar convex hulls for test oracles, independent of the SDP code.

#include <algorithm>
#include <complex>
#include <limits>
#include <vector>

namespace oracle {

using Point = std::complex<double>;

inline double cross(Point o, Point a, Point b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

/// Hull vertices in counter-clockwise order (monotone chain), collinear points dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts, double eps = 1e-12) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  if (pts.size() < 3) return pts;
  std::vector<Point> h(2 * pts.size());
  std::size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= eps) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= eps) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

inline bool is_vertex(const std::vector<Point>& hull, Point p, double eps = 1e-9) {
  for (const Point& v : hull)
    if (std::abs(v - p) < eps) return true;
  return false;
}

inline bool contains(const std::vector<Point>& hull, Point p, double eps = 1e-12) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i)
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < -eps) return false;
  return true;
}

/// max over the hull of Re(conj(dir) z).
inline double support(const std::vector<Point>& hull, Point dir) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Point& v : hull) best = std::max(best, (std::conj(dir) * v).real());
  return best;
}

}  // namespace oracle
