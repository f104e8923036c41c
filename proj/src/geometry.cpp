#include "floodprio/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace floodprio {

namespace {

// Distance-scaled orientation: signed distance of p from the line a->b.
double side(Point a, Point b, Point p) {
  const Point ab = b - a;
  const double len = std::hypot(ab.x, ab.y);
  if (len == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
  return cross(ab, p - a) / len;
}

int orientation(Point a, Point b, Point p) {
  const double s = side(a, b, p);
  if (s > kOnEdgeTolerance) return 1;
  if (s < -kOnEdgeTolerance) return -1;
  return 0;
}

bool within_box(Point a, Point b, Point p) {
  return p.x >= std::min(a.x, b.x) - kOnEdgeTolerance &&
         p.x <= std::max(a.x, b.x) + kOnEdgeTolerance &&
         p.y >= std::min(a.y, b.y) - kOnEdgeTolerance &&
         p.y <= std::max(a.y, b.y) + kOnEdgeTolerance;
}

bool on_segment(Point a, Point b, Point p) {
  return orientation(a, b, p) == 0 && within_box(a, b, p);
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Box bounds(std::span<const Point> pts) {
  Box box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Point& p : pts) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

double signed_area(std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  // Shoelace relative to the first vertex keeps large projected
  // coordinates from cancelling catastrophically.
  const Point o = ring[0];
  double twice = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    twice += cross(ring[i] - o, ring[i + 1] - o);
  }
  return 0.5 * twice;
}

double polygon_area(const Polygon& poly) {
  double area = std::abs(signed_area(poly.outer));
  for (const Ring& hole : poly.holes) area -= std::abs(signed_area(hole));
  return area;
}

Point polygon_centroid(const Polygon& poly) {
  double total = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  auto accumulate = [&](const Ring& ring, double sign) {
    const std::size_t n = ring.size();
    if (n < 3) return;
    const Point o = ring[0];
    const bool ccw = signed_area(ring) >= 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const Point a = ring[i] - o;
      const Point b = ring[i + 1] - o;
      const double tri = 0.5 * cross(a, b);
      // Orientation-normalised: every ring contributes with its |area| sign.
      const double oriented = ccw ? tri : -tri;
      total += sign * oriented;
      cx += sign * oriented * (o.x + (a.x + b.x) / 3.0);
      cy += sign * oriented * (o.y + (a.y + b.y) / 3.0);
    }
  };
  accumulate(poly.outer, 1.0);
  for (const Ring& hole : poly.holes) accumulate(hole, -1.0);
  if (std::abs(total) > 0.0) return {cx / total, cy / total};

  Point mean{};
  for (const Point& p : poly.outer) mean = mean + p;
  const double n = poly.outer.empty() ? 1.0 : static_cast<double>(poly.outer.size());
  return {mean.x / n, mean.y / n};
}

Containment classify_point(Point p, std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return Containment::Outside;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = ring[j];
    const Point b = ring[i];
    if (on_segment(a, b, p)) return Containment::Boundary;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_at = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside ? Containment::Inside : Containment::Outside;
}

bool contains_closed(const Polygon& poly, Point p) {
  if (classify_point(p, poly.outer) == Containment::Outside) return false;
  for (const Ring& hole : poly.holes) {
    if (classify_point(p, hole) == Containment::Inside) return false;
  }
  return true;
}

bool segments_intersect(Point a, Point b, Point c, Point d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && within_box(a, b, c)) return true;
  if (o2 == 0 && within_box(a, b, d)) return true;
  if (o3 == 0 && within_box(c, d, a)) return true;
  if (o4 == 0 && within_box(c, d, b)) return true;
  return false;
}

bool segments_cross(Point a, Point b, Point c, Point d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(
    std::span<const Point> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return std::pair<std::size_t, std::size_t>{0, 0};
  auto edge = [&](std::size_t i) {
    return std::pair<Point, Point>{ring[i], ring[(i + 1) % n]};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = edge(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto [c, d] = edge(j);
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Shared vertex is fine; a fold-back along the same line is not.
        const Point shared = (j == i + 1) ? b : a;
        const Point other_i = (j == i + 1) ? a : b;
        const Point other_j = (j == i + 1) ? d : c;
        if (orientation(other_i, shared, other_j) == 0 &&
            dot(other_i - shared, other_j - shared) > 0.0) {
          return std::pair{i, j};
        }
        continue;
      }
      if (segments_intersect(a, b, c, d)) return std::pair{i, j};
    }
  }
  return std::nullopt;
}

Ring clip_to_convex(std::span<const Point> subject, std::span<const Point> convex_ccw) {
  Ring output(subject.begin(), subject.end());
  const std::size_t m = convex_ccw.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Point c1 = convex_ccw[e];
    const Point c2 = convex_ccw[(e + 1) % m];
    const Point dir = c2 - c1;
    auto inside = [&](Point p) { return cross(dir, p - c1) >= 0.0; };
    auto crossing = [&](Point p, Point q) {
      const double dp = cross(dir, p - c1);
      const double dq = cross(dir, q - c1);
      const double t = dp / (dp - dq);
      return p + t * (q - p);
    };

    Ring input;
    input.swap(output);
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point cur = input[i];
      const Point prev = input[(i + n - 1) % n];
      const bool cur_in = inside(cur);
      const bool prev_in = inside(prev);
      if (cur_in) {
        if (!prev_in) output.push_back(crossing(prev, cur));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(crossing(prev, cur));
      }
    }
  }
  return output;
}

bool polyline_intersects(const Polygon& poly, std::span<const Point> polyline) {
  for (const Point& p : polyline) {
    if (contains_closed(poly, p)) return true;
  }
  auto hits_ring = [&](const Ring& ring) {
    const std::size_t n = ring.size();
    for (std::size_t s = 0; s + 1 < polyline.size(); ++s) {
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (segments_intersect(polyline[s], polyline[s + 1], ring[j], ring[i])) return true;
      }
    }
    return false;
  };
  if (hits_ring(poly.outer)) return true;
  for (const Ring& hole : poly.holes) {
    if (hits_ring(hole)) return true;
  }
  return false;
}

}  // namespace floodprio
