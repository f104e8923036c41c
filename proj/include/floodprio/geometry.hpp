#pragma once

// Planar geometry in a projected metric coordinate system.
// Rings are stored open: the closing vertex is not repeated.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace floodprio {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double distance(Point a, Point b);

using Ring = std::vector<Point>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

struct Box {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Point p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  bool overlaps(const Box& o) const {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
};

Box bounds(std::span<const Point> pts);

// Positive for counter-clockwise rings.
double signed_area(std::span<const Point> ring);

// |outer| minus the sum of |hole|, independent of ring orientation.
double polygon_area(const Polygon& poly);

// Area centroid; falls back to the vertex mean for zero-area input.
Point polygon_centroid(const Polygon& poly);

// Distance below which a point counts as lying on an edge.
inline constexpr double kOnEdgeTolerance = 1e-7;

enum class Containment { Outside, Boundary, Inside };

Containment classify_point(Point p, std::span<const Point> ring);

// Closed-set test: boundary points (including hole boundaries) are contained.
bool contains_closed(const Polygon& poly, Point p);

// Closed segments, so touching and collinear overlap both count.
bool segments_intersect(Point a, Point b, Point c, Point d);

// Proper crossing only: the segments meet at a single point interior to both.
bool segments_cross(Point a, Point b, Point c, Point d);

// First pair of non-adjacent edges (by start index) that intersect, or two
// adjacent edges that fold back over each other. Empty for a simple ring.
std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(
    std::span<const Point> ring);

// Sutherland-Hodgman clip of an arbitrary simple ring against a convex
// counter-clockwise ring. The result may contain zero-width bridges; its
// signed area equals the signed area of the intersection.
Ring clip_to_convex(std::span<const Point> subject, std::span<const Point> convex_ccw);

// True if any point of the polyline lies in the closed polygon.
bool polyline_intersects(const Polygon& poly, std::span<const Point> polyline);

}  // namespace floodprio
