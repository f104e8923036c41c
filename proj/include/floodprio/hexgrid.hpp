#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "floodprio/geometry.hpp"

namespace floodprio {

// Axial coordinates of a pointy-top hexagon. Ordering is lexicographic (q, r)
// and doubles as the tie-break for points on shared edges.
struct Axial {
  int q = 0;
  int r = 0;

  friend auto operator<=>(const Axial&, const Axial&) = default;
};

struct TileId {
  std::uint32_t value = 0;

  friend auto operator<=>(const TileId&, const TileId&) = default;
};

std::string to_string(TileId id);

struct Tile {
  TileId id;
  Axial axial;
  Ring polygon;  // 6 vertices, counter-clockwise
  Point centroid;
};

// Uniform pointy-top hexagon partition of a rectangular study area.
//
// max_width is the corner-to-corner diameter, so each tile has area
// (3*sqrt(3)/8) * max_width^2. Hexagon (0,0) is centred on the lower-left
// bbox corner. Every hexagon of the infinite lattice that overlaps the bbox
// with positive area becomes a tile; tiles overhang the bbox and are never
// clipped. Tiles are ordered row-major: by r, then q.
//
// Immutable after construction; concurrent reads are safe.
class HexGrid {
 public:
  static HexGrid build(const Box& bbox, double max_width);

  const Box& bbox() const { return bbox_; }
  Point origin() const { return {bbox_.min_x, bbox_.min_y}; }
  double max_width() const { return max_width_; }
  double circumradius() const { return 0.5 * max_width_; }
  double tile_area() const;

  std::size_t size() const { return tiles_.size(); }
  std::span<const Tile> tiles() const { return tiles_; }
  const Tile& tile(TileId id) const;

  std::optional<TileId> find(Axial a) const;

  // 1-ring neighbours present in the grid, in fixed direction order
  // E, NE, NW, W, SW, SE.
  std::vector<TileId> neighbors(TileId id) const;

  // Tile whose closed polygon contains p. Points on shared edges or corners
  // go to the tile with the smallest axial coordinate.
  std::optional<TileId> locate(Point p) const;

  const Ring& tile_polygon(TileId id) const { return tile(id).polygon; }

  // Geometry of the infinite lattice, whether or not the cell is a tile.
  Point center_of(Axial a) const;
  Ring hexagon_at(Axial a) const;

 private:
  HexGrid(const Box& bbox, double max_width) : bbox_(bbox), max_width_(max_width) {}

  Box bbox_;
  double max_width_;
  std::vector<Tile> tiles_;
  std::map<Axial, TileId> index_;
};

inline HexGrid build_grid(const Box& bbox, double max_width) {
  return HexGrid::build(bbox, max_width);
}

inline constexpr Axial kHexDirections[6] = {
    {+1, 0}, {+1, -1}, {0, -1}, {-1, 0}, {-1, +1}, {0, +1},
};

}  // namespace floodprio
