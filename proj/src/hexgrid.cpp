#include "floodprio/hexgrid.hpp"

#include <cmath>
#include <numbers>

#include "floodprio/error.hpp"

namespace floodprio {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

// Cube rounding of fractional axial coordinates.
Axial round_axial(double fq, double fr) {
  const double fs = -fq - fr;
  double q = std::round(fq);
  double r = std::round(fr);
  const double s = std::round(fs);
  const double dq = std::abs(q - fq);
  const double dr = std::abs(r - fr);
  const double ds = std::abs(s - fs);
  if (dq > dr && dq > ds) {
    q = -r - s;
  } else if (dr > ds) {
    r = -q - s;
  }
  return {static_cast<int>(q), static_cast<int>(r)};
}

}  // namespace

std::string to_string(TileId id) { return std::to_string(id.value); }

HexGrid HexGrid::build(const Box& bbox, double max_width) {
  if (!(max_width > 0.0) || !std::isfinite(max_width)) {
    fail_validation("max_width must be a positive finite length, got " +
                    std::to_string(max_width));
  }
  if (!(bbox.width() > 0.0) || !std::isfinite(bbox.width())) {
    fail_validation("bbox width must be positive, got " + std::to_string(bbox.width()));
  }
  if (!(bbox.height() > 0.0) || !std::isfinite(bbox.height())) {
    fail_validation("bbox height must be positive, got " + std::to_string(bbox.height()));
  }

  HexGrid grid(bbox, max_width);
  const double radius = grid.circumradius();
  const double row_step = 1.5 * radius;
  const double col_step = kSqrt3 * radius;
  const Ring box_ring{{bbox.min_x, bbox.min_y},
                      {bbox.max_x, bbox.min_y},
                      {bbox.max_x, bbox.max_y},
                      {bbox.min_x, bbox.max_y}};
  const double min_overlap = 1e-9 * grid.tile_area();

  const int r_lo = static_cast<int>(std::floor(-radius / row_step)) - 1;
  const int r_hi = static_cast<int>(std::ceil((bbox.height() + radius) / row_step)) + 1;
  for (int r = r_lo; r <= r_hi; ++r) {
    const int q_lo = static_cast<int>(std::floor(-radius / col_step - 0.5 * r)) - 1;
    const int q_hi =
        static_cast<int>(std::ceil((bbox.width() + radius) / col_step - 0.5 * r)) + 1;
    for (int q = q_lo; q <= q_hi; ++q) {
      const Axial a{q, r};
      Ring hex = grid.hexagon_at(a);
      const Ring overlap = clip_to_convex(hex, box_ring);
      if (std::abs(signed_area(overlap)) <= min_overlap) continue;
      const TileId id{static_cast<std::uint32_t>(grid.tiles_.size())};
      grid.tiles_.push_back(Tile{id, a, std::move(hex), grid.center_of(a)});
      grid.index_.emplace(a, id);
    }
  }
  return grid;
}

double HexGrid::tile_area() const {
  return 3.0 * kSqrt3 / 8.0 * max_width_ * max_width_;
}

const Tile& HexGrid::tile(TileId id) const {
  if (id.value >= tiles_.size()) fail_not_found("unknown tile id " + to_string(id));
  return tiles_[id.value];
}

std::optional<TileId> HexGrid::find(Axial a) const {
  const auto it = index_.find(a);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TileId> HexGrid::neighbors(TileId id) const {
  const Axial a = tile(id).axial;
  std::vector<TileId> out;
  out.reserve(6);
  for (const Axial& d : kHexDirections) {
    if (const auto n = find({a.q + d.q, a.r + d.r})) out.push_back(*n);
  }
  return out;
}

std::optional<TileId> HexGrid::locate(Point p) const {
  const double radius = circumradius();
  const Point local = p - origin();
  const double fq = (kSqrt3 / 3.0 * local.x - local.y / 3.0) / radius;
  const double fr = (2.0 / 3.0 * local.y) / radius;
  const Axial guess = round_axial(fq, fr);

  std::optional<Axial> best;
  auto consider = [&](Axial a) {
    const auto id = find(a);
    if (!id) return;
    if (classify_point(p, tiles_[id->value].polygon) == Containment::Outside) return;
    if (!best || a < *best) best = a;
  };
  consider(guess);
  for (const Axial& d : kHexDirections) consider({guess.q + d.q, guess.r + d.r});
  if (!best) return std::nullopt;
  return find(*best);
}

Point HexGrid::center_of(Axial a) const {
  const double radius = circumradius();
  return {bbox_.min_x + kSqrt3 * radius * (a.q + 0.5 * a.r), bbox_.min_y + 1.5 * radius * a.r};
}

Ring HexGrid::hexagon_at(Axial a) const {
  const Point c = center_of(a);
  const double radius = circumradius();
  Ring ring;
  ring.reserve(6);
  for (int i = 0; i < 6; ++i) {
    const double angle = std::numbers::pi / 180.0 * (60.0 * i - 30.0);
    ring.push_back({c.x + radius * std::cos(angle), c.y + radius * std::sin(angle)});
  }
  return ring;
}

}  // namespace floodprio
