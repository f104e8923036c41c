#include "floodprio/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "floodprio/parallel.hpp"

namespace floodprio {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<double> tile_flood_fractions(const HexGrid& grid, const FloodLayer& flood) {
  std::vector<double> fractions(grid.size(), 0.0);
  if (flood.empty()) return fractions;
  const auto tiles = grid.tiles();
  parallel_for(tiles.size(), [&](std::size_t i) {
    fractions[i] = flood_fraction(tiles[i].polygon, flood);
  });
  return fractions;
}

double unexposed_from_fractions(const HexGrid& grid, std::span<const double> fractions,
                                TileId id) {
  double flooded = fractions[id.value];
  double tiles = 1.0;
  for (const TileId n : grid.neighbors(id)) {
    flooded += fractions[n.value];
    tiles += 1.0;
  }
  // All tiles are congruent, so area shares reduce to tile-count shares.
  return std::clamp(1.0 - flooded / tiles, 0.0, 1.0);
}

}  // namespace

std::string_view to_string(DensityClass d) {
  switch (d) {
    case DensityClass::None:
      return "None";
    case DensityClass::Low:
      return "Low";
    case DensityClass::Medium:
      return "Medium";
    case DensityClass::High:
      return "High";
  }
  return "None";
}

std::int64_t nearest_rank(std::span<const std::int64_t> sorted, double level) {
  const double n = static_cast<double>(sorted.size());
  // The small guard keeps e.g. 0.9 * 100 from rounding up to rank 91.
  auto rank = static_cast<std::size_t>(std::ceil(level * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::vector<std::int64_t> exposed_building_counts(const HexGrid& grid, const BuildingSet& buildings,
                                                  const FloodLayer& flood) {
  std::vector<std::int64_t> counts(grid.size(), 0);
  if (flood.empty()) return counts;
  for (const Building& b : buildings.buildings) {
    if (!flood.contains(b.location)) continue;
    if (const auto id = grid.locate(b.location)) ++counts[id->value];
  }
  return counts;
}

DensityClassification classify_density(std::span<const std::int64_t> counts,
                                       PercentileLevels levels) {
  DensityClassification out;
  out.classes.assign(counts.size(), DensityClass::None);
  std::vector<std::int64_t> exposed;
  for (const std::int64_t c : counts) {
    if (c >= 1) exposed.push_back(c);
  }
  if (exposed.empty()) return out;
  std::sort(exposed.begin(), exposed.end());

  DensityThresholds t;
  t.levels = levels;
  t.medium_count = nearest_rank(exposed, levels.medium);
  t.high_count = nearest_rank(exposed, levels.high);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::int64_t c = counts[i];
    if (c <= 0) continue;
    if (c > t.high_count) {
      out.classes[i] = DensityClass::High;
    } else if (c > t.medium_count) {
      out.classes[i] = DensityClass::Medium;
    } else {
      out.classes[i] = DensityClass::Low;
    }
  }
  out.thresholds = t;
  return out;
}

std::vector<bool> facility_presence(const HexGrid& grid, const FacilitySet& facilities,
                                    const FloodLayer& flood) {
  std::vector<bool> present(grid.size(), false);
  for (const Facility& f : facilities.facilities) {
    if (!flood.contains(f.location)) continue;
    if (const auto id = grid.locate(f.location)) present[id->value] = true;
  }
  return present;
}

double flood_fraction(std::span<const Point> convex_ccw, const FloodLayer& flood) {
  const double total = std::abs(signed_area(convex_ccw));
  if (total <= 0.0 || flood.empty()) return 0.0;
  const Box box = bounds(convex_ccw);
  double covered = 0.0;
  for (const Polygon& poly : flood.polygons()) {
    if (!bounds(poly.outer).overlaps(box)) continue;
    covered += std::abs(signed_area(clip_to_convex(poly.outer, convex_ccw)));
    for (const Ring& hole : poly.holes) {
      covered -= std::abs(signed_area(clip_to_convex(hole, convex_ccw)));
    }
  }
  return std::clamp(covered / total, 0.0, 1.0);
}

double immediate_unexposed_fraction(const HexGrid& grid, const FloodLayer& flood, TileId id) {
  grid.tile(id);
  std::vector<double> fractions(grid.size(), 0.0);
  fractions[id.value] = flood_fraction(grid.tile(id).polygon, flood);
  for (const TileId n : grid.neighbors(id)) {
    fractions[n.value] = flood_fraction(grid.tile(n).polygon, flood);
  }
  return unexposed_from_fractions(grid, fractions, id);
}

std::vector<double> immediate_unexposed_fractions(const HexGrid& grid, const FloodLayer& flood) {
  const std::vector<double> fractions = tile_flood_fractions(grid, flood);
  std::vector<double> out(grid.size());
  for (const Tile& t : grid.tiles()) out[t.id.value] = unexposed_from_fractions(grid, fractions, t.id);
  return out;
}

std::vector<bool> remote_accessibility(const HexGrid& grid, const RoadNetwork& net,
                                       const FloodLayer& flood, const DestinationSet& dests) {
  const std::size_t n = net.nodes.size();
  std::vector<bool> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = !flood.contains(net.nodes[i].location);

  DisjointSets components(n);
  for (const RoadSegment& seg : net.segments) {
    const std::size_t a = net.index_of(seg.from);
    const std::size_t b = net.index_of(seg.to);
    if (!residual[a] || !residual[b]) continue;
    if (flood.intersects_polyline(seg.geometry)) continue;
    components.unite(a, b);
  }

  std::vector<bool> reaches_destination(n, false);
  for (const Destination& d : dests.destinations) {
    const std::size_t idx = net.index_of(d.node);
    if (residual[idx]) reaches_destination[components.find(idx)] = true;
  }

  std::vector<bool> accessible(grid.size(), false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!residual[i] || !reaches_destination[components.find(i)]) continue;
    if (const auto id = grid.locate(net.nodes[i].location)) accessible[id->value] = true;
  }
  return accessible;
}

EvidenceResult build_evidence(const HexGrid& grid, const EvidenceInputs& in) {
  const std::vector<std::int64_t> counts = exposed_building_counts(grid, in.buildings, in.flood);
  DensityClassification density = classify_density(counts, in.levels);
  const std::vector<bool> facilities = facility_presence(grid, in.facilities, in.flood);
  const std::vector<double> immediate = immediate_unexposed_fractions(grid, in.flood);
  const std::vector<bool> remote = remote_accessibility(grid, in.roads, in.flood, in.destinations);

  EvidenceResult out;
  out.thresholds = density.thresholds;
  out.bundles.reserve(grid.size());
  for (const Tile& t : grid.tiles()) {
    const std::size_t i = t.id.value;
    out.bundles.push_back(EvidenceBundle{t.id, density.classes[i], facilities[i], immediate[i],
                                         remote[i], counts[i]});
  }
  return out;
}

std::string evidence_geojson(const HexGrid& grid, std::span<const EvidenceBundle> bundles) {
  nlohmann::json features = nlohmann::json::array();
  for (const EvidenceBundle& b : bundles) {
    const Tile& t = grid.tile(b.tile);
    nlohmann::json ring = nlohmann::json::array();
    for (const Point& p : t.polygon) ring.push_back({p.x, p.y});
    ring.push_back({t.polygon.front().x, t.polygon.front().y});
    features.push_back({
        {"type", "Feature"},
        {"id", b.tile.value},
        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
        {"properties",
         {{"q", t.axial.q},
          {"r", t.axial.r},
          {"density", std::string(to_string(b.density))},
          {"facility_exposed", b.facility_exposed},
          {"immediate_unexposed", b.immediate_unexposed},
          {"remote_accessible", b.remote_accessible},
          {"exposed_count", b.exposed_building_count}}},
    });
  }
  const nlohmann::json doc{{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump();
}

}  // namespace floodprio
