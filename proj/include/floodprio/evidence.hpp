#pragma once

// The four GIS models that feed the per-tile network's root nodes:
// exposed-building density, exposed care facilities, accessibility of
// immediate unexposed area, and road accessibility of remote unexposed area.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "floodprio/geo_ingest.hpp"
#include "floodprio/hexgrid.hpp"

namespace floodprio {

enum class DensityClass : std::uint8_t { None = 0, Low = 1, Medium = 2, High = 3 };

std::string_view to_string(DensityClass d);

struct PercentileLevels {
  double medium = 0.75;
  double high = 0.90;
};

struct DensityThresholds {
  std::int64_t medium_count = 0;  // counts above this are at least Medium
  std::int64_t high_count = 0;    // counts above this are High
  PercentileLevels levels;
  std::string method = "nearest-rank";
};

struct DensityClassification {
  std::vector<DensityClass> classes;
  // Absent when no tile has an exposed building.
  std::optional<DensityThresholds> thresholds;
};

struct EvidenceBundle {
  TileId tile;
  DensityClass density = DensityClass::None;
  bool facility_exposed = false;
  double immediate_unexposed = 1.0;  // soft: P(immediate access = True)
  bool remote_accessible = false;
  std::int64_t exposed_building_count = 0;
};

// Value at 1-based rank ceil(level * n) of an ascending sample.
std::int64_t nearest_rank(std::span<const std::int64_t> sorted, double level);

std::vector<std::int64_t> exposed_building_counts(const HexGrid& grid, const BuildingSet& buildings,
                                                  const FloodLayer& flood);

// Percentiles are taken over exposed tiles only (count >= 1).
DensityClassification classify_density(std::span<const std::int64_t> counts,
                                       PercentileLevels levels = {});

std::vector<bool> facility_presence(const HexGrid& grid, const FacilitySet& facilities,
                                    const FloodLayer& flood);

// Share of a convex counter-clockwise polygon covered by the flood.
double flood_fraction(std::span<const Point> convex_ccw, const FloodLayer& flood);

// Unflooded share of the tile together with its 1-ring neighbours in the grid.
double immediate_unexposed_fraction(const HexGrid& grid, const FloodLayer& flood, TileId id);

// Same quantity for every tile, sharing the per-tile flood fractions.
std::vector<double> immediate_unexposed_fractions(const HexGrid& grid, const FloodLayer& flood);

// A tile is accessible iff one of its unflooded road nodes is connected to a
// destination node once flooded nodes and every segment touching the flood
// are removed. Tiles without an unflooded node are inaccessible.
std::vector<bool> remote_accessibility(const HexGrid& grid, const RoadNetwork& net,
                                       const FloodLayer& flood, const DestinationSet& dests);

struct EvidenceInputs {
  const FloodLayer& flood;
  const BuildingSet& buildings;
  const FacilitySet& facilities;
  const RoadNetwork& roads;
  const DestinationSet& destinations;
  PercentileLevels levels;
};

struct EvidenceResult {
  std::vector<EvidenceBundle> bundles;  // indexed by tile id
  std::optional<DensityThresholds> thresholds;
};

EvidenceResult build_evidence(const HexGrid& grid, const EvidenceInputs& inputs);

// One GeoJSON Feature per tile with the evidence values as properties.
std::string evidence_geojson(const HexGrid& grid, std::span<const EvidenceBundle> bundles);

}  // namespace floodprio
