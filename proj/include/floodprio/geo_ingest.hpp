#pragma once

// Loading and validation of the geodata inputs: flood extent, buildings,
// care facilities, road network, and evacuation destinations.
//
// All inputs are GeoJSON FeatureCollections in one projected metric CRS.
// The CRS is declared with the legacy top-level member
//   "crs": {"type": "name", "properties": {"name": "<label>"}}
// and the engine only compares labels; it never reprojects.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "floodprio/geometry.hpp"

namespace floodprio {

class FloodLayer {
 public:
  FloodLayer() = default;

  // Validates and takes ownership of the polygons. Rings must be simple,
  // holes must lie inside their outer ring and polygon interiors must be
  // pairwise disjoint. Invalid input is rejected, never repaired.
  FloodLayer(std::vector<Polygon> polygons, std::string version_tag);

  std::span<const Polygon> polygons() const { return polygons_; }
  const std::string& version_tag() const { return version_tag_; }
  const std::optional<std::string>& crs() const { return crs_; }
  void set_crs(std::optional<std::string> crs) { crs_ = std::move(crs); }

  bool empty() const { return polygons_.empty(); }
  double area() const;
  bool contains(Point p) const;
  bool intersects_polyline(std::span<const Point> polyline) const;

 private:
  std::vector<Polygon> polygons_;
  std::vector<Box> boxes_;
  std::string version_tag_;
  std::optional<std::string> crs_;
};

struct Building {
  std::string id;
  Point location;
};

struct BuildingSet {
  std::vector<Building> buildings;
  std::optional<std::string> crs;
};

struct Facility {
  std::string id;
  Point location;
};

struct FacilitySet {
  std::vector<Facility> facilities;
  std::optional<std::string> crs;
};

using RoadNodeId = std::int64_t;

struct RoadNode {
  RoadNodeId id = 0;
  Point location;
};

struct RoadSegment {
  std::string id;
  RoadNodeId from = 0;
  RoadNodeId to = 0;
  std::vector<Point> geometry;
};

// Undirected road graph. Every segment is traversable in both directions.
struct RoadNetwork {
  std::vector<RoadNode> nodes;
  std::vector<RoadSegment> segments;
  std::unordered_map<RoadNodeId, std::size_t> node_index;
  std::optional<std::string> crs;

  std::size_t index_of(RoadNodeId id) const;
  std::size_t degree(RoadNodeId id) const;
};

// Checks the topology invariants and fills node_index.
void validate_road_network(RoadNetwork& net);

struct LabelledPoint {
  std::string label;
  Point location;
};

struct Destination {
  std::string label;
  Point location;
  RoadNodeId node = 0;
};

struct DestinationSet {
  std::vector<Destination> destinations;
};

FloodLayer parse_flood_layer(std::string_view geojson);
FloodLayer load_flood_layer(const std::filesystem::path& path);

BuildingSet parse_buildings(std::string_view geojson);
BuildingSet load_buildings(const std::filesystem::path& path);

FacilitySet parse_facilities(std::string_view geojson);
FacilitySet load_facilities(const std::filesystem::path& path);

RoadNetwork parse_road_network(std::string_view geojson);
RoadNetwork load_road_network(const std::filesystem::path& path);

// Snaps each point to the nearest network node (ties: smaller node id)
// within max_snap metres. The snapped node must be outside the flood.
DestinationSet snap_destinations(const RoadNetwork& net, const FloodLayer& flood,
                                 std::span<const LabelledPoint> points, double max_snap);

std::string read_file(const std::filesystem::path& path);

}  // namespace floodprio
