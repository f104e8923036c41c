#include "floodprio/geo_ingest.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "floodprio/error.hpp"
#include "floodprio/hash.hpp"

namespace floodprio {

using nlohmann::json;

namespace {

constexpr double kNodeMatchTolerance = 1e-6;

json parse_collection(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail_validation(std::string("GeoJSON parse failure: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    fail_validation("GeoJSON input must be a FeatureCollection");
  }
  if (!doc.contains("features") || !doc["features"].is_array()) {
    fail_validation("FeatureCollection has no features array");
  }
  return doc;
}

std::optional<std::string> declared_crs(const json& doc) {
  if (!doc.contains("crs")) return std::nullopt;
  const json& crs = doc["crs"];
  if (crs.is_object() && crs.contains("properties") && crs["properties"].contains("name") &&
      crs["properties"]["name"].is_string()) {
    return crs["properties"]["name"].get<std::string>();
  }
  fail_validation("malformed crs member; expected {\"type\":\"name\",\"properties\":{\"name\":...}}");
}

Point parse_position(const json& pos, std::string_view where) {
  if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
    fail_validation(std::string(where) + ": position must be [x, y]");
  }
  const Point p{pos[0].get<double>(), pos[1].get<double>()};
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    fail_validation(std::string(where) + ": non-finite coordinate");
  }
  return p;
}

std::vector<Point> parse_positions(const json& arr, std::string_view where) {
  if (!arr.is_array()) fail_validation(std::string(where) + ": coordinates must be an array");
  std::vector<Point> pts;
  pts.reserve(arr.size());
  for (const json& pos : arr) pts.push_back(parse_position(pos, where));
  return pts;
}

Ring parse_ring(const json& arr, const std::string& where) {
  std::vector<Point> pts = parse_positions(arr, where);
  Ring ring;
  ring.reserve(pts.size());
  for (const Point& p : pts) {
    if (ring.empty() || !(ring.back() == p)) ring.push_back(p);
  }
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) fail_validation(where + ": ring needs at least 3 distinct vertices");
  return ring;
}

Polygon parse_polygon(const json& rings, const std::string& where) {
  if (!rings.is_array() || rings.empty()) {
    fail_validation(where + ": polygon needs at least an outer ring");
  }
  Polygon poly;
  poly.outer = parse_ring(rings[0], where + " ring 0");
  for (std::size_t i = 1; i < rings.size(); ++i) {
    poly.holes.push_back(parse_ring(rings[i], where + " ring " + std::to_string(i)));
  }
  return poly;
}

std::vector<Polygon> parse_polygonal(const json& geom, const std::string& where) {
  const std::string type = geom.value("type", "");
  if (type == "Polygon") return {parse_polygon(geom.at("coordinates"), where)};
  if (type == "MultiPolygon") {
    std::vector<Polygon> out;
    const json& parts = geom.at("coordinates");
    for (std::size_t i = 0; i < parts.size(); ++i) {
      out.push_back(parse_polygon(parts[i], where + " part " + std::to_string(i)));
    }
    return out;
  }
  fail_validation(where + ": expected Polygon or MultiPolygon, got '" + type + "'");
}

const json& feature_geometry(const json& feature, const std::string& where) {
  if (!feature.is_object() || !feature.contains("geometry") || !feature["geometry"].is_object()) {
    fail_validation(where + ": feature has no geometry");
  }
  return feature["geometry"];
}

std::optional<std::string> feature_id(const json& feature) {
  if (!feature.contains("id")) return std::nullopt;
  const json& id = feature["id"];
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<std::int64_t>());
  if (id.is_number()) return id.dump();
  fail_validation("feature id must be a string or number");
}

// Point features pass through; polygonal features reduce to their area
// centroid. Ids come from the feature or, failing that, its index.
template <typename Item>
std::vector<Item> parse_located_items(const json& doc, std::string_view kind) {
  std::vector<Item> items;
  std::set<std::string> seen;
  const json& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = std::string(kind) + " feature " + std::to_string(i);
    const json& geom = feature_geometry(features[i], where);
    const std::string type = geom.value("type", "");
    Point location;
    if (type == "Point") {
      location = parse_position(geom.at("coordinates"), where);
    } else if (type == "Polygon" || type == "MultiPolygon") {
      const std::vector<Polygon> parts = parse_polygonal(geom, where);
      double total = 0.0;
      Point weighted{};
      for (const Polygon& part : parts) {
        const double a = polygon_area(part);
        weighted = weighted + a * polygon_centroid(part);
        total += a;
      }
      location = total > 0.0 ? (1.0 / total) * weighted : polygon_centroid(parts.front());
    } else {
      fail_validation(where + ": unsupported geometry type '" + type + "'");
    }
    std::string id = feature_id(features[i]).value_or(std::to_string(i));
    if (!seen.insert(id).second) {
      fail_validation(std::string("duplicate ") + std::string(kind) + " id '" + id + "'");
    }
    items.push_back(Item{std::move(id), location});
  }
  return items;
}

bool strictly_inside(const Polygon& poly, Point p) {
  if (classify_point(p, poly.outer) != Containment::Inside) return false;
  for (const Ring& hole : poly.holes) {
    if (classify_point(p, hole) != Containment::Outside) return false;
  }
  return true;
}

// Points strictly inside poly: the centroid when it is inside (a hole can
// swallow it) and every outer edge midpoint nudged off the edge.
std::vector<Point> interior_samples(const Polygon& poly) {
  std::vector<Point> out;
  const Point c = polygon_centroid(poly);
  if (strictly_inside(poly, c)) out.push_back(c);
  const Ring& ring = poly.outer;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point d = ring[i] - ring[j];
    const Point mid = 0.5 * (ring[i] + ring[j]);
    const Point normal{-d.y * 1e-6, d.x * 1e-6};
    for (const Point p : {mid + normal, mid - normal}) {
      if (strictly_inside(poly, p)) out.push_back(p);
    }
  }
  return out;
}

bool interiors_overlap(const Polygon& a, const Polygon& b) {
  auto rings_of = [](const Polygon& p) {
    std::vector<const Ring*> rings{&p.outer};
    for (const Ring& h : p.holes) rings.push_back(&h);
    return rings;
  };
  for (const Ring* ra : rings_of(a)) {
    for (const Ring* rb : rings_of(b)) {
      const std::size_t na = ra->size();
      const std::size_t nb = rb->size();
      for (std::size_t i = 0, pi = na - 1; i < na; pi = i++) {
        for (std::size_t j = 0, pj = nb - 1; j < nb; pj = j++) {
          if (segments_cross((*ra)[pi], (*ra)[i], (*rb)[pj], (*rb)[j])) return true;
        }
      }
    }
  }
  for (const Point& p : a.outer) {
    if (strictly_inside(b, p)) return true;
  }
  for (const Point& p : b.outer) {
    if (strictly_inside(a, p)) return true;
  }
  for (const Point& p : interior_samples(a)) {
    if (strictly_inside(b, p)) return true;
  }
  for (const Point& p : interior_samples(b)) {
    if (strictly_inside(a, p)) return true;
  }
  return false;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_validation("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

FloodLayer::FloodLayer(std::vector<Polygon> polygons, std::string version_tag)
    : polygons_(std::move(polygons)), version_tag_(std::move(version_tag)) {
  for (std::size_t p = 0; p < polygons_.size(); ++p) {
    const Polygon& poly = polygons_[p];
    const std::string where = "flood polygon " + std::to_string(p);
    auto check_ring = [&](const Ring& ring, std::size_t ring_index) {
      if (ring.size() < 3) {
        fail_validation(where + " ring " + std::to_string(ring_index) + " is degenerate");
      }
      if (const auto hit = find_self_intersection(ring)) {
        fail_validation(where + " ring " + std::to_string(ring_index) +
                        " self-intersects (edges " + std::to_string(hit->first) + " and " +
                        std::to_string(hit->second) + ")");
      }
      if (signed_area(ring) == 0.0) {
        fail_validation(where + " ring " + std::to_string(ring_index) + " is degenerate");
      }
    };
    check_ring(poly.outer, 0);
    for (std::size_t h = 0; h < poly.holes.size(); ++h) {
      check_ring(poly.holes[h], h + 1);
      for (const Point& v : poly.holes[h]) {
        if (classify_point(v, poly.outer) == Containment::Outside) {
          fail_validation(where + " ring " + std::to_string(h + 1) +
                          " is a hole outside its outer ring");
        }
      }
    }
    boxes_.push_back(bounds(poly.outer));
  }
  for (std::size_t i = 0; i < polygons_.size(); ++i) {
    for (std::size_t j = i + 1; j < polygons_.size(); ++j) {
      if (!boxes_[i].overlaps(boxes_[j])) continue;
      if (interiors_overlap(polygons_[i], polygons_[j])) {
        fail_validation("flood polygons " + std::to_string(i) + " and " + std::to_string(j) +
                        " overlap");
      }
    }
  }
}

double FloodLayer::area() const {
  double total = 0.0;
  for (const Polygon& poly : polygons_) total += polygon_area(poly);
  return total;
}

bool FloodLayer::contains(Point p) const {
  for (std::size_t i = 0; i < polygons_.size(); ++i) {
    if (boxes_[i].contains(p) && contains_closed(polygons_[i], p)) return true;
  }
  return false;
}

bool FloodLayer::intersects_polyline(std::span<const Point> polyline) const {
  if (polyline.empty()) return false;
  const Box line_box = bounds(polyline);
  for (std::size_t i = 0; i < polygons_.size(); ++i) {
    if (boxes_[i].overlaps(line_box) && polyline_intersects(polygons_[i], polyline)) return true;
  }
  return false;
}

FloodLayer parse_flood_layer(std::string_view geojson) {
  const json doc = parse_collection(geojson);
  std::vector<Polygon> polygons;
  const json& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = "flood feature " + std::to_string(i);
    for (Polygon& p : parse_polygonal(feature_geometry(features[i], where), where)) {
      polygons.push_back(std::move(p));
    }
  }
  std::string tag;
  if (doc.contains("version_tag") && doc["version_tag"].is_string()) {
    tag = doc["version_tag"].get<std::string>();
  } else {
    tag = "fnv1a:" + hex64(fnv1a64(geojson));
  }
  FloodLayer layer(std::move(polygons), std::move(tag));
  layer.set_crs(declared_crs(doc));
  return layer;
}

FloodLayer load_flood_layer(const std::filesystem::path& path) {
  return parse_flood_layer(read_file(path));
}

BuildingSet parse_buildings(std::string_view geojson) {
  const json doc = parse_collection(geojson);
  return BuildingSet{parse_located_items<Building>(doc, "building"), declared_crs(doc)};
}

BuildingSet load_buildings(const std::filesystem::path& path) {
  return parse_buildings(read_file(path));
}

FacilitySet parse_facilities(std::string_view geojson) {
  const json doc = parse_collection(geojson);
  return FacilitySet{parse_located_items<Facility>(doc, "facility"), declared_crs(doc)};
}

FacilitySet load_facilities(const std::filesystem::path& path) {
  return parse_facilities(read_file(path));
}

std::size_t RoadNetwork::index_of(RoadNodeId id) const {
  const auto it = node_index.find(id);
  if (it == node_index.end()) fail_not_found("unknown road node " + std::to_string(id));
  return it->second;
}

std::size_t RoadNetwork::degree(RoadNodeId id) const {
  index_of(id);
  std::size_t d = 0;
  for (const RoadSegment& s : segments) d += (s.from == id) + (s.to == id);
  return d;
}

void validate_road_network(RoadNetwork& net) {
  net.node_index.clear();
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (!net.node_index.emplace(net.nodes[i].id, i).second) {
      fail_validation("duplicate road node id " + std::to_string(net.nodes[i].id));
    }
  }
  std::set<std::string> seen;
  for (RoadSegment& seg : net.segments) {
    if (!seen.insert(seg.id).second) fail_validation("duplicate road segment id '" + seg.id + "'");
    const auto from = net.node_index.find(seg.from);
    const auto to = net.node_index.find(seg.to);
    if (from == net.node_index.end() || to == net.node_index.end()) {
      const RoadNodeId missing = from == net.node_index.end() ? seg.from : seg.to;
      fail_validation("road segment '" + seg.id + "' references missing node " +
                      std::to_string(missing));
    }
    const Point a = net.nodes[from->second].location;
    const Point b = net.nodes[to->second].location;
    if (seg.geometry.empty()) seg.geometry = {a, b};
    if (seg.geometry.size() < 2) {
      fail_validation("road segment '" + seg.id + "' needs at least 2 vertices");
    }
    if (distance(seg.geometry.front(), a) > kNodeMatchTolerance ||
        distance(seg.geometry.back(), b) > kNodeMatchTolerance) {
      fail_validation("road segment '" + seg.id + "' endpoints do not coincide with nodes " +
                      std::to_string(seg.from) + " and " + std::to_string(seg.to));
    }
  }
}

RoadNetwork parse_road_network(std::string_view geojson) {
  const json doc = parse_collection(geojson);
  RoadNetwork net;
  net.crs = declared_crs(doc);
  const json& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::string where = "road feature " + std::to_string(i);
    const json& geom = feature_geometry(features[i], where);
    const json props = features[i].value("properties", json::object());
    const std::string type = geom.value("type", "");
    if (type == "Point") {
      if (!props.contains("node_id") || !props["node_id"].is_number_integer()) {
        fail_validation(where + ": Point feature needs integer property node_id");
      }
      net.nodes.push_back({props["node_id"].get<RoadNodeId>(),
                           parse_position(geom.at("coordinates"), where)});
    } else if (type == "LineString") {
      if (!props.contains("node_from") || !props["node_from"].is_number_integer() ||
          !props.contains("node_to") || !props["node_to"].is_number_integer()) {
        fail_validation(where + ": LineString needs integer properties node_from and node_to");
      }
      RoadSegment seg;
      seg.id = feature_id(features[i]).value_or("segment-" + std::to_string(i));
      seg.from = props["node_from"].get<RoadNodeId>();
      seg.to = props["node_to"].get<RoadNodeId>();
      seg.geometry = parse_positions(geom.at("coordinates"), where);
      net.segments.push_back(std::move(seg));
    } else {
      fail_validation(where + ": unsupported geometry type '" + type + "'");
    }
  }
  validate_road_network(net);
  return net;
}

RoadNetwork load_road_network(const std::filesystem::path& path) {
  return parse_road_network(read_file(path));
}

DestinationSet snap_destinations(const RoadNetwork& net, const FloodLayer& flood,
                                 std::span<const LabelledPoint> points, double max_snap) {
  if (points.empty()) fail_validation("at least one destination is required");
  DestinationSet out;
  for (const LabelledPoint& lp : points) {
    const RoadNode* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const RoadNode& node : net.nodes) {
      const double d = distance(node.location, lp.location);
      if (d < best_dist || (d == best_dist && best && node.id < best->id)) {
        best = &node;
        best_dist = d;
      }
    }
    if (!best || best_dist > max_snap) {
      fail_validation("destination '" + lp.label + "' has no road node within " +
                      std::to_string(max_snap) + " m");
    }
    if (flood.contains(best->location)) {
      fail_validation("destination '" + lp.label + "' snaps to flooded road node " +
                      std::to_string(best->id));
    }
    out.destinations.push_back({lp.label, lp.location, best->id});
  }
  return out;
}

}  // namespace floodprio
