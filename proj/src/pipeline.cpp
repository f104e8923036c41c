#include "floodprio/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "floodprio/error.hpp"
#include "floodprio/hash.hpp"
#include "floodprio/parallel.hpp"
#include "floodprio/text_format.hpp"
#include "json.hpp"

namespace floodprio {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Runs fn, prefixing any error with the stage name.
template <typename Fn>
auto staged(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (...) {
    rethrow_with_stage(stage);
  }
}

void check_crs(const std::optional<std::string>& declared, const std::string& expected,
               std::string_view layer) {
  if (!declared) {
    fail_validation(std::string(layer) + " declares no crs; expected '" + expected + "'");
  }
  if (*declared != expected) {
    fail_validation(std::string(layer) + " crs '" + *declared + "' does not match scenario crs '" +
                    expected + "'");
  }
}

std::string digest_of(std::string_view bytes) { return "fnv1a:" + hex64(fnv1a64(bytes)); }

DensityClass parse_density(std::string_view s) {
  for (const DensityClass d :
       {DensityClass::None, DensityClass::Low, DensityClass::Medium, DensityClass::High}) {
    if (to_string(d) == s) return d;
  }
  fail_validation("unknown density class '" + std::string(s) + "'");
}

PriorityCategory parse_category(std::string_view s) {
  for (const PriorityCategory c : {PriorityCategory::Safe, PriorityCategory::Exposed,
                                   PriorityCategory::Priority, PriorityCategory::HighPriority}) {
    if (to_string(c) == s) return c;
  }
  fail_validation("unknown category '" + std::string(s) + "'");
}

json weights_json(const WeightVector& w) {
  const auto a = w.as_array();
  return json::array({a[0], a[1], a[2], a[3]});
}

json counts_json(const std::array<std::size_t, 4>& c) {
  return {{"Safe", c[0]}, {"Exposed", c[1]}, {"Priority", c[2]}, {"HighPriority", c[3]}};
}

json thresholds_json(const std::optional<DensityThresholds>& t) {
  if (!t) return nullptr;
  return {{"medium_count", t->medium_count},
          {"high_count", t->high_count},
          {"levels", json::array({t->levels.medium, t->levels.high})},
          {"method", t->method}};
}

json audit_json(const std::optional<MonotonicityAudit>& a) {
  if (!a) return nullptr;
  return {{"baseline_version", a->baseline_version},
          {"immediate_increases", a->immediate_increases},
          {"became_accessible", a->became_accessible},
          {"safe_before", a->safe_before},
          {"safe_after", a->safe_after},
          {"monotone", a->monotone()}};
}

json posterior_json(const RiskPosterior& p) {
  return {{"None", p[0]}, {"Low", p[1]}, {"Medium", p[2]}, {"High", p[3]}};
}

json evidence_json(const EvidenceBundle& b) {
  return {{"density", std::string(to_string(b.density))},
          {"facility_exposed", b.facility_exposed},
          {"immediate_unexposed", b.immediate_unexposed},
          {"remote_accessible", b.remote_accessible},
          {"exposed_building_count", b.exposed_building_count}};
}

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::Internal, "cannot write '" + path.string() + "'");
}

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

std::optional<std::uint32_t> parse_version_dir(const std::string& name) {
  if (name.size() != 5 || name[0] != 'v') return std::nullopt;
  std::uint32_t v = 0;
  for (std::size_t i = 1; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint32_t>(name[i] - '0');
  }
  if (v == 0) return std::nullopt;
  return v;
}

void prioritize_into(ScenarioResult& r, const WeightVector& w) {
  std::vector<double> scores(r.tiles.size());
  for (std::size_t i = 0; i < r.tiles.size(); ++i) {
    r.tiles[i].pdc = pdc(r.tiles[i].posterior, w);
    scores[i] = r.tiles[i].pdc;
  }
  const Categorization cat = categorize(scores, r.clusters, w.none);
  for (std::size_t i = 0; i < r.tiles.size(); ++i) {
    r.tiles[i].category = cat.categories[i];
    r.tiles[i].cluster = cat.cluster[i];
  }
  r.weights = w;
  r.centroids = cat.centroids;
  r.method = cat.method;
}

}  // namespace

std::string_view to_string(UpdateKind k) {
  switch (k) {
    case UpdateKind::Run:
      return "run";
    case UpdateKind::Flood:
      return "flood";
    case UpdateKind::Weights:
      return "weights";
  }
  return "run";
}

UpdateKind parse_update_kind(std::string_view s) {
  if (s == "run") return UpdateKind::Run;
  if (s == "flood") return UpdateKind::Flood;
  if (s == "weights") return UpdateKind::Weights;
  fail_validation("unknown update kind '" + std::string(s) + "'");
}

std::array<std::size_t, 4> ScenarioResult::counts() const {
  std::array<std::size_t, 4> c{};
  for (const TileResult& t : tiles) ++c[static_cast<std::size_t>(t.category)];
  return c;
}

std::string version_dir_name(std::uint32_t version) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "v%04u", version);
  return buf;
}

FloodLayer parse_scenario_flood(std::string_view geojson, const std::string& crs) {
  FloodLayer flood = parse_flood_layer(geojson);
  check_crs(flood.crs(), crs, "flood layer");
  return flood;
}

ScenarioInputs load_scenario_inputs(const ScenarioConfig& cfg) {
  validate_inputs_exist(cfg);
  const std::string buildings_bytes = read_file(cfg.buildings);
  const std::string facilities_bytes = read_file(cfg.facilities);
  const std::string roads_bytes = read_file(cfg.roads);

  BuildingSet buildings = parse_buildings(buildings_bytes);
  check_crs(buildings.crs, cfg.crs, "buildings");
  FacilitySet facilities = parse_facilities(facilities_bytes);
  check_crs(facilities.crs, cfg.crs, "facilities");
  RoadNetwork roads = parse_road_network(roads_bytes);
  check_crs(roads.crs, cfg.crs, "road network");

  const CptConfig cpt = cfg.cpt ? load_cpt_config(*cfg.cpt) : CptConfig{RiskTableGenerator{}};
  std::string cpt_text = format_cpt_config(cpt);
  bn::DiscreteNetwork network = build_risk_network(cpt);

  const std::string config_text = format_scenario_config(cfg);
  const std::string config_hash =
      "fnv1a:" + hex64(fnv1a64(cpt_text, fnv1a64(config_text)));
  const std::string digest = "buildings = " + digest_of(buildings_bytes) + "\n" +
                             "facilities = " + digest_of(facilities_bytes) + "\n" +
                             "roads = " + digest_of(roads_bytes) + "\n";

  return ScenarioInputs{cfg,
                        build_grid(cfg.bbox, cfg.hex_max_width),
                        std::move(buildings),
                        std::move(facilities),
                        std::move(roads),
                        std::move(network),
                        std::move(cpt_text),
                        config_hash,
                        digest};
}

ScenarioResult compute_scenario(const ScenarioInputs& in, const FloodLayer& flood,
                                const WeightVector& w, std::size_t k) {
  w.validate();
  ScenarioResult r;
  r.crs = in.config.crs;
  r.flood_version_tag = flood.version_tag();
  r.config_hash = in.config_hash;
  r.clusters = k;

  auto t0 = Clock::now();
  const DestinationSet dests = staged("destinations", [&] {
    return snap_destinations(in.roads, flood, in.config.destinations, in.config.max_snap);
  });
  r.destinations = dests.destinations;
  EvidenceResult ev = staged("evidence", [&] {
    const EvidenceInputs inputs{flood, in.buildings, in.facilities, in.roads, dests,
                                in.config.density_levels};
    return build_evidence(in.grid, inputs);
  });
  r.thresholds = ev.thresholds;
  r.timings.evidence_ms = elapsed_ms(t0);

  t0 = Clock::now();
  r.tiles.resize(ev.bundles.size());
  staged("inference", [&] {
    parallel_for(ev.bundles.size(), [&](std::size_t i) {
      r.tiles[i].evidence = ev.bundles[i];
      r.tiles[i].posterior = infer_risk(in.network, ev.bundles[i]);
    });
  });
  r.timings.inference_ms = elapsed_ms(t0);

  t0 = Clock::now();
  staged("prioritize", [&] { prioritize_into(r, w); });
  r.timings.prioritize_ms = elapsed_ms(t0);
  return r;
}

ScenarioResult reprioritize(const ScenarioResult& prev, const WeightVector& w) {
  w.validate();
  const auto t0 = Clock::now();
  ScenarioResult r = prev;
  r.audit.reset();
  r.timings = {};
  staged("prioritize", [&] { prioritize_into(r, w); });
  r.timings.prioritize_ms = elapsed_ms(t0);
  return r;
}

MonotonicityAudit audit_monotonicity(const ScenarioResult& before, const ScenarioResult& after) {
  if (before.tiles.size() != after.tiles.size()) {
    throw Error(ErrorKind::Internal, "audit: tile counts differ between versions");
  }
  MonotonicityAudit a;
  a.baseline_version = before.version;
  for (std::size_t i = 0; i < before.tiles.size(); ++i) {
    const EvidenceBundle& b = before.tiles[i].evidence;
    const EvidenceBundle& n = after.tiles[i].evidence;
    if (n.immediate_unexposed > b.immediate_unexposed) ++a.immediate_increases;
    if (n.remote_accessible && !b.remote_accessible) ++a.became_accessible;
  }
  a.safe_before = before.counts()[0];
  a.safe_after = after.counts()[0];
  return a;
}

std::string priomap_geojson(const HexGrid& grid, const ScenarioResult& r) {
  json features = json::array();
  for (const TileResult& t : r.tiles) {
    const Tile& tile = grid.tile(t.evidence.tile);
    json ring = json::array();
    for (const Point& p : tile.polygon) ring.push_back({p.x, p.y});
    ring.push_back({tile.polygon.front().x, tile.polygon.front().y});
    const EvidenceBundle& e = t.evidence;
    features.push_back({
        {"type", "Feature"},
        {"id", tile.id.value},
        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
        {"properties",
         {{"tile_id", tile.id.value},
          {"q", tile.axial.q},
          {"r", tile.axial.r},
          {"category", std::string(to_string(t.category))},
          {"cluster", t.cluster},
          {"pdc", t.pdc},
          {"p_none", t.posterior[0]},
          {"p_low", t.posterior[1]},
          {"p_medium", t.posterior[2]},
          {"p_high", t.posterior[3]},
          {"density", std::string(to_string(e.density))},
          {"facility_exposed", e.facility_exposed},
          {"immediate_unexposed", e.immediate_unexposed},
          {"remote_accessible", e.remote_accessible}}},
    });
  }
  const json doc{
      {"type", "FeatureCollection"},
      {"crs", {{"type", "name"}, {"properties", {{"name", r.crs}}}}},
      {"version", r.version},
      {"flood_version_tag", r.flood_version_tag},
      {"weights", weights_json(r.weights)},
      {"clustering",
       {{"k", r.clusters}, {"method", r.method}, {"safe_epsilon", kSafeEpsilon}}},
      {"centroids", r.centroids},
      {"thresholds", thresholds_json(r.thresholds)},
      {"counts", counts_json(r.counts())},
      {"features", features},
  };
  return doc.dump();
}

std::string tiles_json(const ScenarioResult& r) {
  json tiles = json::array();
  for (const TileResult& t : r.tiles) {
    const EvidenceBundle& e = t.evidence;
    tiles.push_back({{"id", e.tile.value},
                     {"density", std::string(to_string(e.density))},
                     {"facility_exposed", e.facility_exposed},
                     {"immediate_unexposed", e.immediate_unexposed},
                     {"remote_accessible", e.remote_accessible},
                     {"exposed_count", e.exposed_building_count},
                     {"posterior", t.posterior},
                     {"pdc", t.pdc},
                     {"category", std::string(to_string(t.category))},
                     {"cluster", t.cluster}});
  }
  json dests = json::array();
  for (const Destination& d : r.destinations) {
    dests.push_back({{"label", d.label}, {"x", d.location.x}, {"y", d.location.y}, {"node", d.node}});
  }
  const json doc{{"version", r.version},
                 {"kind", std::string(to_string(r.kind))},
                 {"source_version", r.source_version},
                 {"crs", r.crs},
                 {"flood_version_tag", r.flood_version_tag},
                 {"config_hash", r.config_hash},
                 {"weights", weights_json(r.weights)},
                 {"clusters", r.clusters},
                 {"method", r.method},
                 {"centroids", r.centroids},
                 {"thresholds", thresholds_json(r.thresholds)},
                 {"destinations", dests},
                 {"audit", audit_json(r.audit)},
                 {"tiles", tiles}};
  return doc.dump(1);
}

ScenarioResult parse_tiles_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    ScenarioResult r;
    r.version = doc.at("version").get<std::uint32_t>();
    r.kind = parse_update_kind(doc.at("kind").get<std::string>());
    r.source_version = doc.at("source_version").get<std::uint32_t>();
    r.crs = doc.at("crs").get<std::string>();
    r.flood_version_tag = doc.at("flood_version_tag").get<std::string>();
    r.config_hash = doc.at("config_hash").get<std::string>();
    const auto w = doc.at("weights").get<std::array<double, 4>>();
    r.weights = {w[0], w[1], w[2], w[3]};
    r.clusters = doc.at("clusters").get<std::size_t>();
    r.method = doc.at("method").get<std::string>();
    r.centroids = doc.at("centroids").get<std::vector<double>>();
    if (const json& t = doc.at("thresholds"); !t.is_null()) {
      const auto lv = t.at("levels").get<std::array<double, 2>>();
      r.thresholds = DensityThresholds{t.at("medium_count").get<std::int64_t>(),
                                       t.at("high_count").get<std::int64_t>(),
                                       {lv[0], lv[1]},
                                       t.at("method").get<std::string>()};
    }
    for (const json& d : doc.at("destinations")) {
      r.destinations.push_back({d.at("label").get<std::string>(),
                                {d.at("x").get<double>(), d.at("y").get<double>()},
                                d.at("node").get<RoadNodeId>()});
    }
    if (const json& a = doc.at("audit"); !a.is_null()) {
      r.audit = MonotonicityAudit{a.at("baseline_version").get<std::uint32_t>(),
                                  a.at("immediate_increases").get<std::size_t>(),
                                  a.at("became_accessible").get<std::size_t>(),
                                  a.at("safe_before").get<std::size_t>(),
                                  a.at("safe_after").get<std::size_t>()};
    }
    for (const json& t : doc.at("tiles")) {
      TileResult tr;
      tr.evidence.tile = TileId{t.at("id").get<std::uint32_t>()};
      tr.evidence.density = parse_density(t.at("density").get<std::string>());
      tr.evidence.facility_exposed = t.at("facility_exposed").get<bool>();
      tr.evidence.immediate_unexposed = t.at("immediate_unexposed").get<double>();
      tr.evidence.remote_accessible = t.at("remote_accessible").get<bool>();
      tr.evidence.exposed_building_count = t.at("exposed_count").get<std::int64_t>();
      tr.posterior = t.at("posterior").get<RiskPosterior>();
      tr.pdc = t.at("pdc").get<double>();
      tr.category = parse_category(t.at("category").get<std::string>());
      tr.cluster = t.at("cluster").get<int>();
      if (tr.evidence.tile.value != r.tiles.size()) {
        fail_validation("tiles are not stored in id order");
      }
      r.tiles.push_back(tr);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Internal, std::string("corrupt stored result: ") + e.what());
  }
}

std::string manifest_text(const ScenarioResult& r, std::string_view inputs_digest) {
  std::ostringstream out;
  out << "version = " << r.version << "\n";
  out << "kind = " << to_string(r.kind) << "\n";
  out << "source_version = " << r.source_version << "\n";
  out << "config = ../config.txt\n";
  out << "cpt = ../cpt.txt\n";
  out << "config_hash = " << r.config_hash << "\n";
  out << inputs_digest;
  if (r.kind == UpdateKind::Weights) {
    out << "flood_snapshot = ../" << version_dir_name(r.source_version) << "/flood.geojson\n";
  } else {
    out << "flood_snapshot = flood.geojson\n";
  }
  out << "flood_version_tag = " << r.flood_version_tag << "\n";
  out << "weights = " << format_weights(r.weights) << "\n";
  out << "clusters = " << r.clusters << "\n";
  out << "clustering = " << r.method << "\n";
  out << "centroids = " << format_number_list(r.centroids) << "\n";
  if (r.thresholds) {
    out << "density_thresholds = " << r.thresholds->medium_count << " "
        << r.thresholds->high_count << " (" << r.thresholds->method << ")\n";
  }
  const auto c = r.counts();
  out << "counts = Safe " << c[0] << ", Exposed " << c[1] << ", Priority " << c[2]
      << ", HighPriority " << c[3] << "\n";
  if (r.audit) {
    out << "audit.baseline_version = " << r.audit->baseline_version << "\n";
    out << "audit.immediate_increases = " << r.audit->immediate_increases << "\n";
    out << "audit.became_accessible = " << r.audit->became_accessible << "\n";
    out << "audit.safe = " << r.audit->safe_before << " -> " << r.audit->safe_after << "\n";
  }
  out << "timings = timings.txt\n";
  return out.str();
}

std::string timings_text(const StageTimings& t) {
  std::ostringstream out;
  out << "ingest_ms = " << format_number(t.ingest_ms) << "\n";
  out << "evidence_ms = " << format_number(t.evidence_ms) << "\n";
  out << "inference_ms = " << format_number(t.inference_ms) << "\n";
  out << "prioritize_ms = " << format_number(t.prioritize_ms) << "\n";
  out << "persist_ms = " << format_number(t.persist_ms) << "\n";
  out << "total_ms = " << format_number(t.total_ms) << "\n";
  return out.str();
}

namespace {

StageTimings parse_timings(std::string_view text) {
  StageTimings t;
  for (const KeyValue& kv : parse_key_values(text)) {
    const double v = parse_number(kv.value, kv.key);
    if (kv.key == "ingest_ms") t.ingest_ms = v;
    if (kv.key == "evidence_ms") t.evidence_ms = v;
    if (kv.key == "inference_ms") t.inference_ms = v;
    if (kv.key == "prioritize_ms") t.prioritize_ms = v;
    if (kv.key == "persist_ms") t.persist_ms = v;
    if (kv.key == "total_ms") t.total_ms = v;
  }
  return t;
}

json timings_json(const StageTimings& t) {
  return {{"ingest_ms", t.ingest_ms},         {"evidence_ms", t.evidence_ms},
          {"inference_ms", t.inference_ms},   {"prioritize_ms", t.prioritize_ms},
          {"persist_ms", t.persist_ms},       {"total_ms", t.total_ms}};
}

}  // namespace

std::string tile_detail_json(const HexGrid& grid, const ScenarioResult& r, TileId id) {
  const Tile& tile = grid.tile(id);
  if (id.value >= r.tiles.size()) fail_not_found("tile " + to_string(id) + " not found");
  const TileResult& t = r.tiles[id.value];
  const json doc{{"scenario", r.scenario_id},
                 {"version", r.version},
                 {"tile_id", id.value},
                 {"q", tile.axial.q},
                 {"r", tile.axial.r},
                 {"centroid", {tile.centroid.x, tile.centroid.y}},
                 {"evidence", evidence_json(t.evidence)},
                 {"posterior", posterior_json(t.posterior)},
                 {"pdc", t.pdc},
                 {"category", std::string(to_string(t.category))},
                 {"cluster", t.cluster}};
  return doc.dump();
}

std::string summary_json(const ScenarioResult& r) {
  json dests = json::array();
  for (const Destination& d : r.destinations) {
    dests.push_back({{"label", d.label}, {"node", d.node}});
  }
  const json doc{{"scenario", r.scenario_id},
                 {"version", r.version},
                 {"kind", std::string(to_string(r.kind))},
                 {"source_version", r.source_version},
                 {"flood_version_tag", r.flood_version_tag},
                 {"config_hash", r.config_hash},
                 {"tile_count", r.tiles.size()},
                 {"counts", counts_json(r.counts())},
                 {"thresholds", thresholds_json(r.thresholds)},
                 {"centroids", r.centroids},
                 {"weights", weights_json(r.weights)},
                 {"clustering", {{"k", r.clusters}, {"method", r.method}}},
                 {"destinations", dests},
                 {"audit", audit_json(r.audit)},
                 {"timings", timings_json(r.timings)}};
  return doc.dump();
}

// ---------------------------------------------------------------------------
// ScenarioStore

struct ScenarioStore::Scenario {
  Scenario(std::string id_, fs::path dir_, ScenarioConfig config_, HexGrid grid_)
      : id(std::move(id_)), dir(std::move(dir_)), config(std::move(config_)), grid(std::move(grid_)) {}

  std::string id;
  fs::path dir;
  ScenarioConfig config;
  HexGrid grid;
  std::string inputs_digest;

  // Serialises writers. Guards inputs, which is loaded on first update.
  std::mutex write_mutex;
  std::unique_ptr<ScenarioInputs> inputs;

  // Guards latest and versions. Readers take it shared.
  mutable std::shared_mutex state_mutex;
  std::uint32_t latest = 0;
  std::vector<VersionInfo> versions;

  // Results are immutable once written, so the cache only ever grows.
  mutable std::mutex cache_mutex;
  mutable std::map<std::uint32_t, std::shared_ptr<const ScenarioResult>> cache;
};

ScenarioStore::ScenarioStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(ErrorKind::Internal, "cannot create store '" + root_.string() + "'");
}

ScenarioStore::~ScenarioStore() = default;

std::shared_ptr<ScenarioStore::Scenario> ScenarioStore::open(const std::string& id) const {
  if (!valid_id(id)) fail_not_found("scenario '" + id + "' not found");
  std::lock_guard lock(scenarios_mutex_);
  if (auto it = scenarios_.find(id); it != scenarios_.end()) return it->second;

  const fs::path dir = root_ / id;
  if (!fs::is_regular_file(dir / "config.txt")) fail_not_found("scenario '" + id + "' not found");
  const ScenarioConfig cfg = parse_scenario_config(read_file(dir / "config.txt"), dir);
  auto s = std::make_shared<Scenario>(id, dir, cfg, build_grid(cfg.bbox, cfg.hex_max_width));
  if (fs::is_regular_file(dir / "inputs.txt")) s->inputs_digest = read_file(dir / "inputs.txt");
  std::vector<std::uint32_t> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    if (auto v = parse_version_dir(entry.path().filename().string())) found.push_back(*v);
  }
  std::sort(found.begin(), found.end());
  for (const std::uint32_t v : found) {
    const ScenarioResult r = parse_tiles_json(read_file(dir / version_dir_name(v) / "tiles.json"));
    s->versions.push_back({v, r.kind, r.flood_version_tag, r.weights, r.counts()});
    s->latest = v;
  }
  if (s->latest == 0) fail_not_found("scenario '" + id + "' has no complete version");
  scenarios_.emplace(id, s);
  return s;
}

std::shared_ptr<const ScenarioResult> ScenarioStore::commit(Scenario& s, ScenarioResult r,
                                                            const std::string* flood_bytes) {
  const auto t0 = Clock::now();
  std::uint32_t version = 0;
  {
    std::shared_lock lock(s.state_mutex);
    version = s.latest + 1;
  }
  r.scenario_id = s.id;
  r.version = version;
  if (r.audit && r.kind != UpdateKind::Flood) r.audit.reset();

  staged("persist", [&] {
    const fs::path final_dir = s.dir / version_dir_name(version);
    const fs::path tmp = s.dir / (".tmp-" + version_dir_name(version) + "-" +
                                  std::to_string(::getpid()));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    if (flood_bytes) write_file(tmp / "flood.geojson", *flood_bytes);
    write_file(tmp / "priomap.geojson", priomap_geojson(s.grid, r));
    write_file(tmp / "tiles.json", tiles_json(r));
    write_file(tmp / "manifest.txt", manifest_text(r, s.inputs_digest));
    r.timings.persist_ms = elapsed_ms(t0);
    r.timings.total_ms = r.timings.ingest_ms + r.timings.evidence_ms + r.timings.inference_ms +
                         r.timings.prioritize_ms + r.timings.persist_ms;
    write_file(tmp / "timings.txt", timings_text(r.timings));
    if (fs::exists(final_dir)) {
      throw Error(ErrorKind::Internal, "version directory " + final_dir.string() + " already exists");
    }
    fs::rename(tmp, final_dir);
  });

  auto shared = std::make_shared<const ScenarioResult>(std::move(r));
  {
    std::lock_guard lock(s.cache_mutex);
    s.cache[version] = shared;
  }
  {
    std::unique_lock lock(s.state_mutex);
    s.versions.push_back(
        {version, shared->kind, shared->flood_version_tag, shared->weights, shared->counts()});
    s.latest = version;
  }
  return shared;
}

std::shared_ptr<const ScenarioResult> ScenarioStore::run_scenario(const ScenarioConfig& cfg) {
  const auto t0 = Clock::now();
  auto inputs = std::make_unique<ScenarioInputs>(
      staged("ingest", [&] { return load_scenario_inputs(cfg); }));
  const std::string flood_bytes = staged("ingest", [&] { return read_file(cfg.flood); });
  const FloodLayer flood =
      staged("ingest", [&] { return parse_scenario_flood(flood_bytes, cfg.crs); });
  const double ingest_ms = elapsed_ms(t0);

  ScenarioResult r = compute_scenario(*inputs, flood, cfg.weights, cfg.clusters);
  r.kind = UpdateKind::Run;
  r.timings.ingest_ms = ingest_ms;

  std::shared_ptr<Scenario> s;
  {
    std::lock_guard lock(scenarios_mutex_);
    std::string id = cfg.name;
    for (int n = 2; scenarios_.count(id) || fs::exists(root_ / id); ++n) {
      id = cfg.name + "-" + std::to_string(n);
    }
    const fs::path dir = root_ / id;
    staged("persist", [&] {
      fs::create_directories(dir);
      write_file(dir / "config.txt", format_scenario_config(cfg));
      write_file(dir / "cpt.txt", inputs->cpt_text);
      write_file(dir / "inputs.txt", inputs->inputs_digest);
    });
    s = std::make_shared<Scenario>(id, dir, cfg, inputs->grid);
    s->inputs_digest = inputs->inputs_digest;
    scenarios_.emplace(id, s);
  }
  std::lock_guard write(s->write_mutex);
  s->inputs = std::move(inputs);
  return commit(*s, std::move(r), &flood_bytes);
}

std::shared_ptr<const ScenarioResult> ScenarioStore::update_flood(const std::string& id,
                                                                  const fs::path& flood_file) {
  open(id);
  std::string bytes = staged("ingest", [&] { return read_file(flood_file); });
  return update_flood_text(id, std::move(bytes));
}

std::shared_ptr<const ScenarioResult> ScenarioStore::update_flood_text(const std::string& id,
                                                                       std::string geojson) {
  const std::shared_ptr<Scenario> s = open(id);
  std::lock_guard write(s->write_mutex);
  const auto t0 = Clock::now();
  if (!s->inputs) {
    auto loaded = std::make_unique<ScenarioInputs>(
        staged("ingest", [&] { return load_scenario_inputs(s->config); }));
    if (!s->inputs_digest.empty() && loaded->inputs_digest != s->inputs_digest) {
      fail_validation("ingest: static input layers of scenario '" + id +
                      "' changed since it was created");
    }
    s->inputs = std::move(loaded);
  }
  const FloodLayer flood =
      staged("ingest", [&] { return parse_scenario_flood(geojson, s->config.crs); });
  const double ingest_ms = elapsed_ms(t0);

  const std::shared_ptr<const ScenarioResult> prev = result(id);
  ScenarioResult r = compute_scenario(*s->inputs, flood, prev->weights, prev->clusters);
  r.kind = UpdateKind::Flood;
  r.source_version = prev->version;
  r.timings.ingest_ms = ingest_ms;
  r.audit = audit_monotonicity(*prev, r);
  return commit(*s, std::move(r), &geojson);
}

std::shared_ptr<const ScenarioResult> ScenarioStore::update_weights(const std::string& id,
                                                                    const WeightVector& w) {
  const std::shared_ptr<Scenario> s = open(id);
  std::lock_guard write(s->write_mutex);
  const std::shared_ptr<const ScenarioResult> prev = result(id);
  ScenarioResult r = reprioritize(*prev, w);
  r.kind = UpdateKind::Weights;
  // A weights version shares the flood snapshot of the version it came from.
  r.source_version = prev->kind == UpdateKind::Weights ? prev->source_version : prev->version;
  return commit(*s, std::move(r), nullptr);
}

std::vector<std::string> ScenarioStore::scenarios() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && valid_id(name) && fs::is_regular_file(entry.path() / "config.txt")) {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VersionInfo> ScenarioStore::versions(const std::string& id) const {
  const std::shared_ptr<Scenario> s = open(id);
  std::shared_lock lock(s->state_mutex);
  return s->versions;
}

std::uint32_t ScenarioStore::latest_version(const std::string& id) const {
  const std::shared_ptr<Scenario> s = open(id);
  std::shared_lock lock(s->state_mutex);
  return s->latest;
}

std::shared_ptr<const ScenarioResult> ScenarioStore::result(
    const std::string& id, std::optional<std::uint32_t> version) const {
  const std::shared_ptr<Scenario> s = open(id);
  std::uint32_t v = 0;
  {
    std::shared_lock lock(s->state_mutex);
    v = version.value_or(s->latest);
    if (v == 0 || v > s->latest) {
      fail_not_found("scenario '" + id + "' has no version " + std::to_string(v));
    }
  }
  {
    std::lock_guard lock(s->cache_mutex);
    if (auto it = s->cache.find(v); it != s->cache.end()) return it->second;
  }
  const fs::path dir = s->dir / version_dir_name(v);
  ScenarioResult r = parse_tiles_json(read_file(dir / "tiles.json"));
  r.scenario_id = id;
  if (fs::is_regular_file(dir / "timings.txt")) r.timings = parse_timings(read_file(dir / "timings.txt"));
  auto shared = std::make_shared<const ScenarioResult>(std::move(r));
  std::lock_guard lock(s->cache_mutex);
  return s->cache.emplace(v, shared).first->second;
}

std::string ScenarioStore::priomap(const std::string& id, std::optional<std::uint32_t> version) const {
  const auto r = result(id, version);
  return read_file(root_ / id / version_dir_name(r->version) / "priomap.geojson");
}

std::string ScenarioStore::tile_detail(const std::string& id, TileId tile,
                                       std::optional<std::uint32_t> version) const {
  const auto r = result(id, version);
  try {
    return tile_detail_json(grid(id), *r, tile);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Internal) throw;
    fail_not_found("tile " + to_string(tile) + " not found in scenario '" + id + "'");
  }
}

std::string ScenarioStore::summary(const std::string& id, std::optional<std::uint32_t> version) const {
  return summary_json(*result(id, version));
}

std::string ScenarioStore::versions_json(const std::string& id) const {
  const std::shared_ptr<Scenario> s = open(id);
  std::shared_lock lock(s->state_mutex);
  json list = json::array();
  for (const VersionInfo& v : s->versions) {
    list.push_back({{"version", v.version},
                    {"kind", std::string(to_string(v.kind))},
                    {"flood_version_tag", v.flood_version_tag},
                    {"weights", weights_json(v.weights)},
                    {"counts", counts_json(v.counts)}});
  }
  const json doc{{"scenario", id}, {"version", s->latest}, {"versions", list}};
  return doc.dump();
}

const HexGrid& ScenarioStore::grid(const std::string& id) const { return open(id)->grid; }

}  // namespace floodprio
