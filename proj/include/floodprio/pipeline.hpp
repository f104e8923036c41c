#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "floodprio/bayesnet.hpp"
#include "floodprio/evidence.hpp"
#include "floodprio/prioritizer.hpp"
#include "floodprio/scenario_config.hpp"

namespace floodprio {

enum class UpdateKind { Run, Flood, Weights };

std::string_view to_string(UpdateKind k);
UpdateKind parse_update_kind(std::string_view s);

// Milliseconds per stage. A weights update only spends time in prioritize
// and persist.
struct StageTimings {
  double ingest_ms = 0.0;
  double evidence_ms = 0.0;
  double inference_ms = 0.0;
  double prioritize_ms = 0.0;
  double persist_ms = 0.0;
  double total_ms = 0.0;
};

struct TileResult {
  EvidenceBundle evidence;
  RiskPosterior posterior{};
  double pdc = 0.0;
  PriorityCategory category = PriorityCategory::Safe;
  int cluster = -1;
};

// Comparison of a flood update against the version it replaced.
struct MonotonicityAudit {
  std::uint32_t baseline_version = 0;
  std::size_t immediate_increases = 0;  // tiles whose immediate_unexposed rose
  std::size_t became_accessible = 0;    // remote access false -> true
  std::size_t safe_before = 0;
  std::size_t safe_after = 0;

  bool monotone() const {
    return immediate_increases == 0 && became_accessible == 0 && safe_after <= safe_before;
  }
};

struct ScenarioResult {
  std::string scenario_id;
  std::uint32_t version = 0;
  UpdateKind kind = UpdateKind::Run;
  std::uint32_t source_version = 0;  // 0 for the initial run
  std::string crs;
  std::string flood_version_tag;
  std::string config_hash;
  WeightVector weights;
  std::size_t clusters = kDefaultClusters;
  std::string method;
  std::vector<double> centroids;
  std::optional<DensityThresholds> thresholds;
  std::vector<Destination> destinations;
  std::vector<TileResult> tiles;  // indexed by tile id
  std::optional<MonotonicityAudit> audit;
  StageTimings timings;

  std::array<std::size_t, 4> counts() const;  // indexed by PriorityCategory
};

// Everything a flood update reuses: grid, static layers and the network.
struct ScenarioInputs {
  ScenarioConfig config;
  HexGrid grid;
  BuildingSet buildings;
  FacilitySet facilities;
  RoadNetwork roads;
  bn::DiscreteNetwork network;
  std::string cpt_text;       // canonical form of the table configuration
  std::string config_hash;    // over the canonical config and table texts
  std::string inputs_digest;  // "layer = fnv1a:<hash>" lines for the static inputs
};

ScenarioInputs load_scenario_inputs(const ScenarioConfig& cfg);

// Full pipeline for one flood snapshot. Fills everything but id, version,
// kind and timings of the persist stage.
ScenarioResult compute_scenario(const ScenarioInputs& in, const FloodLayer& flood,
                                const WeightVector& w, std::size_t k);

// Short path: pdc and categories from the posteriors already in prev.
ScenarioResult reprioritize(const ScenarioResult& prev, const WeightVector& w);

MonotonicityAudit audit_monotonicity(const ScenarioResult& before, const ScenarioResult& after);

// Output documents. None of them carries timings or the scenario id, so
// identical inputs give identical bytes.
std::string priomap_geojson(const HexGrid& grid, const ScenarioResult& r);
std::string tiles_json(const ScenarioResult& r);
ScenarioResult parse_tiles_json(std::string_view text);
std::string manifest_text(const ScenarioResult& r, std::string_view inputs_digest);
std::string timings_text(const StageTimings& t);

// Parses flood GeoJSON and checks its crs against the scenario's.
FloodLayer parse_scenario_flood(std::string_view geojson, const std::string& crs);

std::string tile_detail_json(const HexGrid& grid, const ScenarioResult& r, TileId id);
std::string summary_json(const ScenarioResult& r);

struct VersionInfo {
  std::uint32_t version = 0;
  UpdateKind kind = UpdateKind::Run;
  std::string flood_version_tag;
  WeightVector weights;
  std::array<std::size_t, 4> counts{};
};

// Versioned scenario persistence. Layout:
//
//   <root>/<id>/config.txt        canonical configuration
//   <root>/<id>/cpt.txt           canonical table configuration
//   <root>/<id>/inputs.txt        digests of the static input layers
//   <root>/<id>/vNNNN/manifest.txt
//                     flood.geojson   (flood updates and the initial run)
//                     priomap.geojson
//                     tiles.json
//                     timings.txt
//
// Version directories are written under a temporary name and renamed into
// place, so a directory named vNNNN is always complete. Writes to a scenario
// are serialised; readers only ever see complete versions.
class ScenarioStore {
 public:
  explicit ScenarioStore(std::filesystem::path root);
  ~ScenarioStore();

  ScenarioStore(const ScenarioStore&) = delete;
  ScenarioStore& operator=(const ScenarioStore&) = delete;

  const std::filesystem::path& root() const { return root_; }

  std::shared_ptr<const ScenarioResult> run_scenario(const ScenarioConfig& cfg);
  std::shared_ptr<const ScenarioResult> update_flood(const std::string& id,
                                                     const std::filesystem::path& flood_file);
  std::shared_ptr<const ScenarioResult> update_flood_text(const std::string& id,
                                                          std::string geojson);
  std::shared_ptr<const ScenarioResult> update_weights(const std::string& id,
                                                       const WeightVector& w);

  std::vector<std::string> scenarios() const;
  std::vector<VersionInfo> versions(const std::string& id) const;
  std::uint32_t latest_version(const std::string& id) const;

  // version = nullopt reads the latest complete version.
  std::shared_ptr<const ScenarioResult> result(const std::string& id,
                                               std::optional<std::uint32_t> version = {}) const;
  std::string priomap(const std::string& id, std::optional<std::uint32_t> version = {}) const;
  std::string tile_detail(const std::string& id, TileId tile,
                          std::optional<std::uint32_t> version = {}) const;
  std::string summary(const std::string& id, std::optional<std::uint32_t> version = {}) const;
  std::string versions_json(const std::string& id) const;

  const HexGrid& grid(const std::string& id) const;

 private:
  struct Scenario;

  std::shared_ptr<Scenario> open(const std::string& id) const;
  std::shared_ptr<const ScenarioResult> commit(Scenario& s, ScenarioResult r,
                                               const std::string* flood_bytes);

  std::filesystem::path root_;
  mutable std::mutex scenarios_mutex_;
  mutable std::map<std::string, std::shared_ptr<Scenario>> scenarios_;
};

std::string version_dir_name(std::uint32_t version);

}  // namespace floodprio
