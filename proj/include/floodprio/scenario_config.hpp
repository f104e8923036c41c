#pragma once

// Scenario configuration, "key = value" lines with '#' comments:
//
//   name = synthetic-city
//   crs = EPSG:25832
//   bbox = 0 0 3000 2400                  # min_x min_y max_x max_y
//   hex_max_width = 420
//   flood = flood.geojson                 # paths relative to the config file
//   buildings = buildings.geojson
//   facilities = facilities.geojson
//   roads = roads.geojson
//   destination = west-hub 150 1200       # repeatable: label x y
//   max_snap = 75
//   weights = 0 0.33 0.66 1               # optional
//   clusters = 3                          # optional
//   density_percentiles = 0.75 0.90       # optional
//   cpt = risk_table.txt                  # optional, default generator

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "floodprio/evidence.hpp"
#include "floodprio/geo_ingest.hpp"
#include "floodprio/prioritizer.hpp"

namespace floodprio {

struct ScenarioConfig {
  std::string name = "scenario";
  std::string crs;
  Box bbox;
  double hex_max_width = 0.0;
  std::filesystem::path flood;
  std::filesystem::path buildings;
  std::filesystem::path facilities;
  std::filesystem::path roads;
  std::optional<std::filesystem::path> cpt;
  std::vector<LabelledPoint> destinations;
  double max_snap = 100.0;
  WeightVector weights;
  std::size_t clusters = kDefaultClusters;
  PercentileLevels density_levels;
};

// Relative paths are resolved against base_dir. Checks value ranges; file
// existence is checked by validate_inputs_exist.
ScenarioConfig parse_scenario_config(std::string_view text, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

// Canonical text with absolute paths. parse(format(c)) == c.
std::string format_scenario_config(const ScenarioConfig& cfg);

void validate_inputs_exist(const ScenarioConfig& cfg);

}  // namespace floodprio
