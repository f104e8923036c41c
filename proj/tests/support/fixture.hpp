#pragma once

// Synthetic-city fixture access and scratch directories for store tests.

#include <filesystem>
#include <string>

#include "floodprio/pipeline.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fixture {

inline std::filesystem::path dir() { return oracle::fixture_dir(); }

inline std::filesystem::path flood_step(int k) {
  return dir() / ("flood_step" + std::to_string(k) + ".geojson");
}

inline floodprio::ScenarioConfig config() {
  return floodprio::load_scenario_config(dir() / "scenario.txt");
}

inline const floodprio::ScenarioInputs& inputs() {
  static const floodprio::ScenarioInputs in = floodprio::load_scenario_inputs(config());
  return in;
}

inline floodprio::FloodLayer flood(const std::filesystem::path& p) {
  return floodprio::parse_scenario_flood(floodprio::read_file(p), config().crs);
}

// Empty directory under the build tree, wiped on creation.
inline std::filesystem::path scratch(const std::string& name) {
  const std::filesystem::path p =
      std::filesystem::path(FLOODPRIO_BINARY_DIR) / "test-scratch" / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline nlohmann::json oracle_cases() {
  static const nlohmann::json doc = nlohmann::json::parse(
      floodprio::read_file(oracle::source_dir() / "tests" / "data" / "oracle_synthetic_city.json"));
  return doc;
}

}  // namespace fixture
