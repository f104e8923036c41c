#include "floodprio/scenario_config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "floodprio/error.hpp"
#include "floodprio/text_format.hpp"

namespace floodprio {

namespace {

std::filesystem::path resolve_path(const std::string& value, const std::filesystem::path& base) {
  std::filesystem::path p(value);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::string_view text, const std::filesystem::path& base_dir) {
  ScenarioConfig cfg;
  std::set<std::string> seen;
  const std::filesystem::path base = std::filesystem::absolute(base_dir);
  for (const KeyValue& kv : parse_key_values(text)) {
    const std::string at = "line " + std::to_string(kv.line) + " (" + kv.key + ")";
    if (kv.key != "destination" && !seen.insert(kv.key).second) {
      fail_validation(at + ": key given twice");
    }
    if (kv.key == "name") {
      cfg.name = kv.value;
    } else if (kv.key == "crs") {
      cfg.crs = kv.value;
    } else if (kv.key == "bbox") {
      const auto v = parse_number_list(kv.value, at);
      if (v.size() != 4) fail_validation(at + ": expected min_x min_y max_x max_y");
      cfg.bbox = {v[0], v[1], v[2], v[3]};
    } else if (kv.key == "hex_max_width") {
      cfg.hex_max_width = parse_number(kv.value, at);
    } else if (kv.key == "flood") {
      cfg.flood = resolve_path(kv.value, base);
    } else if (kv.key == "buildings") {
      cfg.buildings = resolve_path(kv.value, base);
    } else if (kv.key == "facilities") {
      cfg.facilities = resolve_path(kv.value, base);
    } else if (kv.key == "roads") {
      cfg.roads = resolve_path(kv.value, base);
    } else if (kv.key == "cpt") {
      cfg.cpt = resolve_path(kv.value, base);
    } else if (kv.key == "destination") {
      const auto t = tokens(kv.value);
      if (t.size() != 3) fail_validation(at + ": expected <label> <x> <y>");
      cfg.destinations.push_back({t[0], {parse_number(t[1], at), parse_number(t[2], at)}});
    } else if (kv.key == "max_snap") {
      cfg.max_snap = parse_number(kv.value, at);
    } else if (kv.key == "weights") {
      cfg.weights = parse_weights(kv.value);
    } else if (kv.key == "clusters") {
      const double k = parse_number(kv.value, at);
      if (k < 1 || k > 16 || k != std::floor(k)) fail_validation(at + ": expected an integer in [1, 16]");
      cfg.clusters = static_cast<std::size_t>(k);
    } else if (kv.key == "density_percentiles") {
      const auto v = parse_number_list(kv.value, at);
      if (v.size() != 2) fail_validation(at + ": expected two levels");
      cfg.density_levels = {v[0], v[1]};
    } else {
      fail_validation(at + ": unknown key");
    }
  }

  if (cfg.crs.empty()) fail_validation("config: crs is required");
  if (cfg.flood.empty() || cfg.buildings.empty() || cfg.facilities.empty() || cfg.roads.empty()) {
    fail_validation("config: flood, buildings, facilities and roads are required");
  }
  if (!(cfg.bbox.width() > 0.0) || !(cfg.bbox.height() > 0.0)) {
    fail_validation("config: bbox must have positive width and height");
  }
  if (!(cfg.hex_max_width > 0.0)) fail_validation("config: hex_max_width must be positive");
  if (cfg.destinations.empty()) fail_validation("config: at least one destination is required");
  if (!(cfg.max_snap >= 0.0)) fail_validation("config: max_snap must be non-negative");
  const PercentileLevels& lv = cfg.density_levels;
  if (!(lv.medium > 0.0 && lv.medium < lv.high && lv.high < 1.0)) {
    fail_validation("config: density_percentiles must be strictly increasing in (0, 1)");
  }
  for (const char c : cfg.name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') {
      fail_validation("config: name may only contain letters, digits, '-' and '_'");
    }
  }
  if (cfg.name.empty()) fail_validation("config: name must not be empty");
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  return parse_scenario_config(read_file(path), path.parent_path());
}

std::string format_scenario_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out << "name = " << cfg.name << "\n";
  out << "crs = " << cfg.crs << "\n";
  const double box[4] = {cfg.bbox.min_x, cfg.bbox.min_y, cfg.bbox.max_x, cfg.bbox.max_y};
  out << "bbox = " << format_number_list(box) << "\n";
  out << "hex_max_width = " << format_number(cfg.hex_max_width) << "\n";
  out << "flood = " << cfg.flood.string() << "\n";
  out << "buildings = " << cfg.buildings.string() << "\n";
  out << "facilities = " << cfg.facilities.string() << "\n";
  out << "roads = " << cfg.roads.string() << "\n";
  if (cfg.cpt) out << "cpt = " << cfg.cpt->string() << "\n";
  for (const LabelledPoint& d : cfg.destinations) {
    out << "destination = " << d.label << " " << format_number(d.location.x) << " "
        << format_number(d.location.y) << "\n";
  }
  out << "max_snap = " << format_number(cfg.max_snap) << "\n";
  out << "weights = " << format_weights(cfg.weights) << "\n";
  out << "clusters = " << cfg.clusters << "\n";
  out << "density_percentiles = " << format_number(cfg.density_levels.medium) << " "
      << format_number(cfg.density_levels.high) << "\n";
  return out.str();
}

void validate_inputs_exist(const ScenarioConfig& cfg) {
  std::vector<std::filesystem::path> paths{cfg.flood, cfg.buildings, cfg.facilities, cfg.roads};
  if (cfg.cpt) paths.push_back(*cfg.cpt);
  for (const auto& p : paths) {
    if (!std::filesystem::is_regular_file(p)) {
      fail_validation("input file '" + p.string() + "' does not exist");
    }
  }
}

}  // namespace floodprio
