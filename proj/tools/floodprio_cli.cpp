// Command line front end. Exit codes: 0 ok, 2 validation, 3 not found,
// 4 internal.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "floodprio/error.hpp"
#include "floodprio/http_service.hpp"
#include "floodprio/pipeline.hpp"
#include "floodprio/risk_network.hpp"

namespace fs = std::filesystem;
using namespace floodprio;

namespace {

fs::path default_store() {
  if (const char* env = std::getenv("FLOODPRIO_STORE")) return env;
  return "scenarios";
}

std::optional<std::uint32_t> optional_version(std::uint32_t v) {
  if (v == 0) return std::nullopt;
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flood response prioritisation engine"};
  app.require_subcommand(1);
  fs::path store_root = default_store();
  app.add_option("--store", store_root, "Scenario store directory (env FLOODPRIO_STORE)");

  fs::path config_path;
  auto* run = app.add_subcommand("run", "Run the full pipeline for a scenario config");
  run->add_option("--config", config_path, "Scenario config file")->required();

  std::string scenario;
  fs::path flood_path;
  auto* update_flood = app.add_subcommand("update-flood", "Recompute with a new flood snapshot");
  update_flood->add_option("--scenario", scenario)->required();
  update_flood->add_option("--flood", flood_path, "Flood GeoJSON")->required();

  std::string weights_text;
  auto* update_weights = app.add_subcommand("update-weights", "Re-prioritise with new weights");
  update_weights->add_option("--scenario", scenario)->required();
  update_weights->add_option("--weights", weights_text, "n,l,m,h")->required();

  std::uint32_t version = 0;
  fs::path out_path;
  auto* exp = app.add_subcommand("export", "Write a priority map GeoJSON");
  exp->add_option("--scenario", scenario)->required();
  exp->add_option("--version", version, "Version (default latest)");
  exp->add_option("--out", out_path, "Output file")->required();

  auto* summary = app.add_subcommand("summary", "Print the summary of a version");
  summary->add_option("--scenario", scenario)->required();
  summary->add_option("--version", version, "Version (default latest)");

  auto* versions = app.add_subcommand("versions", "List the versions of a scenario");
  versions->add_option("--scenario", scenario)->required();

  std::uint32_t tile = 0;
  auto* tile_cmd = app.add_subcommand("tile", "Print the detail of one tile");
  tile_cmd->add_option("--scenario", scenario)->required();
  tile_cmd->add_option("--tile", tile)->required();
  tile_cmd->add_option("--version", version, "Version (default latest)");

  fs::path cpt_path;
  auto* check_cpt = app.add_subcommand("check-cpt", "Validate a risk table configuration");
  check_cpt->add_option("--cpt", cpt_path, "Table configuration")->required();

  ServerOptions server;
  fs::path static_dir;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--host", server.host);
  serve->add_option("--port", server.port);
  serve->add_option("--static", static_dir, "Directory served at /");
  serve->add_option("--config-base", server.config_base,
                    "Directory that relative paths in posted configs resolve against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code_for(ErrorKind::Validation);
  }

  try {
    if (*check_cpt) {
      const bn::DiscreteNetwork net = build_risk_network(cpt_path);
      std::cout << "ok: " << net.table(std::string(node::kRisk)).row_count() << " rows, 0 violations\n";
      return 0;
    }

    ScenarioStore store(store_root);
    if (*run) {
      const auto r = store.run_scenario(load_scenario_config(config_path));
      std::cout << summary_json(*r) << "\n";
    } else if (*update_flood) {
      std::cout << summary_json(*store.update_flood(scenario, flood_path)) << "\n";
    } else if (*update_weights) {
      std::cout << summary_json(*store.update_weights(scenario, parse_weights(weights_text))) << "\n";
    } else if (*exp) {
      const auto r = store.result(scenario, optional_version(version));
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      out << store.priomap(scenario, r->version);
      if (!out) throw Error(ErrorKind::Internal, "cannot write '" + out_path.string() + "'");
      std::cout << out_path.string() << " (version " << r->version << ")\n";
    } else if (*summary) {
      std::cout << store.summary(scenario, optional_version(version)) << "\n";
    } else if (*versions) {
      std::cout << store.versions_json(scenario) << "\n";
    } else if (*tile_cmd) {
      std::cout << store.tile_detail(scenario, TileId{tile}, optional_version(version)) << "\n";
    } else if (*serve) {
      if (!static_dir.empty()) server.static_dir = static_dir;
      HttpService http(store, server);
      const int port = http.bind();
      std::cerr << "listening on " << server.host << ":" << port << "\n";
      http.serve();
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(ErrorKind::Internal);
  }
}
