#include <atomic>
#include <thread>

#include "doctest.h"
#include "fixture.hpp"
#include "floodprio/error.hpp"
#include "floodprio/pipeline.hpp"

using namespace floodprio;
using nlohmann::json;

namespace {

WeightVector weights_of(const json& w) {
  return {w[0].get<double>(), w[1].get<double>(), w[2].get<double>(), w[3].get<double>()};
}

void check_against_oracle(const ScenarioResult& r, const json& expected) {
  const HexGrid& grid = fixture::inputs().grid;
  REQUIRE(r.tiles.size() == expected["tiles"].size());
  for (std::size_t i = 0; i < r.tiles.size(); ++i) {
    const TileResult& t = r.tiles[i];
    const json& e = expected["tiles"][i];
    INFO("tile " << i);
    CHECK(grid.tile(TileId{static_cast<std::uint32_t>(i)}).axial ==
          Axial{e["q"].get<int>(), e["r"].get<int>()});
    CHECK(t.evidence.exposed_building_count == e["exposed_count"].get<std::int64_t>());
    CHECK(to_string(t.evidence.density) == e["density"].get<std::string>());
    CHECK(t.evidence.facility_exposed == e["facility_exposed"].get<bool>());
    CHECK(t.evidence.remote_accessible == e["remote_accessible"].get<bool>());
    CHECK(std::abs(t.evidence.immediate_unexposed - e["immediate_unexposed"].get<double>()) < 1e-9);
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(std::abs(t.posterior[s] - e["posterior"][s].get<double>()) < 1e-12);
    }
    CHECK(std::abs(t.pdc - e["pdc"].get<double>()) < 1e-12);
    CHECK(to_string(t.category) == e["category"].get<std::string>());
  }
  const auto c = r.counts();
  CHECK(c[0] == expected["counts"]["Safe"].get<std::size_t>());
  CHECK(c[1] == expected["counts"]["Exposed"].get<std::size_t>());
  CHECK(c[2] == expected["counts"]["Priority"].get<std::size_t>());
  CHECK(c[3] == expected["counts"]["HighPriority"].get<std::size_t>());
  if (expected["thresholds"].is_null()) {
    CHECK_FALSE(r.thresholds.has_value());
  } else {
    REQUIRE(r.thresholds.has_value());
    CHECK(r.thresholds->medium_count == expected["thresholds"][0].get<std::int64_t>());
    CHECK(r.thresholds->high_count == expected["thresholds"][1].get<std::int64_t>());
  }
  REQUIRE(r.centroids.size() == expected["centroids"].size());
  for (std::size_t k = 0; k < r.centroids.size(); ++k) {
    CHECK(std::abs(r.centroids[k] - expected["centroids"][k].get<double>()) < 1e-12);
  }
}

// Same evidence, posterior, score and category for every tile.
void check_same_tiles(const ScenarioResult& a, const ScenarioResult& b) {
  REQUIRE(a.tiles.size() == b.tiles.size());
  for (std::size_t i = 0; i < a.tiles.size(); ++i) {
    const TileResult& x = a.tiles[i];
    const TileResult& y = b.tiles[i];
    INFO("tile " << i);
    CHECK(x.evidence.density == y.evidence.density);
    CHECK(x.evidence.facility_exposed == y.evidence.facility_exposed);
    CHECK(x.evidence.remote_accessible == y.evidence.remote_accessible);
    CHECK(x.evidence.immediate_unexposed == y.evidence.immediate_unexposed);
    CHECK(x.posterior == y.posterior);
    CHECK(x.pdc == y.pdc);
    CHECK(x.category == y.category);
    CHECK(x.cluster == y.cluster);
  }
  CHECK(a.centroids == b.centroids);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Internal;
}

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("every oracle case matches tile for tile") {
    const json cases = fixture::oracle_cases();
    CHECK(cases["tile_count"].get<std::size_t>() == fixture::inputs().grid.size());
    for (const auto& [name, expected] : cases["cases"].items()) {
      INFO("case " << name);
      const FloodLayer flood = fixture::flood(fixture::dir() / expected["flood"].get<std::string>());
      const ScenarioResult r =
          compute_scenario(fixture::inputs(), flood, weights_of(expected["weights"]), 3);
      check_against_oracle(r, expected);
    }
  }

  TEST_CASE("an empty flood leaves every tile Safe") {
    const ScenarioResult r =
        compute_scenario(fixture::inputs(), fixture::flood(fixture::dir() / "flood_empty.geojson"),
                         WeightVector{}, 3);
    CHECK(r.counts()[0] == r.tiles.size());
    CHECK(r.method == "all-safe");
    for (const TileResult& t : r.tiles) CHECK(t.posterior[0] == 1.0);
  }

  TEST_CASE("reprioritize equals a full recompute with the new weights") {
    const FloodLayer flood = fixture::flood(fixture::flood_step(5));
    const ScenarioResult base = compute_scenario(fixture::inputs(), flood, WeightVector{}, 3);
    for (const WeightVector w :
         {WeightVector{0, 0.6, 0.66, 1}, WeightVector{0, 0.66, 1.32, 2}, WeightVector{0.1, 0.1, 0.5, 0.9}}) {
      check_same_tiles(reprioritize(base, w), compute_scenario(fixture::inputs(), flood, w, 3));
    }
  }

  TEST_CASE("audit of a growing flood sequence is monotone") {
    ScenarioResult prev = compute_scenario(fixture::inputs(), fixture::flood(fixture::flood_step(1)),
                                           WeightVector{}, 3);
    for (int k = 2; k <= 5; ++k) {
      const ScenarioResult next = compute_scenario(
          fixture::inputs(), fixture::flood(fixture::flood_step(k)), WeightVector{}, 3);
      const MonotonicityAudit a = audit_monotonicity(prev, next);
      CHECK(a.monotone());
      CHECK(a.safe_before == prev.counts()[0]);
      CHECK(a.safe_after == next.counts()[0]);
      prev = next;
    }
    // Going backwards is not monotone.
    const ScenarioResult first = compute_scenario(
        fixture::inputs(), fixture::flood(fixture::flood_step(1)), WeightVector{}, 3);
    CHECK_FALSE(audit_monotonicity(prev, first).monotone());
  }

  TEST_CASE("tiles.json round trip") {
    ScenarioResult r = compute_scenario(fixture::inputs(), fixture::flood(fixture::flood_step(3)),
                                        WeightVector{}, 3);
    r.version = 7;
    const std::string text = tiles_json(r);
    const ScenarioResult back = parse_tiles_json(text);
    check_same_tiles(r, back);
    CHECK(tiles_json(back) == text);
  }

  TEST_CASE("priomap document structure") {
    ScenarioResult r = compute_scenario(fixture::inputs(), fixture::flood(fixture::flood_step(2)),
                                        WeightVector{}, 3);
    r.version = 1;
    const json doc = json::parse(priomap_geojson(fixture::inputs().grid, r));
    CHECK(doc["type"] == "FeatureCollection");
    CHECK(doc["crs"]["properties"]["name"] == "EPSG:25832");
    CHECK(doc["version"] == 1);
    CHECK(doc["flood_version_tag"] == "synthetic-flood-step-2");
    CHECK(doc["clustering"]["k"] == 3);
    CHECK(doc["features"].size() == r.tiles.size());
    std::size_t total = 0;
    for (const auto& [_, n] : doc["counts"].items()) total += n.get<std::size_t>();
    CHECK(total == r.tiles.size());
    for (const json& f : doc["features"]) {
      const json& p = f["properties"];
      CHECK(f["id"] == p["tile_id"]);
      CHECK(f["geometry"]["coordinates"][0].size() == 7);
      const double sum = p["p_none"].get<double>() + p["p_low"].get<double>() +
                         p["p_medium"].get<double>() + p["p_high"].get<double>();
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.contains("immediate_unexposed"));
    }
    CHECK_FALSE(doc.contains("scenario"));
    CHECK_FALSE(doc.contains("timings"));
  }

  TEST_CASE("flood CRS must match the scenario") {
    json doc = json::parse(read_file(fixture::flood_step(1)));
    doc["crs"]["properties"]["name"] = "EPSG:4326";
    CHECK(kind_of([&] { parse_scenario_flood(doc.dump(), "EPSG:25832"); }) == ErrorKind::Validation);
    doc.erase("crs");
    CHECK(kind_of([&] { parse_scenario_flood(doc.dump(), "EPSG:25832"); }) == ErrorKind::Validation);
  }

  TEST_CASE("store: repeated runs produce byte-identical artifacts") {
    const auto a = fixture::scratch("determinism-a");
    const auto b = fixture::scratch("determinism-b");
    ScenarioStore sa(a);
    ScenarioStore sb(b);
    const auto ra = sa.run_scenario(fixture::config());
    const auto rb = sb.run_scenario(fixture::config());
    CHECK(ra->scenario_id == "synthetic-city");
    for (const char* file : {"priomap.geojson", "tiles.json", "manifest.txt", "flood.geojson"}) {
      CHECK(slurp(a / "synthetic-city" / "v0001" / file) == slurp(b / "synthetic-city" / "v0001" / file));
    }
    CHECK(slurp(a / "synthetic-city" / "config.txt") == slurp(b / "synthetic-city" / "config.txt"));
    CHECK(sa.priomap("synthetic-city") == priomap_geojson(sa.grid("synthetic-city"), *ra));

    // A second run under the same name gets a fresh id.
    const auto again = sa.run_scenario(fixture::config());
    CHECK(again->scenario_id == "synthetic-city-2");
    CHECK(sa.scenarios() == std::vector<std::string>{"synthetic-city", "synthetic-city-2"});
    CHECK(slurp(a / "synthetic-city-2" / "v0001" / "priomap.geojson") ==
          slurp(a / "synthetic-city" / "v0001" / "priomap.geojson"));
  }

  TEST_CASE("store: versions, updates, immutability and reopening") {
    const auto root = fixture::scratch("versions");
    std::string id;
    std::string v1_priomap;
    {
      ScenarioStore store(root);
      const auto r1 = store.run_scenario(fixture::config());
      id = r1->scenario_id;
      v1_priomap = store.priomap(id, 1);

      // Identical flood: new version, identical results.
      const auto r2 = store.update_flood(id, fixture::dir() / "flood.geojson");
      CHECK(r2->version == 2);
      CHECK(r2->kind == UpdateKind::Flood);
      CHECK(r2->source_version == 1);
      REQUIRE(r2->audit.has_value());
      CHECK(r2->audit->monotone());
      check_same_tiles(*r1, *r2);

      for (int k = 2; k <= 5; ++k) {
        const auto r = store.update_flood(id, fixture::flood_step(k));
        CHECK(r->audit->monotone());
        CHECK(r->flood_version_tag == "synthetic-flood-step-" + std::to_string(k));
      }
      CHECK(store.latest_version(id) == 6);

      const auto w = store.update_weights(id, WeightVector{0, 0.6, 0.66, 1});
      CHECK(w->version == 7);
      CHECK(w->kind == UpdateKind::Weights);
      CHECK(w->source_version == 6);
      const auto w2 = store.update_weights(id, WeightVector{0, 0.5, 0.66, 1});
      CHECK(w2->source_version == 6);
      CHECK_FALSE(std::filesystem::exists(root / id / "v0008" / "flood.geojson"));
      const std::string manifest = slurp(root / id / "v0008" / "manifest.txt");
      CHECK(manifest.find("flood_snapshot = ../v0006/flood.geojson") != std::string::npos);
      CHECK(manifest.find("buildings = fnv1a:") != std::string::npos);

      // A flood update keeps the latest weights.
      const auto f = store.update_flood(id, fixture::flood_step(5));
      CHECK(f->weights == WeightVector{0, 0.5, 0.66, 1});
      CHECK(store.priomap(id, 1) == v1_priomap);
    }

    ScenarioStore reopened(root);
    CHECK(reopened.latest_version(id) == 9);
    const auto versions = reopened.versions(id);
    REQUIRE(versions.size() == 9);
    CHECK(versions[6].kind == UpdateKind::Weights);
    CHECK(versions[3].flood_version_tag == "synthetic-flood-step-3");
    CHECK(reopened.priomap(id, 1) == v1_priomap);
    const auto r1 = reopened.result(id, 1);
    CHECK(priomap_geojson(reopened.grid(id), *r1) == v1_priomap);

    // Updates keep working after a restart and still carry the input digests.
    const auto w = reopened.update_weights(id, WeightVector{});
    CHECK(w->version == 10);
    CHECK(slurp(root / id / "v0010" / "manifest.txt").find("roads = fnv1a:") != std::string::npos);
    const auto f = reopened.update_flood(id, fixture::flood_step(4));
    CHECK(f->version == 11);
    CHECK_FALSE(f->audit->monotone());
  }

  TEST_CASE("store: path equivalence of updates and fresh runs") {
    const auto root = fixture::scratch("equivalence");
    ScenarioStore store(root);
    const std::string id = store.run_scenario(fixture::config())->scenario_id;
    const auto via_update = store.update_flood(id, fixture::flood_step(5));

    ScenarioConfig cfg = fixture::config();
    cfg.flood = fixture::flood_step(5);
    cfg.name = "fresh";
    const auto fresh = store.run_scenario(cfg);
    check_same_tiles(*via_update, *fresh);

    const WeightVector w{0, 0.6, 0.66, 1};
    const auto reweighted = store.update_weights(id, w);
    cfg.name = "fresh-weights";
    cfg.weights = w;
    check_same_tiles(*reweighted, *store.run_scenario(cfg));
  }

  TEST_CASE("store: tile detail and summary") {
    const auto root = fixture::scratch("detail");
    ScenarioStore store(root);
    const auto r = store.run_scenario(fixture::config());
    const std::string& id = r->scenario_id;
    bool saw_facility = false;
    for (const TileResult& t : r->tiles) {
      if (!t.evidence.facility_exposed) continue;
      saw_facility = true;
      const json d = json::parse(store.tile_detail(id, t.evidence.tile));
      CHECK(d["posterior"]["High"] == 1.0);
      CHECK(d["category"] == "HighPriority");
      CHECK(d["evidence"]["facility_exposed"] == true);
    }
    CHECK(saw_facility);
    const json s = json::parse(store.summary(id));
    std::size_t total = 0;
    for (const auto& [_, n] : s["counts"].items()) total += n.get<std::size_t>();
    CHECK(total == s["tile_count"].get<std::size_t>());
    CHECK(s["version"] == 1);
    CHECK(s["kind"] == "run");
    CHECK(s["destinations"].size() == 2);
    const json v = json::parse(store.versions_json(id));
    CHECK(v["versions"].size() == 1);
  }

  TEST_CASE("store: error kinds") {
    const auto root = fixture::scratch("errors");
    ScenarioStore store(root);
    CHECK(kind_of([&] { store.result("nope"); }) == ErrorKind::NotFound);
    CHECK(kind_of([&] { store.update_weights("nope", WeightVector{}); }) == ErrorKind::NotFound);
    CHECK(kind_of([&] { store.result("../etc"); }) != ErrorKind::Internal);
    const std::string id = store.run_scenario(fixture::config())->scenario_id;
    CHECK(kind_of([&] { store.result(id, 5); }) == ErrorKind::NotFound);
    CHECK(kind_of([&] { store.tile_detail(id, TileId{100000}); }) == ErrorKind::NotFound);
    CHECK(kind_of([&] { store.update_flood_text(id, "{}"); }) == ErrorKind::Validation);
    CHECK(kind_of([&] { store.update_flood(id, fixture::dir() / "missing.geojson"); }) ==
          ErrorKind::Validation);
    // Failed updates do not create versions.
    CHECK(store.latest_version(id) == 1);

    ScenarioConfig bad = fixture::config();
    bad.crs = "EPSG:4326";
    CHECK(kind_of([&] { store.run_scenario(bad); }) == ErrorKind::Validation);
  }

  TEST_CASE("store: readers see complete versions while a writer updates") {
    const auto root = fixture::scratch("concurrency");
    ScenarioStore store(root);
    const std::string id = store.run_scenario(fixture::config())->scenario_id;
    std::atomic<bool> done{false};
    std::atomic<int> reads{0};
    std::atomic<int> bad{0};
    std::vector<std::thread> readers;
    for (int t = 0; t < 4; ++t) {
      readers.emplace_back([&] {
        while (!done) {
          const std::uint32_t v = store.latest_version(id);
          const json doc = json::parse(store.priomap(id, v), nullptr, false);
          if (doc.is_discarded() || doc["version"] != v || doc["features"].size() != 81) ++bad;
          const auto r = store.result(id);
          if (r->version < v) ++bad;
          ++reads;
        }
      });
    }
    for (int i = 0; i < 6; ++i) {
      store.update_weights(id, i % 2 ? WeightVector{} : WeightVector{0, 0.5, 0.7, 1});
      store.update_flood(id, fixture::flood_step(1 + i % 5));
    }
    done = true;
    for (std::thread& t : readers) t.join();
    CHECK(bad == 0);
    CHECK(reads > 0);
    CHECK(store.latest_version(id) == 13);
  }
}
