#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "pushgne/experiment.hpp"
#include "pushgne/solvers.hpp"

using namespace pushgne;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pushgne_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

json small_market(std::size_t horizon) {
  json doc = preset_json("paper-online");
  doc["name"] = "small";
  doc["horizon"] = horizon;
  doc["runs"] = 2;
  doc["scenario"]["players"] = 4;
  return doc;
}

}  // namespace

TEST_CASE("config errors point at the line and field") {
  const std::string syntax = "{\n  \"name\": \"x\",\n  \"horizon\": 10,,\n}";
  CHECK(error_of(syntax).find("line 3") != std::string::npos);

  const std::string bad_field =
      "{\n  \"name\": \"x\",\n  \"scenario\": {\"id\": \"quadratic-toy\"},\n  \"graph\": {\"id\": \"ring\"},\n"
      "  \"horizon\": \"long\"\n}";
  const auto e = error_of(bad_field);
  CHECK(e.find("line 5") != std::string::npos);
  CHECK(e.find("horizon") != std::string::npos);

  const auto unknown = error_of("{\"scenario\": {\"id\": \"quadratic-toy\"}, \"graph\": {\"id\": \"ring\"}, \"colour\": 1}");
  CHECK(unknown.find("colour") != std::string::npos);

  CHECK_THROWS_AS(config_from_json(json{{"scenario", {{"id", "x"}}}, {"graph", {{"id", "ring"}, {"file", "g.json"}}}}),
                  ConfigError);
}

TEST_CASE("presets round-trip and validate") {
  for (const char* name : {"paper-online", "paper-offline"}) {
    const auto c = preset(name);
    CHECK(config_from_json(c.to_json()).to_json() == c.to_json());
    const auto v = validate_config(c);
    CHECK(v.ok());
  }
  CHECK(preset("paper-online").horizon == 100000);
  CHECK_THROWS_AS(preset("paper-nope"), ConfigError);
}

TEST_CASE("overrides") {
  json doc = preset_json("paper-online");
  apply_override(doc, "stepsizes.a1=0.7");
  apply_override(doc, "name=renamed");
  CHECK(doc["stepsizes"]["a1"] == 0.7);
  CHECK(doc["name"] == "renamed");
  CHECK_THROWS_AS(apply_override(doc, "nothing"), ConfigError);
  CHECK_THROWS_AS(apply_override(doc, "name.x=1"), ConfigError);
}

TEST_CASE("validation failures are reported per check") {
  SUBCASE("regime") {
    json doc = preset_json("paper-online");
    doc["stepsizes"] = {{"a1", 0.5}, {"a2", 0.3}, {"a3", 0.2}};
    const auto v = validate_config(config_from_json(doc));
    CHECK(v.graph.ok());
    CHECK_FALSE(v.regime.ok());
  }
  SUBCASE("graph file without self-loops") {
    const auto dir = scratch("noloops");
    const auto file = dir / "g.json";
    std::ofstream(file) << R"({"nodes": 3, "slots": [{"matrix": [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]]}]})";
    json doc = preset_json("paper-online");
    doc["scenario"]["players"] = 3;
    doc["graph"] = {{"file", file.string()}};
    const auto v = validate_config(config_from_json(doc));
    CHECK_FALSE(v.graph.ok());
    std::ostringstream out;
    CHECK(cmd_validate(config_from_json(doc), out) != 0);
  }
  SUBCASE("unknown scenario") {
    json doc = preset_json("paper-online");
    doc["scenario"]["id"] = "gas-market";
    try {
      validate_config(config_from_json(doc));
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("gas-market") != std::string::npos);
    }
  }
}

TEST_CASE("seeds are split per run") {
  const auto c = preset("paper-online");
  const auto a = seeds_for(c, 0), b = seeds_for(c, 1);
  CHECK(a.run != b.run);
  CHECK(a.noise != a.model);
  json doc = preset_json("paper-online");
  doc["scenario"]["seed"] = 77;
  CHECK(seeds_for(config_from_json(doc), 3).model == 77);
}

TEST_CASE("batch runs are reproducible") {
  auto c = config_from_json(small_market(300));
  std::string hashes[2];
  for (int rep = 0; rep < 2; ++rep) {
    const auto dir = scratch("repro" + std::to_string(rep));
    c.output_dir = dir.string();
    BatchOptions b;
    b.workers = rep + 1;
    std::ostringstream out, err;
    REQUIRE(cmd_run(c, b, out, err) == 0);
    for (const char* f : {"run_0_series.csv", "run_1_series.csv", "summary.csv", "rate_fits.csv", "manifest.json"})
      CHECK(fs::file_size(dir / f) > 0);
    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["config_hash"] == config_hash(c));
    CHECK(manifest["version"] == kVersion);
    hashes[rep] = manifest["outputs_hash"].get<std::string>();
  }
  CHECK(hashes[0] == hashes[1]);
}

TEST_CASE("solve writes the vGNE and comparators") {
  SUBCASE("quadratic toy") {
    json doc = small_market(10);
    doc["scenario"] = {{"id", "quadratic-toy"}, {"players", 3}, {"time_varying", false}};
    const auto dir = scratch("solve_toy");
    doc["output"]["dir"] = dir.string();
    std::ostringstream out, err;
    REQUIRE(cmd_solve(config_from_json(doc), std::nullopt, 0, out, err) == 0);
    const auto j = json::parse(slurp(dir / "vgne.json"));
    CHECK(j["residuals"]["total"].get<double>() <= 1e-8);
    CHECK(j["x_star"].size() == 3);
  }
  SUBCASE("market with a comparator pass over a logged run") {
    json doc = small_market(10);
    doc["scenario"]["time_varying"] = false;
    doc["runs"] = 1;
    const auto dir = scratch("solve_market");
    doc["output"]["dir"] = dir.string();
    const auto c = config_from_json(doc);
    std::ostringstream out, err;
    REQUIRE(cmd_run(c, {}, out, err) == 0);
    const auto log = (dir / "run_0_series.csv").string();
    REQUIRE(cmd_solve(c, log, 0, out, err) == 0);
    const auto v = json::parse(slurp(dir / "vgne.json"));
    CHECK(v["residuals"]["total"].get<double>() <= 1e-8);
    CHECK(v["grid_check"]["agrees"] == true);
    const auto comp = json::parse(slurp(dir / "comparator.json"));
    REQUIRE(comp.size() == 4);
    for (const auto& p : comp) {
      CHECK(p["horizon"] == 10);
      CHECK(p["feasible"] == true);
    }
    REQUIRE(cmd_metrics(c, {log}, out, err) == 0);
    CHECK(fs::file_size(dir / "metrics_summary.csv") > 0);
  }
  SUBCASE("time-varying without a log") {
    std::ostringstream out, err;
    auto c = config_from_json(small_market(10));
    c.output_dir = scratch("solve_tv").string();
    CHECK(cmd_solve(c, std::nullopt, 0, out, err) == 2);
  }
}

#ifdef PUSHGNE_CLI
TEST_CASE("command-line binary") {
  const auto dir = scratch("cli");
  const std::string cli = PUSHGNE_CLI;
  auto sh = [](const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); };
  CHECK(sh(cli + " --version") == 0);
  CHECK(sh(cli + " validate --preset paper-online") == 0);
  CHECK(sh(cli + " validate --preset paper-online --set stepsizes.a1=0.3") != 0);
  const int bad = sh(cli + " run --config " + (dir / "missing.json").string());
  CHECK(WEXITSTATUS(bad) == 2);
  CHECK(sh(cli + " run --preset paper-online --set horizon=50 --set scenario.players=3 --runs 1 --out " +
           (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(sh(cli + " metrics --preset paper-online --set horizon=50 --set scenario.players=3 --runs 1 --out " +
           (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "metrics_summary.csv"));
}
#endif
