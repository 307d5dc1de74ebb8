#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "mcflab/harness.hpp"
#include "mcflab/io.hpp"

using namespace mcflab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mcflab-harness-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("the experiment registry") {
  const auto& ids = experiment_ids();
  CHECK(ids.size() == 13);
  for (const char* id :
       {"exact-oracles", "bowl-translation", "rrz-asymptotics",
        "spectral-table", "rescaled-decay", "gaussian-area", "shrinker-bounds",
        "neck-mode-law", "neck-improvement", "vanishing-time", "harnack-signs",
        "neck-certify", "determinism"}) {
    CHECK(is_experiment_id(id));
    CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
  }
  CHECK_FALSE(is_experiment_id("made-up"));
  CHECK_FALSE(is_experiment_id(""));
}

TEST_CASE("protocol constants with config overrides") {
  const LabConstants def = lab_constants(Config::parse_string(""));
  CHECK(def.C1 == 10.0);
  CHECK(def.C2 == 10.0);
  CHECK(def.eps0 == 0.04);
  CHECK(def.K == 10.0);
  CHECK(def.delta == 0.05);
  const LabConstants k = lab_constants(
      Config::parse_string("constants.C1 = 4\nconstants.delta = 0.1\n"));
  CHECK(k.C1 == 4.0);
  CHECK(k.delta == 0.1);
  CHECK(k.C2 == 10.0);
}

TEST_CASE("unknown ids and config keys fail before anything is written") {
  const auto dir = scratch_dir("guards");
  CHECK_THROWS_AS(run_experiment("made-up", Config::parse_string(""), dir, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_experiment("spectral-table",
                                 Config::parse_string("bogus_key = 1\n"), dir, 1),
                  std::runtime_error);
  CHECK_THROWS_AS(
      run_suite({"nope"}, Config::parse_string(""), dir, 1, 1),
      std::invalid_argument);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("report text formatting is pinned") {
  std::vector<ExperimentResult> results(3);
  results[0].id = "alpha";
  results[0].pass = true;
  results[0].checks = {
      {"gap", true, 1.25e-9, 1e-6, "<=", "two routes"},
      {"floor", true, 2.0, 1.5, ">=", ""},
  };
  results[1].id = "beta";
  results[1].pass = false;
  results[1].error = "solver blew up";
  results[1].checks = {
      {"speed", false, 0.099999, 0.1, ">=", ""},
      {"context", true, 3.14159265, 0.0, "info", "for the record"},
  };
  results[2].id = "gamma";
  results[2].pass = true;
  results[2].checks = {{"only", true, 42.0, 50.0, "<=", ""}};

  const std::string expected =
      "mcflab report\n"
      "=============\n"
      "experiments: 3  passed: 2  failed: 1\n"
      "\n"
      "[PASS] alpha (2 checks)\n"
      "    ok  gap: 1.25e-09 <= 1e-06  # two routes\n"
      "    ok  floor: 2 >= 1.5\n"
      "\n"
      "[FAIL] beta (2 checks)\n"
      "  error: solver blew up\n"
      "  FAIL  speed: 0.099999 >= 0.1\n"
      "    ok  context: 3.14159  # for the record\n"
      "\n"
      "[PASS] gamma (1 check)\n"
      "    ok  only: 42 <= 50\n";
  CHECK(format_report_text(results) == expected);

  nlohmann::json j = nlohmann::json::parse(format_report_json(results));
  CHECK(j["format"] == "mcflab-report v1");
  CHECK(j["total"] == 3);
  CHECK(j["passed"] == 2);
  REQUIRE(j["experiments"].size() == 3);
  CHECK(j["experiments"][1]["id"] == "beta");
  CHECK(j["experiments"][1]["pass"] == false);
  CHECK(j["experiments"][1]["error"] == "solver blew up");
  CHECK(j["experiments"][1]["checks"][0]["name"] == "speed");
  CHECK(j["experiments"][1]["checks"][0]["pass"] == false);
  CHECK(j["experiments"][0]["checks"][0]["value"] == 1.25e-9);
  CHECK(j["experiments"][2]["checks"][0]["relation"] == "<=");
}

TEST_CASE("result files round trip through load_results") {
  const auto dir = scratch_dir("roundtrip");
  const auto cfg = Config::parse_string("");
  const auto ran = run_experiment("spectral-table", cfg, dir, 2026);
  CHECK(ran.pass);
  CHECK_FALSE(ran.checks.empty());
  CHECK(std::find(ran.outputs.begin(), ran.outputs.end(), "result.json") !=
        ran.outputs.end());

  const auto loaded = load_results(dir);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].id == "spectral-table");
  CHECK(loaded[0].pass == ran.pass);
  REQUIRE(loaded[0].checks.size() == ran.checks.size());
  for (std::size_t i = 0; i < ran.checks.size(); ++i) {
    CHECK(loaded[0].checks[i].name == ran.checks[i].name);
    CHECK(loaded[0].checks[i].value == ran.checks[i].value);
    CHECK(loaded[0].checks[i].bound == ran.checks[i].bound);
    CHECK(loaded[0].checks[i].pass == ran.checks[i].pass);
    CHECK(loaded[0].checks[i].relation == ran.checks[i].relation);
  }

  const auto emitted = emit_report(dir);
  CHECK(emitted.size() == 1);
  CHECK(fs::exists(dir / "report.txt"));
  CHECK(fs::exists(dir / "report.json"));
  const std::string text = slurp(dir / "report.txt");
  CHECK(text.find("[PASS] spectral-table") != std::string::npos);
}

TEST_CASE("load_results distinguishes lost results from unrelated directories") {
  const auto dir = scratch_dir("load");
  CHECK(load_results(dir).empty());

  fs::create_directories(dir / "scribbles");
  atomic_write(dir / "scribbles" / "notes.txt", "not an experiment\n");
  CHECK(load_results(dir).empty());

  fs::create_directories(dir / "broken-run");
  atomic_write(dir / "broken-run" / "manifest.json", "{}\n");
  CHECK_THROWS_AS(load_results(dir), std::runtime_error);
}

TEST_CASE("reruns with the same seed write identical results") {
  const auto cfg = Config::parse_string("");
  const auto a = scratch_dir("det-a");
  const auto b = scratch_dir("det-b");
  run_experiment("spectral-table", cfg, a, 77);
  run_experiment("spectral-table", cfg, b, 77);
  CHECK(sha256_file(a / "spectral-table" / "result.json") ==
        sha256_file(b / "spectral-table" / "result.json"));
  CHECK(sha256_file(a / "spectral-table" / "eigen_table.csv") ==
        sha256_file(b / "spectral-table" / "eigen_table.csv"));
}

TEST_CASE("run_suite dispatches and collects") {
  const auto dir = scratch_dir("suite");
  const auto cfg = Config::parse_string("");
  const auto results =
      run_suite({"spectral-table", "exact-oracles"}, cfg, dir, 2026, 2);
  REQUIRE(results.size() == 2);
  CHECK(results[0].id == "spectral-table");
  CHECK(results[1].id == "exact-oracles");
  for (const auto& r : results) {
    CHECK(r.pass);
    CHECK(r.error.empty());
    CHECK(fs::exists(dir / r.id / "result.json"));
    CHECK(fs::exists(dir / r.id / "manifest.json"));
  }
}
