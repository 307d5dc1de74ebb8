#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "mcflab/io.hpp"

using namespace mcflab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mcflab-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing, comments, and typed accessors") {
  const auto cfg = Config::parse_string(
      "# a comment\n"
      "\n"
      "alpha = 2.5\n"
      "count=7\n"
      "  big = 18446744073709551615\n"
      "flag = true\n"
      "name = run-a\n");
  CHECK(cfg.has("alpha"));
  CHECK_FALSE(cfg.has("beta"));
  CHECK(cfg.get_double("alpha", 0.0) == 2.5);
  CHECK(cfg.get_double("missing", -1.5) == -1.5);
  CHECK(cfg.get_int("count", 0) == 7);
  CHECK(cfg.get_u64("big", 0) == 18446744073709551615ull);
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_bool("missing", true));
  CHECK(cfg.get_string("name", "") == "run-a");
  CHECK(cfg.entries().size() == 5);
}

TEST_CASE("config rejects malformed input loudly") {
  CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n"), std::runtime_error);
  CHECK_THROWS_AS(Config::parse_string("just words\n"), std::runtime_error);
  const auto cfg = Config::parse_string("x = notanumber\nb = maybe\n");
  CHECK_THROWS_AS(cfg.get_double("x", 0.0), std::runtime_error);
  CHECK_THROWS_AS(cfg.get_int("x", 0), std::runtime_error);
  CHECK_THROWS_AS(cfg.get_bool("b", false), std::runtime_error);
  CHECK_NOTHROW(cfg.restrict_keys({"x", "b", "unused"}));
  CHECK_THROWS_AS(cfg.restrict_keys({"x"}), std::runtime_error);
}

TEST_CASE("config round trips through a file") {
  const auto dir = scratch_dir("config");
  const auto path = dir / "run.cfg";
  atomic_write(path, "seed = 99\n# note\ntol = 1e-9\n");
  const auto cfg = Config::parse_file(path);
  CHECK(cfg.get_u64("seed", 0) == 99);
  CHECK(cfg.get_double("tol", 0.0) == 1e-9);
  CHECK_THROWS_AS(Config::parse_file(dir / "missing.cfg"), std::runtime_error);
  Config copy = cfg;
  copy.set("tol", "0.5");
  CHECK(copy.get_double("tol", 0.0) == 0.5);
}

TEST_CASE("csv tables round trip at full precision") {
  const auto dir = scratch_dir("csv");
  CsvTable t;
  t.kind = "profile";
  t.columns = {"z", "r", "weight"};
  t.add_row({0.1, 1.0 / 3.0, 1e-300});
  t.add_row({-2.5, std::numbers::pi, 6.02214076e23});
  const auto path = dir / "table.csv";
  write_csv(path, t);
  const auto back = read_csv(path);
  CHECK(back.kind == "profile");
  CHECK(back.columns == t.columns);
  REQUIRE(back.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(back.rows[i][j] == t.rows[i][j]);  // bit exact
    }
  }

  CsvTable ragged = t;
  CHECK_THROWS_AS(ragged.add_row({1.0}), std::invalid_argument);

  std::ofstream(dir / "bad.csv") << "z,r\n0,1\n";
  CHECK_THROWS_AS(read_csv(dir / "bad.csv"), std::runtime_error);
  CHECK_THROWS_AS(read_csv(dir / "nothere.csv"), std::runtime_error);
}

TEST_CASE("atomic_write replaces content in one step") {
  const auto dir = scratch_dir("atomic");
  const auto path = dir / "out.txt";
  atomic_write(path, "first\n");
  atomic_write(path, "second\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "second");
  // no temporary litter left behind
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++count;
  }
  CHECK(count == 1);
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
        "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
  const auto dir = scratch_dir("sha");
  const std::string payload = "some bytes\nwith a newline and \x01 control\n";
  atomic_write(dir / "blob.bin", payload);
  CHECK(sha256_file(dir / "blob.bin") == sha256_hex(payload));
  CHECK_THROWS_AS(sha256_file(dir / "missing.bin"), std::runtime_error);
}

TEST_CASE("run manifests fill digests and emit valid json") {
  const auto dir = scratch_dir("manifest");
  atomic_write(dir / "data.csv", "# mcflab-csv v1,demo\nx\n1\n");
  RunManifest m;
  m.command = "demo run";
  m.seed = 123;
  m.config["tol"] = "1e-8";
  m.outputs.push_back({"data.csv", ""});
  m.extra["wall_seconds"] = "0.5";
  write_manifest(dir, m);

  std::ifstream in(dir / "manifest.json");
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  CHECK(j["format"] == "mcflab-manifest v1");
  CHECK(j["command"] == "demo run");
  CHECK(j["seed"] == 123);
  CHECK(j["config"]["tol"] == "1e-8");
  CHECK(j["wall_seconds"] == "0.5");
  REQUIRE(j["outputs"].size() == 1);
  CHECK(j["outputs"][0]["file"] == "data.csv");
  const std::string digest = j["outputs"][0]["sha256"];
  CHECK(digest == sha256_file(dir / "data.csv"));
  CHECK(digest.size() == 64);
}
