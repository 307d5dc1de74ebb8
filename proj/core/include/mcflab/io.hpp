#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mcflab {

// Flat "key = value" configuration.  Lines starting with '#' and blank
// lines are ignored; keys may not repeat.  Typed accessors parse on demand
// and throw on malformed values; restrict_keys rejects unknown keys so that
// a typo in a config file fails loudly instead of silently using defaults.
class Config {
 public:
  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;

  void set(const std::string& key, const std::string& value);
  void restrict_keys(const std::vector<std::string>& allowed) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

// Numeric tables with a tagged header:
//   # mcflab-csv v1,<kind>
//   col1,col2,...
//   <rows, full round-trip precision>
struct CsvTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::initializer_list<double> values);
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

// Write via a temporary file in the target directory plus rename, so that
// readers never observe a half-written file.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Per-run record: what ran, with which seed and configuration, and the
// digest of every produced file.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, std::string>> outputs;  // name, digest
  std::map<std::string, std::string> extra;

  std::string to_json() const;
};

// Writes <out_dir>/manifest.json, filling digests for the named outputs
// (paths relative to out_dir).
void write_manifest(const std::filesystem::path& out_dir,
                    RunManifest manifest);

}  // namespace mcflab
