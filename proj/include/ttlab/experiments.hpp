/** @file experiments.hpp
 *  Experiment registry, configuration and run reports used by the CLI and the acceptance runner.
 *  Implementations live in src/experiments.cpp (library target ttlab_experiments).
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttlab/core.hpp"

namespace ttlab {

/// Bad or unknown configuration keys and values.
struct ConfigError : Error {
  using Error::Error;
};
/// Unknown experiment name.
struct UnknownExperiment : Error {
  using Error::Error;
};
/// Output could not be written.
struct OutputError : Error {
  using Error::Error;
};

/// Flat key/value configuration. Keys are dotted paths; every key an experiment reads must be
/// declared with a default, and the merged values are echoed into the report.
class Config {
 public:
  Config() = default;
  explicit Config(std::map<std::string, std::string> defaults) : values_(std::move(defaults)) {}

  /// Parses the INFO-format text (nested `key value` / `key { ... }` blocks) and overrides
  /// declared defaults. Undeclared keys are rejected.
  void merge_text(const std::string& text);
  void merge_file(const std::filesystem::path& p);
  void set(const std::string& key, const std::string& value);

  template <class T>
  T get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("undeclared configuration key: " + key);
    std::istringstream is(it->second);
    T v{};
    is >> v;
    if (is.fail() || !(is >> std::ws).eof()) throw ConfigError("bad value for " + key + ": " + it->second);
    return v;
  }
  /// Values parsed as exact rationals ("1/128", "3").
  Rat get_rat(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

struct Report {
  std::string experiment;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::vector<Check> checks;
  std::map<std::string, double> constants;
  std::vector<CsvTable> tables;
  double wall_seconds = 0;

  bool pass() const {
    for (auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  void check(std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }
  /// Report JSON. Wall-clock time sits under "timing" so the rest is reproducible byte for byte.
  std::string json(bool with_timing = true) const;
};

struct Experiment {
  std::string name;
  int criterion = 0;  // acceptance criterion number, 1..12
  std::string description;
  std::vector<std::string> topics;
  double budget_seconds = 0;
  std::uint64_t default_seed = 1;
  std::map<std::string, std::string> defaults;
  std::function<void(const Config&, std::uint64_t, Report&)> body;
};

const std::vector<Experiment>& registry();
const Experiment& find_experiment(const std::string& name);

/// Criterion numbers without exactly one registered experiment (empty when complete).
std::vector<int> registry_audit();

/// Machine-readable catalog.
std::string catalog_json();

/// Runs with defaults merged with `cfg_text` (INFO format, may be empty).
Report run_experiment(const std::string& name, const std::string& cfg_text, std::optional<std::uint64_t> seed);

/// Writes report.json and one CSV per table into dir; returns the written paths.
std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir);

}  // namespace ttlab
