// Command line front end: `run <experiment> --config <path> --seed <n> --out <dir>` and `list [--json]`.
//
// Exit status: 0 all checks passed, 1 some check failed, 2 unknown experiment, 3 invalid
// configuration, 4 output failure, 5 any other error.
#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ttlab/experiments.hpp"

namespace {

std::filesystem::path output_dir(const std::string& flag, const std::string& experiment) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TTLAB_OUT_DIR"); env && *env) return std::filesystem::path(env) / experiment;
  return std::filesystem::path("runs") / experiment;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ttlab experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one experiment and write report.json plus CSV tables");
  std::string name, config_path, out;
  std::uint64_t seed = 0;
  run->add_option("experiment", name, "registered experiment name")->required();
  run->add_option("--config", config_path, "configuration file (INFO format)");
  auto* seed_opt = run->add_option("--seed", seed, "random seed (default: the experiment's own)");
  run->add_option("--out", out, "output directory (default: $TTLAB_OUT_DIR/<experiment> or runs/<experiment>)");

  auto* list = app.add_subcommand("list", "list registered experiments");
  bool as_json = false;
  list->add_flag("--json", as_json, "machine-readable catalog");

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    if (as_json) {
      std::cout << ttlab::catalog_json();
    } else {
      for (auto& e : ttlab::registry()) std::cout << e.name << "  [criterion " << e.criterion << "]  " << e.description << "\n";
    }
    return ttlab::registry_audit().empty() ? 0 : 5;
  }

  try {
    ttlab::find_experiment(name);
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ttlab::ConfigError("cannot read configuration file " + config_path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    std::optional<std::uint64_t> s;
    if (*seed_opt) s = seed;
    const auto report = ttlab::run_experiment(name, text, s);
    const auto dir = output_dir(out, name);
    const auto paths = ttlab::write_report(report, dir);
    for (auto& c : report.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    std::cout << "report: " << paths.front().string() << "\n";
    return report.pass() ? 0 : 1;
  } catch (const ttlab::UnknownExperiment& e) {
    std::cerr << "error: " << e.what() << " (see `list`)\n";
    return 2;
  } catch (const ttlab::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 3;
  } catch (const ttlab::OutputError& e) {
    std::cerr << "output failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
}
