// Registry plumbing: configuration parsing, report serialization, catalog.
#include "ttlab/experiments.hpp"

#include <boost/property_tree/info_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "runs.hpp"

namespace ttlab {

namespace {

void flatten(const boost::property_tree::ptree& t, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  for (auto& [k, v] : t) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.empty())
      out.emplace_back(key, v.data());
    else
      flatten(v, key, out);
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string r = "\"";
  for (char c : s) r += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return r + "\"";
}

}  // namespace

void Config::merge_text(const std::string& text) {
  boost::property_tree::ptree t;
  std::istringstream is(text);
  try {
    boost::property_tree::read_info(is, t);
  } catch (const boost::property_tree::ptree_error& e) {
    throw ConfigError(std::string("cannot parse configuration: ") + e.what());
  }
  std::vector<std::pair<std::string, std::string>> kv;
  flatten(t, "", kv);
  for (auto& [k, v] : kv) set(k, v);
}

void Config::merge_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read configuration file " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str());
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key: " + key);
  it->second = value;
}

Rat Config::get_rat(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("undeclared configuration key: " + key);
  Rat r;
  if (r.set_str(it->second, 10) != 0) throw ConfigError("bad rational for " + key + ": " + it->second);
  r.canonicalize();
  return r;
}

std::string CsvTable::str() const {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + csv_escape(header[i]);
  s += "\n";
  for (auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_escape(row[i]);
    s += "\n";
  }
  return s;
}

std::string Report::json(bool with_timing) const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["config"] = config;
  j["pass"] = pass();
  auto& cj = j["checks"] = nlohmann::json::array();
  for (auto& c : checks) cj.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  nlohmann::json cs = nlohmann::json::object();
  for (auto& [k, v] : constants) {
    if (std::isfinite(v))
      cs[k] = v;
    else
      cs[k] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  }
  j["constants"] = cs;
  auto& aj = j["artifacts"] = nlohmann::json::array();
  for (auto& t : tables) aj.push_back(t.name + ".csv");
  if (with_timing) j["timing"] = {{"wall_seconds", wall_seconds}};
  return j.dump(2) + "\n";
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> reg = runs::all_experiments();
  return reg;
}

const Experiment& find_experiment(const std::string& name) {
  for (auto& e : registry())
    if (e.name == name) return e;
  throw UnknownExperiment("unknown experiment: " + name);
}

std::vector<int> registry_audit() {
  std::map<int, int> count;
  std::set<std::string> names;
  for (auto& e : registry()) {
    ++count[e.criterion];
    names.insert(e.name);
  }
  std::vector<int> bad;
  for (int c = 1; c <= 12; ++c)
    if (count[c] != 1) bad.push_back(c);
  if (names.size() != registry().size()) bad.push_back(0);
  return bad;
}

std::string catalog_json() {
  nlohmann::json j = nlohmann::json::array();
  for (auto& e : registry())
    j.push_back({{"name", e.name},
                 {"criterion", e.criterion},
                 {"description", e.description},
                 {"topics", e.topics},
                 {"budget_seconds", e.budget_seconds},
                 {"default_seed", e.default_seed},
                 {"defaults", e.defaults}});
  return j.dump(2) + "\n";
}

Report run_experiment(const std::string& name, const std::string& cfg_text, std::optional<std::uint64_t> seed) {
  const Experiment& e = find_experiment(name);
  Config cfg(e.defaults);
  if (!cfg_text.empty()) cfg.merge_text(cfg_text);
  Report r;
  r.experiment = e.name;
  r.seed = seed.value_or(e.default_seed);
  r.config = cfg.values();
  const auto t0 = std::chrono::steady_clock::now();
  e.body(cfg, r.seed, r);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  auto put = [&](const std::filesystem::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
    f.close();
    if (!f) throw OutputError("cannot write " + p.string());
    out.push_back(p);
  };
  put(dir / "report.json", r.json());
  for (auto& t : r.tables) put(dir / (t.name + ".csv"), t.str());
  return out;
}

}  // namespace ttlab
