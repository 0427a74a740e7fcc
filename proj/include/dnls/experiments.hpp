// Configuration parsing (key = value sections), run persistence and the
// suite runner behind the CLI.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "dnls/damping.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/scattering.hpp"
#include "dnls/solver.hpp"

namespace dnls {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace ini {

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

struct File {
  std::vector<Entry> entries;
  std::string path;

  bool has(const std::string& sec, const std::string& key) const {
    for (const auto& e : entries)
      if (e.section == sec && e.key == key) return true;
    return false;
  }

  std::string get(const std::string& sec, const std::string& key,
                  const std::string& fallback) const {
    for (const auto& e : entries)
      if (e.section == sec && e.key == key) return e.value;
    return fallback;
  }

  std::string require(const std::string& sec, const std::string& key) const {
    for (const auto& e : entries)
      if (e.section == sec && e.key == key) return e.value;
    throw config_error(path + ": missing required key '" + key + "' in section [" + sec + "]");
  }

  std::vector<std::string> get_all(const std::string& sec, const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
      if (e.section == sec && e.key == key) out.push_back(e.value);
    return out;
  }
};

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
}

inline File parse(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  File f;
  f.path = path;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw config_error(path + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    Entry e;
    e.section = section;
    e.key = trim(t.substr(0, eq));
    e.value = trim(t.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty())
      throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
    f.entries.push_back(e);
  }
  return f;
}

inline double to_double(const File& f, const Entry& e) {
  try {
    std::size_t pos = 0;
    double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw config_error(f.path + ":" + std::to_string(e.line) + ": '" + e.key +
                       "' is not a number: " + e.value);
  }
}

inline std::vector<double> to_double_list(const std::string& v) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(std::stod(trim(item)));
  return out;
}

}  // namespace ini

struct ExperimentSuite {
  std::string name;
  std::vector<std::string> run_names;
  std::vector<SimConfig> configs;
  std::string output_dir = ".";
  unsigned seed = 0;
};

namespace detail {

inline const std::set<std::string>& known_sim_keys() {
  static const std::set<std::string> keys = {
      "simulation.dim",        "simulation.p",
      "simulation.mu",         "simulation.t_end",
      "simulation.dt",         "simulation.formulation",
      "simulation.blowup_threshold", "simulation.nonlinearity",
      "grid.points",           "grid.half_length",
      "damping.profile",       "initial_data.kind",
      "initial_data.amplitude","initial_data.width",
      "initial_data.center",   "initial_data.wave_vector",
      "initial_data.eta",      "initial_data.path",
      "initial_data.scale",    "output.cadence",
      "output.scattering_samples"};
  return keys;
}

}  // namespace detail

inline SimConfig parse_sim_config(const ini::File& f) {
  for (const auto& e : f.entries) {
    std::string full = e.section + "." + e.key;
    if (!detail::known_sim_keys().count(full))
      throw config_error(f.path + ":" + std::to_string(e.line) + ": unknown key '" + full + "'");
  }
  SimConfig cfg;
  auto num = [&f](const std::string& sec, const std::string& key, double fallback) {
    for (const auto& e : f.entries)
      if (e.section == sec && e.key == key) return ini::to_double(f, e);
    return fallback;
  };
  cfg.dim = static_cast<int>(num("simulation", "dim", 1));
  cfg.p = num("simulation", "p", 3.0);
  cfg.mu = static_cast<int>(num("simulation", "mu", -1));
  cfg.t_end = num("simulation", "t_end", 1.0);
  cfg.dt = num("simulation", "dt", 1e-3);
  cfg.blowup_threshold = num("simulation", "blowup_threshold", 1e6);
  std::string form = f.get("simulation", "formulation", "direct");
  if (form == "direct")
    cfg.formulation = Formulation::kDirect;
  else if (form == "gauged")
    cfg.formulation = Formulation::kGauged;
  else
    throw config_error(f.path + ": formulation must be 'direct' or 'gauged'");
  std::string nl = f.get("simulation", "nonlinearity", "true");
  if (nl == "true" || nl == "on")
    cfg.nonlinearity = true;
  else if (nl == "false" || nl == "off")
    cfg.nonlinearity = false;
  else
    throw config_error(f.path + ": nonlinearity must be true/false");

  cfg.points = static_cast<int>(num("grid", "points", 256));
  cfg.half_length = num("grid", "half_length", 20.0);
  cfg.damping = parse_damping(f.get("damping", "profile", "zero"));
  cfg.cadence = num("output", "cadence", 1e-2);

  std::string kind = f.get("initial_data", "kind", "gaussian");
  if (kind == "gaussian") {
    cfg.initial_data.kind = InitialDataSpec::Kind::kGaussian;
    cfg.initial_data.amplitude = num("initial_data", "amplitude", 1.0);
    cfg.initial_data.width = num("initial_data", "width", 1.0);
    if (f.has("initial_data", "center"))
      cfg.initial_data.center = ini::to_double_list(f.require("initial_data", "center"));
    if (f.has("initial_data", "wave_vector"))
      cfg.initial_data.wave_vector = ini::to_double_list(f.require("initial_data", "wave_vector"));
  } else if (kind == "soliton") {
    cfg.initial_data.kind = InitialDataSpec::Kind::kSoliton;
    cfg.initial_data.eta = num("initial_data", "eta", 1.0);
  } else if (kind == "scaled_profile") {
    cfg.initial_data.kind = InitialDataSpec::Kind::kScaledProfile;
    cfg.initial_data.path = f.require("initial_data", "path");
    cfg.initial_data.scale = num("initial_data", "scale", 1.0);
  } else {
    throw config_error(f.path + ": unknown initial_data kind '" + kind + "'");
  }

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw config_error(f.path + ": invalid config: " + e.what());
  }
  return cfg;
}

/// Number of scattering samples requested by the config (0 disables).
inline int scattering_samples_of(const ini::File& f) {
  return static_cast<int>(std::stod(f.get("output", "scattering_samples", "0")));
}

inline bool is_suite_file(const ini::File& f) {
  for (const auto& e : f.entries)
    if (e.section == "suite") return true;
  return false;
}

inline ExperimentSuite parse_suite(const ini::File& f) {
  ExperimentSuite suite;
  suite.name = f.get("suite", "name", "suite");
  suite.seed = static_cast<unsigned>(std::stod(f.get("suite", "seed", "0")));
  suite.output_dir = f.get("suite", "output_dir", ".");
  std::filesystem::path base = std::filesystem::path(f.path).parent_path();
  std::set<std::string> seen;
  for (const auto& rel : f.get_all("suite", "run")) {
    std::filesystem::path p = base / rel;
    std::string name = p.stem().string();
    if (!seen.insert(name).second)
      throw config_error(f.path + ": duplicate run name '" + name + "'");
    suite.run_names.push_back(name);
    suite.configs.push_back(parse_sim_config(ini::parse(p.string())));
  }
  if (suite.configs.empty()) throw config_error(f.path + ": suite has no runs");
  return suite;
}

inline std::variant<SimConfig, ExperimentSuite> parse_config(const std::string& path) {
  ini::File f = ini::parse(path);
  if (is_suite_file(f)) return parse_suite(f);
  return parse_sim_config(f);
}

// Run driver -----------------------------------------------------------------

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  std::vector<std::pair<double, Field>> samples;  // u-frame fields for scattering
  std::optional<Field> final_field;
  TrajectorySummary summary;
};

/// Evolves cfg, collecting diagnostics and (optionally) n_samples u-frame
/// snapshots spread over the second half of the run.
inline RunResult run_simulation(const SimConfig& cfg, int n_samples = 0) {
  RunResult out;
  std::vector<double> targets;
  if (n_samples > 0) {
    int s = std::max(n_samples, 4);
    for (int i = 0; i < s; ++i)
      targets.push_back(0.5 * cfg.t_end +
                        0.5 * cfg.t_end * static_cast<double>(i) / (s - 1));
  }
  std::size_t next_target = 0;
  out.summary = evolve(cfg, [&](const Field& u, const DiagnosticsRecord& rec) {
    out.records.push_back(rec);
    if (next_target < targets.size() && rec.t >= targets[next_target] - 1e-12) {
      out.samples.emplace_back(rec.t, u);
      ++next_target;
    }
    out.final_field = u;
  });
  return out;
}

// Persistence ----------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

/// Writes diagnostics.csv, final.dnls, sample checkpoints, manifest.txt and a
/// copy of the config into the run directory.
inline void persist_run(const std::filesystem::path& dir, const std::string& config_path,
                        const SimConfig& cfg, const RunResult& result) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "diagnostics.csv");
    write_diagnostics_csv(os, result.records);
  }
  if (result.final_field) write_checkpoint((dir / "final.dnls").string(), *result.final_field);
  if (!result.samples.empty()) {
    std::filesystem::create_directories(dir / "samples");
    char name[64];
    for (std::size_t i = 0; i < result.samples.size(); ++i) {
      std::snprintf(name, sizeof(name), "u_%04zu.dnls", i);
      write_checkpoint((dir / "samples" / name).string(), result.samples[i].second);
    }
  }
  if (!config_path.empty())
    std::filesystem::copy_file(config_path, dir / "config.ini",
                               std::filesystem::copy_options::overwrite_existing);

  std::ostringstream manifest;
  manifest << "[run]\n";
  manifest << "config = " << config_path << "\n";
  manifest << "damping = " << cfg.damping.describe() << "\n";
  manifest << "dim = " << cfg.dim << "\n";
  manifest << "p = " << cfg.p << "\n";
  manifest << "mu = " << cfg.mu << "\n";
  manifest << "dt = " << cfg.dt << "\n";
  manifest << "t_end = " << cfg.t_end << "\n";
  manifest << "formulation = "
           << (cfg.formulation == Formulation::kDirect ? "direct" : "gauged") << "\n";
  manifest << "version = 1\n";
  manifest << "steps = " << result.summary.steps << "\n";
  manifest << "wall_seconds = " << result.summary.wall_seconds << "\n";
  manifest << "blowup = " << (result.summary.blowup ? "true" : "false") << "\n";
  if (result.summary.blowup) manifest << "blowup_time = " << result.summary.blowup_time << "\n";
  write_text_file(dir / "manifest.txt", manifest.str());
}

/// Rebuilds a scattering report from a persisted run directory.
inline ScatteringReport load_scattering_report(const std::filesystem::path& dir) {
  SimConfig cfg = parse_sim_config(ini::parse((dir / "config.ini").string()));
  auto series = read_diagnostics_csv((dir / "diagnostics.csv").string());
  std::vector<std::pair<double, Field>> samples;
  std::filesystem::path sdir = dir / "samples";
  if (std::filesystem::exists(sdir)) {
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(sdir)) paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      Field f = read_checkpoint(p.string());
      samples.emplace_back(f.time, std::move(f));
    }
  }
  if (samples.size() < 4)
    throw std::runtime_error("scattering report needs >= 4 stored samples in " + sdir.string());
  return scattering_report(samples, series, cfg.damping);
}

// Sweep runner ---------------------------------------------------------------

inline unsigned worker_limit() {
  if (const char* env = std::getenv("DNLS_WORKERS")) {
    int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Runs every suite config in parallel (worker-limited); each run writes only
/// inside its own directory.
inline std::vector<TrajectorySummary> run_sweep(const ExperimentSuite& suite,
                                                const std::filesystem::path& out_base) {
  std::vector<TrajectorySummary> summaries(suite.configs.size());
  std::vector<std::string> errors(suite.configs.size());
  const unsigned workers = std::min<unsigned>(worker_limit(),
                                              static_cast<unsigned>(suite.configs.size()));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= suite.configs.size()) return;
      try {
        RunResult r = run_simulation(suite.configs[i]);
        persist_run(out_base / suite.run_names[i], "", suite.configs[i], r);
        summaries[i] = r.summary;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw std::runtime_error("sweep run '" + suite.run_names[i] + "' failed: " + errors[i]);
  return summaries;
}

}  // namespace dnls
