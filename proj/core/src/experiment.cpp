#include "team/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "team/error.hpp"
#include "team/mapping.hpp"

namespace team {
namespace {

using json = nlohmann::ordered_json;

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string source_name(EstimateSource s, Algorithm a) {
  if (a == Algorithm::kParticleFilter) return "FILTER";
  return s == EstimateSource::kTrilaterated ? "TRILATERATED" : "DEAD_RECKONED";
}

std::string rate_or_none(const std::optional<double>& rate) {
  return rate ? fixed(*rate) : "NO_COVERAGE";
}

// Relative change of b against a; empty when a is zero or either side is missing.
std::string relative(std::optional<double> a, std::optional<double> b) {
  if (!a || !b || *a == 0.0) return "";
  return fixed((*b - *a) / *a);
}

std::optional<double> update_seconds(const RunManifest& m) {
  for (const char* op : {"trilateration", "pf_predict_update"}) {
    const auto it = m.timing.find(op);
    if (it != m.timing.end() && it->second.count > 0) return it->second.mean();
  }
  return std::nullopt;
}

}  // namespace

std::string trace_csv(const std::vector<TraceRecord>& trace, Algorithm algorithm) {
  std::ostringstream out;
  out << "t";
  const std::size_t n = trace.empty() ? 0 : trace.front().robots.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (const char* col :
         {"true_x", "true_y", "true_theta", "est_x", "est_y", "est_theta", "source", "error"}) {
      out << ',' << col << '_' << i;
    }
  }
  out << ",events\n";
  for (const auto& rec : trace) {
    out << fixed(rec.t);
    for (const auto& r : rec.robots) {
      out << ',' << fixed(r.true_pose.x) << ',' << fixed(r.true_pose.y) << ','
          << fixed(r.true_pose.theta) << ',' << fixed(r.estimate.x) << ',' << fixed(r.estimate.y)
          << ',' << fixed(r.estimate.theta) << ',' << source_name(r.source, algorithm) << ','
          << fixed(r.error);
    }
    out << ',';
    for (std::size_t e = 0; e < rec.events.size(); ++e) {
      if (e) out << ';';
      out << rec.events[e].robot << ':' << to_string(rec.events[e].kind);
    }
    out << '\n';
  }
  return out.str();
}

std::string map_error_csv(const std::vector<MapErrorSample>& samples) {
  std::ostringstream out;
  out << "t,error_count,known_cells,error_rate\n";
  for (const auto& s : samples) {
    out << fixed(s.t) << ',' << s.error.count << ',' << s.error.known << ','
        << rate_or_none(s.error.rate) << '\n';
  }
  return out.str();
}

RunManifest run_experiment(const Scenario& scenario, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  const auto start = std::chrono::steady_clock::now();
  const RunResult result = run_simulation(scenario);
  RunManifest m;
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.scenario_name = scenario.name;
  m.algorithm = to_string(scenario.config.algorithm);
  m.seed = scenario.config.seed;
  m.scenario_json = scenario_to_json(scenario);
  m.timing = result.timing;
  m.final_pixel_error_rate = result.metrics.final_map_error.rate;
  m.final_pixel_error_count = result.metrics.final_map_error.count;
  m.final_known_cells = result.metrics.final_map_error.known;
  m.max_localization_error = result.metrics.max_localization_error;
  m.mean_localization_error = result.metrics.mean_localization_error;

  write_pgm(result.merged_map, out_dir / "merged.pgm");
  m.artifacts["merged_map"] = "merged.pgm";
  for (std::size_t i = 0; i < result.robot_maps.size(); ++i) {
    const std::string name = "robot_" + std::to_string(i) + ".pgm";
    write_pgm(result.robot_maps[i], out_dir / name);
    m.artifacts["robot_map_" + std::to_string(i)] = name;
  }
  write_text(out_dir / "trace.csv", trace_csv(result.trace, scenario.config.algorithm));
  m.artifacts["trace"] = "trace.csv";
  write_text(out_dir / "map_error.csv", map_error_csv(result.map_errors));
  m.artifacts["map_error"] = "map_error.csv";
  m.artifacts["manifest"] = "manifest.json";
  write_text(out_dir / "manifest.json", manifest_to_json(m));
  return m;
}

std::string manifest_to_json(const RunManifest& m) {
  json doc;
  doc["scenario_name"] = m.scenario_name;
  doc["algorithm"] = m.algorithm;
  doc["seed"] = m.seed;
  doc["scenario"] = json::parse(m.scenario_json);
  doc["artifacts"] = m.artifacts;
  doc["wall_clock_seconds"] = m.wall_clock_seconds;
  json timing = json::object();
  for (const auto& [op, t] : m.timing) {
    timing[op] = {{"count", t.count}, {"mean_seconds", t.mean()}, {"max_seconds", t.max}};
  }
  doc["timing"] = timing;
  doc["metrics"] = {
      {"final_pixel_error_rate",
       m.final_pixel_error_rate ? json(*m.final_pixel_error_rate) : json("NO_COVERAGE")},
      {"final_pixel_error_count", m.final_pixel_error_count},
      {"final_known_cells", m.final_known_cells},
      {"max_localization_error", m.max_localization_error},
      {"mean_localization_error", m.mean_localization_error},
  };
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& json_text) {
  RunManifest m;
  try {
    const json doc = json::parse(json_text);
    m.scenario_name = doc.at("scenario_name").get<std::string>();
    m.algorithm = doc.at("algorithm").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.scenario_json = doc.at("scenario").dump(2) + "\n";
    m.artifacts = doc.at("artifacts").get<std::map<std::string, std::string>>();
    m.wall_clock_seconds = doc.at("wall_clock_seconds").get<double>();
    for (const auto& [op, t] : doc.at("timing").items()) {
      TimingStats s;
      s.count = t.at("count").get<std::size_t>();
      s.total = t.at("mean_seconds").get<double>() * static_cast<double>(s.count);
      s.max = t.at("max_seconds").get<double>();
      m.timing[op] = s;
    }
    const json& metrics = doc.at("metrics");
    const json& rate = metrics.at("final_pixel_error_rate");
    if (rate.is_number()) m.final_pixel_error_rate = rate.get<double>();
    m.final_pixel_error_count = metrics.at("final_pixel_error_count").get<std::size_t>();
    m.final_known_cells = metrics.at("final_known_cells").get<std::size_t>();
    m.max_localization_error = metrics.at("max_localization_error").get<double>();
    m.mean_localization_error = metrics.at("mean_localization_error").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text(path));
}

RunManifest replay(const std::filesystem::path& manifest_path,
                   const std::filesystem::path& out_dir) {
  const RunManifest recorded = load_manifest(manifest_path);
  return run_experiment(parse_scenario(recorded.scenario_json), out_dir);
}

std::string compare_manifests(const std::vector<RunManifest>& manifests) {
  if (manifests.empty()) throw Error(ErrorCode::kComparison, "nothing to compare");
  const auto& first = manifests.front();
  for (const auto& m : manifests) {
    if (m.scenario_name != first.scenario_name) {
      throw Error(ErrorCode::kComparison, "manifests come from different scenarios ('" +
                                              first.scenario_name + "' vs '" + m.scenario_name + "')");
    }
    if (m.seed != first.seed) {
      throw Error(ErrorCode::kComparison, "manifests use different seeds (" +
                                              std::to_string(first.seed) + " vs " +
                                              std::to_string(m.seed) + ")");
    }
  }
  std::ostringstream out;
  out << "row,algorithm,scenario,seed,final_pixel_error_rate,max_localization_error,"
         "mean_localization_error,mean_update_seconds\n";
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& m = manifests[i];
    const auto upd = update_seconds(m);
    out << "run_" << i << ',' << m.algorithm << ',' << m.scenario_name << ',' << m.seed << ','
        << rate_or_none(m.final_pixel_error_rate) << ',' << fixed(m.max_localization_error) << ','
        << fixed(m.mean_localization_error) << ',' << (upd ? fixed(*upd) : "") << '\n';
  }
  for (std::size_t i = 1; i < manifests.size(); ++i) {
    const auto& m = manifests[i];
    out << "delta_" << i << "_vs_0," << m.algorithm << ',' << m.scenario_name << ',' << m.seed
        << ',' << relative(first.final_pixel_error_rate, m.final_pixel_error_rate) << ','
        << relative(first.max_localization_error, m.max_localization_error) << ','
        << relative(first.mean_localization_error, m.mean_localization_error) << ','
        << relative(update_seconds(first), update_seconds(m)) << '\n';
  }
  return out.str();
}

std::vector<std::string> preset_names() {
  return {"corridor-feature-deprived", "y-maze", "branched-tunnel", "throttled-lidar",
          "p1-comparison"};
}

std::vector<PresetRun> make_preset(const std::string& name, std::uint64_t seed,
                                   std::optional<double> duration) {
  auto base = [&](const std::string& layout, Algorithm a) {
    Scenario s = builtin_scenario(layout);
    s.config.seed = seed;
    s.config.algorithm = a;
    // Experiments range and drive simultaneously so every algorithm covers ground
    // on the same time scale.
    s.config.tdma.mode = TdmaMode::kSimultaneous;
    if (duration) s.config.duration = *duration;
    return s;
  };
  std::vector<PresetRun> runs;
  if (name == "corridor-feature-deprived" || name == "y-maze" || name == "branched-tunnel") {
    const std::string layout = name == "corridor-feature-deprived" ? "corridor"
                               : name == "y-maze"                  ? "y_maze"
                                                                   : "branched_tunnel";
    runs.push_back({"TEAM", base(layout, Algorithm::kTeam)});
    runs.push_back({"PF_BASELINE", base(layout, Algorithm::kParticleFilter)});
    runs.push_back({"ODOM_ONLY", base(layout, Algorithm::kOdomOnly)});
  } else if (name == "throttled-lidar") {
    for (Algorithm a : {Algorithm::kTeam, Algorithm::kParticleFilter}) {
      for (double rate : {5.0, 0.1}) {
        Scenario s = base("corridor", a);
        s.config.lidar.rate = rate;
        runs.push_back({to_string(a) + (rate == 5.0 ? "_lidar_5Hz" : "_lidar_0.1Hz"), s});
      }
    }
  } else if (name == "p1-comparison") {
    Scenario pf = base("branched_tunnel", Algorithm::kParticleFilter);
    pf.config.pf.n_particles = 1;
    runs.push_back({"PF_BASELINE_P1", pf});
    runs.push_back({"TEAM", base("branched_tunnel", Algorithm::kTeam)});
  } else {
    throw Error(ErrorCode::kConfig, "unknown preset '" + name + "'");
  }
  return runs;
}

}  // namespace team
