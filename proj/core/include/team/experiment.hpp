#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "team/engine.hpp"
#include "team/scenario.hpp"

namespace team {

/// Everything needed to reproduce one run, plus what it produced.
struct RunManifest {
  std::string scenario_name;
  std::string algorithm;
  std::uint64_t seed = 0;
  /// Fully resolved scenario document.
  std::string scenario_json;
  /// Artifact role -> path relative to the manifest's directory.
  std::map<std::string, std::string> artifacts;
  double wall_clock_seconds = 0.0;
  std::map<std::string, TimingStats> timing;
  std::optional<double> final_pixel_error_rate;
  std::size_t final_pixel_error_count = 0;
  std::size_t final_known_cells = 0;
  double max_localization_error = 0.0;
  double mean_localization_error = 0.0;
};

/// CSV of the per-tick trace: true and estimated pose, error per robot, events.
std::string trace_csv(const std::vector<TraceRecord>& trace, Algorithm algorithm);
/// CSV of the 1 Hz merged-map error series.
std::string map_error_csv(const std::vector<MapErrorSample>& samples);

/// Runs the scenario and writes merged.pgm, robot_<i>.pgm, trace.csv,
/// map_error.csv and manifest.json into out_dir. I/O failures raise Error(kIo).
RunManifest run_experiment(const Scenario& scenario, const std::filesystem::path& out_dir);

std::string manifest_to_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& json_text);
RunManifest load_manifest(const std::filesystem::path& path);

/// Re-runs the scenario recorded in a manifest into out_dir.
RunManifest replay(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir);

/// Comparison table: one row per manifest and one relative-delta row for every
/// manifest after the first. Manifests must share scenario name and seed, else
/// Error(kComparison).
std::string compare_manifests(const std::vector<RunManifest>& manifests);

struct PresetRun {
  std::string label;
  Scenario scenario;
};

std::vector<std::string> preset_names();

/// The scenario/algorithm pairs pinned by a named experiment preset.
std::vector<PresetRun> make_preset(const std::string& name, std::uint64_t seed,
                                   std::optional<double> duration = std::nullopt);

}  // namespace team
