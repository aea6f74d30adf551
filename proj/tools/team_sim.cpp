// Command-line front end: run scenarios, experiment presets, comparisons, replays.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "team/error.hpp"
#include "team/experiment.hpp"
#include "team/mapping.hpp"
#include "team/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

void print_summary(const std::string& label, const team::RunManifest& m) {
  std::printf("%-22s pixel_error_rate=%s max_loc_error=%.3f mean_loc_error=%.3f wall=%.1fs\n",
              label.c_str(),
              m.final_pixel_error_rate ? std::to_string(*m.final_pixel_error_rate).c_str()
                                       : "NO_COVERAGE",
              m.max_localization_error, m.mean_localization_error, m.wall_clock_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot UWB trilateration and mapping simulator"};
  app.require_subcommand(1);

  std::string scenario_path, algorithm, tdma_mode, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--algorithm", algorithm, "TEAM, ODOM_ONLY or PF_BASELINE");
  run->add_option("--seed", seed, "Root random seed");
  run->add_option("--duration", duration, "Simulated seconds");
  run->add_option("--tdma-mode", tdma_mode, "faithful or simultaneous");
  run->add_option("--out", out_dir, "Output directory");

  std::string preset_name;
  std::uint64_t preset_seed = 1;
  auto* preset = app.add_subcommand("preset", "Run a named experiment preset");
  preset->add_option("name", preset_name, "Preset name")
      ->required()
      ->check(CLI::IsMember(team::preset_names()));
  preset->add_option("--seed", preset_seed, "Root random seed");
  preset->add_option("--duration", duration, "Simulated seconds");
  preset->add_option("--out", out_dir, "Output directory");

  std::vector<std::string> manifests;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Tabulate manifests as CSV");
  compare->add_option("manifests", manifests, "manifest.json files")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", compare_out, "Write the table here instead of stdout");

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run the scenario recorded in a manifest");
  replay->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", out_dir, "Output directory");

  std::string raster_out = "truth.pgm";
  auto* rasterize = app.add_subcommand("rasterize", "Export the ground-truth raster as PGM");
  rasterize->add_option("--scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  rasterize->add_option("--out", raster_out, "Output PGM path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      team::Scenario s = team::load_scenario(scenario_path);
      if (!algorithm.empty()) s.config.algorithm = team::parse_algorithm(algorithm);
      if (seed) s.config.seed = *seed;
      if (duration) s.config.duration = *duration;
      if (!tdma_mode.empty()) {
        if (tdma_mode == "faithful") {
          s.config.tdma.mode = team::TdmaMode::kFaithful;
        } else if (tdma_mode == "simultaneous") {
          s.config.tdma.mode = team::TdmaMode::kSimultaneous;
        } else {
          throw team::Error(team::ErrorCode::kConfig, "--tdma-mode must be faithful or simultaneous");
        }
      }
      s.validate();
      print_summary(team::to_string(s.config.algorithm), team::run_experiment(s, out_dir));
    } else if (*preset) {
      for (const auto& r : team::make_preset(preset_name, preset_seed, duration)) {
        print_summary(r.label, team::run_experiment(r.scenario, std::filesystem::path(out_dir) / r.label));
      }
    } else if (*compare) {
      std::vector<team::RunManifest> loaded;
      for (const auto& p : manifests) loaded.push_back(team::load_manifest(p));
      const std::string table = team::compare_manifests(loaded);
      if (compare_out.empty()) {
        std::cout << table;
      } else {
        std::ofstream out(compare_out);
        out << table;
        if (!out) throw team::Error(team::ErrorCode::kIo, "cannot write " + compare_out);
      }
    } else if (*replay) {
      print_summary("replay", team::replay(manifest_path, out_dir));
    } else if (*rasterize) {
      const team::Scenario s = team::load_scenario(scenario_path);
      const team::Environment env(s.segments, s.bounds, s.config.mapping.resolution);
      team::write_pgm(env.truth_raster(), raster_out);
    }
  } catch (const team::Error& e) {
    std::cerr << "team_sim: " << e.what() << '\n';
    const bool config = e.code() == team::ErrorCode::kConfig ||
                        e.code() == team::ErrorCode::kComparison;
    return config ? kExitConfig : kExitRun;
  } catch (const std::exception& e) {
    std::cerr << "team_sim: " << e.what() << '\n';
    return kExitRun;
  }
  return 0;
}
