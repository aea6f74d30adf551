#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "team/baselines.hpp"
#include "team/comms.hpp"
#include "team/geometry.hpp"
#include "team/sensors.hpp"
#include "team/tdma.hpp"
#include "team/world.hpp"

namespace team {

enum class Algorithm { kTeam, kOdomOnly, kParticleFilter };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

enum class InitMode { kKnown, kBootstrap };

struct DriveConfig {
  double max_speed = 0.22;
  double max_turn_rate = 1.0;
  /// Half-width of the forward cone checked for obstacles.
  double cone_half_angle = std::numbers::pi / 6.0;
  /// Anything in the cone closer than this stops translation.
  double clearance = 0.5;
  /// Translation is truncated this far before a wall.
  double standoff = 0.05;
  /// Steering: a heading counts as open when no scan point lies within this half-width
  /// of it over the lookahead distance.
  double corridor_half_width = 0.3;
  double lookahead = 1.5;
  /// When false, scans play no part in driving: robots hold their target direction
  /// and only wall truncation stops them.
  bool reactive = true;

  void validate() const;
};

struct MappingConfig {
  double resolution = kDefaultResolution;
  double occupancy_threshold = kDefaultOccupancyThreshold;
  double sync_timeout = 0.1;
  double map_publish_rate = 1.0;
  double coords_publish_rate = 10.0;

  void validate() const;
};

struct InitConfig {
  InitMode mode = InitMode::kKnown;
  int calibration_batches = 10;
  double heading_probe_distance = 0.5;

  void validate() const;
};

struct SimConfig {
  double tick = 0.01;
  double duration = 300.0;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::kTeam;
  UwbModel uwb;
  /// Raw ranging rate; one fix completes every uwb.n_average / uwb_rate seconds.
  double uwb_rate = 20.0;
  LidarModel lidar;
  OdometryModel odometry;
  double odometry_rate = 10.0;
  /// n_robots is taken from the scenario.
  TdmaSchedule tdma;
  CommModel comms;
  MappingConfig mapping;
  PfConfig pf;
  DriveConfig drive;
  InitConfig init;

  void validate(int n_robots) const;
};

/// Whole number of ticks in `period`; Error(kConfig) naming `key` when the tick does
/// not divide it.
std::int64_t ticks_per_period(double period, double tick, const std::string& key);

struct Scenario {
  std::string name;
  /// Built-in layout name and its numeric parameters; empty for explicit geometry.
  std::string builtin;
  std::map<std::string, double> builtin_params;
  std::vector<Segment> segments;
  Bounds bounds;
  std::vector<RobotStart> robots;
  Point2 sink;
  SimConfig config;

  void validate() const;
};

/// Scenario built from a built-in layout with default configuration.
Scenario builtin_scenario(const std::string& layout,
                          const std::map<std::string, double>& params = {});

/// Parses and validates a scenario document. Unknown keys and invalid values raise
/// Error(kConfig) naming the offending key.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// Fully resolved scenario (every parameter explicit), as pretty-printed JSON.
std::string scenario_to_json(const Scenario& s);

}  // namespace team
