#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "team/baselines.hpp"
#include "team/comms.hpp"
#include "team/mapping.hpp"
#include "team/scenario.hpp"
#include "team/trilateration.hpp"
#include "team/world.hpp"

namespace team {

/// Drive command for one tick. Steers toward `steer_heading` (the open heading
/// nearest the target, see choose_heading); rotates in place toward the freer side
/// when something in the forward cone is closer than the clearance.
OdometryDelta drive_step(const DriveConfig& config, const Pose2& pose, double steer_heading,
                         const Scan* scan, bool allowed, double tick);

/// Open heading closest to `target` given a scan (world-frame points relative to
/// `pose`). Returns `target` itself whenever it is open or no scan is available.
double choose_heading(const DriveConfig& config, const Pose2& pose, double target,
                      const Scan* scan);

struct NeighborCoords {
  PositionEstimate estimate;
  double received_at = 0.0;
};

struct RobotState {
  int id = 0;
  Pose2 true_pose;
  PositionEstimate estimate;
  /// Reported odometry not yet folded into the estimate.
  OdometryDelta odometer;
  /// True motion since the last odometry sample.
  OdometryDelta true_pending;
  OccupancyGrid grid;
  CalibrationState calibration;
  double target_direction = 0.0;
  double steer_heading = 0.0;
  std::optional<Scan> last_scan;
  std::map<int, NeighborCoords> neighbors;
  std::unique_ptr<ParticleFilter> filter;
};

enum class EventKind { kNoLos, kDegenerateGeometry, kDropped, kGateSkip, kFilterReset };

std::string to_string(EventKind kind);

struct Event {
  int robot = 0;
  EventKind kind = EventKind::kNoLos;
};

struct RobotTrace {
  Pose2 true_pose;
  Pose2 estimate;
  EstimateSource source = EstimateSource::kDeadReckoned;
  double error = 0.0;
};

struct TraceRecord {
  double t = 0.0;
  std::vector<RobotTrace> robots;
  std::vector<Event> events;
};

struct MapErrorSample {
  double t = 0.0;
  PixelError error;
};

struct TimingStats {
  std::size_t count = 0;
  double total = 0.0;
  double max = 0.0;

  void add(double seconds);
  double mean() const { return count ? total / static_cast<double>(count) : 0.0; }
};

struct RunMetrics {
  PixelError final_map_error;
  double max_localization_error = 0.0;
  double mean_localization_error = 0.0;
  std::vector<double> per_robot_max_error;
  std::size_t trilaterations = 0;
  std::map<std::string, std::size_t> event_counts;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  std::vector<MapErrorSample> map_errors;
  OccupancyGrid merged_map;
  std::vector<OccupancyGrid> robot_maps;
  RunMetrics metrics;
  std::map<std::string, TimingStats> timing;
};

/// Discrete-time multi-robot simulation of one scenario.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Frame setup and ranging calibration. Called by run(); idempotent.
  void initialize();
  /// Advances one tick and returns its record.
  const TraceRecord& step();
  bool done() const;
  RunResult run();

  double clock() const;
  const Scenario& scenario() const { return scenario_; }
  const Environment& environment() const { return env_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const OccupancyGrid& merged_map() const;
  const std::map<std::string, TimingStats>& timing() const { return timing_; }

 private:
  struct Impl;

  Scenario scenario_;
  Environment env_;
  std::vector<RobotState> robots_;
  std::map<std::string, TimingStats> timing_;
  std::unique_ptr<Impl> impl_;
};

/// Convenience: build, run and return everything.
RunResult run_simulation(const Scenario& scenario);

}  // namespace team
