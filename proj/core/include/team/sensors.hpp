#pragma once

#include <numbers>
#include <optional>
#include <vector>

#include "team/geometry.hpp"
#include "team/random.hpp"
#include "team/world.hpp"

namespace team {

/// Two-way-ranging model: each call averages `n_average` raw draws of
/// d_true + mu + N(0, sigma). No line of sight, or beyond max_range, yields no range.
struct UwbModel {
  double sigma = 0.10;
  double mu = 0.0;
  int n_average = 10;
  double max_range = 30.0;

  void validate() const;
};

struct RangeMeasurement {
  int anchor_id = 0;
  double distance = 0.0;
  double timestamp = 0.0;
};

std::optional<double> uwb_range(const UwbModel& model, const Environment& env, Point2 self,
                                Point2 anchor, RandomStream& rng);

struct LidarModel {
  int n_beams = 360;
  double angular_resolution = 2.0 * std::numbers::pi / 360.0;
  double rate = 5.0;
  double sigma = 0.01;
  double max_range = 3.5;

  void validate() const;
};

/// One 360-degree sweep. Beam k points at pose_of_record.theta + k * angular_resolution.
struct Scan {
  std::vector<std::optional<double>> ranges;
  Pose2 pose_of_record;
  double timestamp = 0.0;
  double angular_resolution = 2.0 * std::numbers::pi / 360.0;
  double max_range = 3.5;
};

Scan lidar_scan(const LidarModel& model, const Environment& env, const Pose2& true_pose,
                double t, RandomStream& rng);

struct OdometryModel {
  /// Variance added to each component of every reported displacement sample.
  double variance = 1e-5;

  void validate() const;
};

/// Displacement in the robot frame at the start of the motion.
struct OdometryDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;
  double timestamp = 0.0;

  bool is_zero() const { return dx == 0.0 && dy == 0.0 && dtheta == 0.0; }
};

/// Chains two robot-frame displacements: first `a`, then `b` from where `a` ended.
OdometryDelta accumulate(const OdometryDelta& a, const OdometryDelta& b);

inline Pose2 compose(const Pose2& base, const OdometryDelta& d) {
  return compose(base, d.dx, d.dy, d.dtheta);
}

/// Reported odometry for one sample. Zero motion reports zero (no drift at rest).
OdometryDelta odometry_step(const OdometryModel& model, const OdometryDelta& true_delta,
                            RandomStream& rng);

}  // namespace team
