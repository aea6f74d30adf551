#include "team/sensors.hpp"

#include <algorithm>
#include <cmath>

#include "team/error.hpp"

namespace team {

void UwbModel::validate() const {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kConfig, "uwb.sigma must be >= 0");
  if (n_average < 1) throw Error(ErrorCode::kConfig, "uwb.n_average must be >= 1");
  if (!(max_range > 0.0)) throw Error(ErrorCode::kConfig, "uwb.max_range must be > 0");
}

std::optional<double> uwb_range(const UwbModel& model, const Environment& env, Point2 self,
                                Point2 anchor, RandomStream& rng) {
  if (self == anchor) throw Error(ErrorCode::kDomain, "cannot range to own position");
  const double d_true = distance(self, anchor);
  if (d_true > model.max_range || !line_of_sight(env, self, anchor)) return std::nullopt;
  // Averaging the noise separately keeps the noiseless case exact: d_true + mu.
  double noise = 0.0;
  for (int i = 0; i < model.n_average; ++i) noise += rng.normal(0.0, model.sigma);
  noise /= static_cast<double>(model.n_average);
  return std::max(0.0, d_true + model.mu + noise);
}

void LidarModel::validate() const {
  if (n_beams < 1) throw Error(ErrorCode::kConfig, "lidar.n_beams must be >= 1");
  if (std::abs(n_beams * angular_resolution - 2.0 * std::numbers::pi) > 1e-9) {
    throw Error(ErrorCode::kConfig, "lidar.n_beams * angular_resolution must equal 2*pi");
  }
  if (!(rate > 0.0)) throw Error(ErrorCode::kConfig, "lidar.rate must be > 0");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kConfig, "lidar.sigma must be >= 0");
  if (!(max_range > 0.0)) throw Error(ErrorCode::kConfig, "lidar.max_range must be > 0");
}

Scan lidar_scan(const LidarModel& model, const Environment& env, const Pose2& true_pose,
                double t, RandomStream& rng) {
  if (!env.bounds().contains(true_pose.position())) {
    throw Error(ErrorCode::kDomain, "scan pose lies outside the environment bounds");
  }
  Scan scan;
  scan.pose_of_record = true_pose;
  scan.timestamp = t;
  scan.angular_resolution = model.angular_resolution;
  scan.max_range = model.max_range;
  scan.ranges.reserve(static_cast<std::size_t>(model.n_beams));
  for (int k = 0; k < model.n_beams; ++k) {
    const double angle = true_pose.theta + k * model.angular_resolution;
    auto r = raycast(env, true_pose.position(), angle, model.max_range);
    if (r) *r = std::clamp(*r + rng.normal(0.0, model.sigma), 0.0, model.max_range);
    scan.ranges.push_back(r);
  }
  return scan;
}

void OdometryModel::validate() const {
  if (!(variance >= 0.0)) throw Error(ErrorCode::kConfig, "odometry.variance must be >= 0");
}

OdometryDelta accumulate(const OdometryDelta& a, const OdometryDelta& b) {
  const Pose2 end = compose(Pose2{a.dx, a.dy, a.dtheta}, b);
  return {end.x, end.y, wrap_angle(a.dtheta + b.dtheta), b.timestamp};
}

OdometryDelta odometry_step(const OdometryModel& model, const OdometryDelta& true_delta,
                            RandomStream& rng) {
  if (true_delta.is_zero()) return true_delta;
  const double sd = std::sqrt(model.variance);
  OdometryDelta out = true_delta;
  out.dx += rng.normal(0.0, sd);
  out.dy += rng.normal(0.0, sd);
  out.dtheta += rng.normal(0.0, sd);
  return out;
}

}  // namespace team
