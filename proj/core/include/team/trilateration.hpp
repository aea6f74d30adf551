#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "team/error.hpp"
#include "team/geometry.hpp"
#include "team/sensors.hpp"

namespace team {

/// A range to a neighbour together with the neighbour's own position estimate.
struct AnchorFix {
  int anchor_id = 0;
  Point2 position;
  double distance = 0.0;
  /// Seconds since the neighbour's position estimate was received.
  double age = 0.0;
};

enum class EstimateSource { kTrilaterated, kDeadReckoned };

struct PositionEstimate {
  Pose2 pose;
  EstimateSource source = EstimateSource::kDeadReckoned;
  double timestamp = 0.0;
};

/// Running estimate of the constant ranging offset.
struct CalibrationState {
  double bias = 0.0;
  int n_samples = 0;

  double correct(double measured) const { return measured - bias; }
};

/// Anchors below this triangle area (m^2) are treated as collinear.
inline constexpr double kMinAnchorArea = 1e-6;

/// The (up to) three nearest fixes, ties broken by smaller anchor id.
std::vector<AnchorFix> select_anchors(std::span<const AnchorFix> fixes);

/// Position from exactly three anchors: centroid of the three pairwise circle
/// intersections (of each pair, the point closer to the third circle); falls back to
/// the linearised least-squares solution when any pair of circles fails to meet.
/// Throws Error(kDegenerateGeometry) for coincident or collinear anchors.
Point2 trilaterate_2d(std::span<const AnchorFix> anchors,
                      std::optional<Point2> previous = std::nullopt);

struct EstimateUpdate {
  PositionEstimate estimate;
  /// Set when three anchors were available but their geometry was unusable.
  bool degenerate = false;
  /// Anchors actually used (after staleness filter and selection).
  int anchors_used = 0;
};

/// Plausibility limits applied before a fix set or its solution is accepted.
struct FixGate {
  /// Fixes older than this (s) are ignored.
  double max_age = std::numeric_limits<double>::infinity();
  /// Solutions missing any of their ranges by more than this (m) are rejected.
  double max_residual = std::numeric_limits<double>::infinity();
};

/// One localization step: trilaterate when three fresh fixes exist, otherwise
/// dead-reckon from the previous estimate. Heading always follows odometry.
/// A solution that is not finite or fails the gate counts as degenerate geometry;
/// near-collinear anchors in narrow passages otherwise throw the solver far off.
EstimateUpdate update_estimate_detailed(const PositionEstimate& prev, const OdometryDelta& odom,
                                        std::span<const AnchorFix> fixes, double clock,
                                        const FixGate& gate = {});

inline PositionEstimate update_estimate(const PositionEstimate& prev, const OdometryDelta& odom,
                                        std::span<const AnchorFix> fixes, double clock,
                                        const FixGate& gate = {}) {
  return update_estimate_detailed(prev, odom, fixes, clock, gate).estimate;
}

/// Anchorless frame from pairwise ranges among robots 0..n-1 (n >= 3).
/// Robot 0 is the origin, robot 1 lies on +y, robot 2 has positive x; the rest are
/// trilaterated from robots 0, 1 and 2.
/// Throws kInconsistentRanges on a triangle-inequality violation and
/// kDegenerateGeometry when d01 is zero.
std::vector<Point2> initialize_frame(const std::vector<std::vector<double>>& distances,
                                     double tolerance = 1e-9);

/// Heading from a straight probe move; throws kUnreliableHeading when the observed
/// displacement is under a quarter of the commanded distance.
double initialize_heading(Point2 before, Point2 after, double commanded_distance);

CalibrationState calibrate(const CalibrationState& state, double measured, double true_distance);

}  // namespace team
