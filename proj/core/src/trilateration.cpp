#include "team/trilateration.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace team {
namespace {

struct Circle {
  Point2 c;
  double r;
};

// Intersection points of two circles, or nullopt when they do not meet.
std::optional<std::array<Point2, 2>> intersect(const Circle& a, const Circle& b) {
  const Point2 delta = b.c - a.c;
  const double d = norm(delta);
  if (d > a.r + b.r || d < std::abs(a.r - b.r)) return std::nullopt;
  const double along = (a.r * a.r - b.r * b.r + d * d) / (2.0 * d);
  const double h = std::sqrt(std::max(0.0, a.r * a.r - along * along));
  const Point2 u = (1.0 / d) * delta;
  const Point2 mid = a.c + along * u;
  const Point2 n{-u.y, u.x};
  return std::array<Point2, 2>{mid + h * n, mid - h * n};
}

double triangle_area(Point2 a, Point2 b, Point2 c) { return 0.5 * std::abs(cross(b - a, c - a)); }

// Solves the two equations obtained by subtracting the first circle from the others.
Point2 linear_least_squares(const std::array<Circle, 3>& k) {
  const double a11 = 2.0 * (k[1].c.x - k[0].c.x), a12 = 2.0 * (k[1].c.y - k[0].c.y);
  const double a21 = 2.0 * (k[2].c.x - k[0].c.x), a22 = 2.0 * (k[2].c.y - k[0].c.y);
  const double n0 = dot(k[0].c, k[0].c);
  const double b1 = k[0].r * k[0].r - k[1].r * k[1].r + dot(k[1].c, k[1].c) - n0;
  const double b2 = k[0].r * k[0].r - k[2].r * k[2].r + dot(k[2].c, k[2].c) - n0;
  const double det = a11 * a22 - a12 * a21;
  return {(b1 * a22 - b2 * a12) / det, (a11 * b2 - a21 * b1) / det};
}

}  // namespace

std::vector<AnchorFix> select_anchors(std::span<const AnchorFix> fixes) {
  std::vector<AnchorFix> sorted(fixes.begin(), fixes.end());
  const auto keep = std::min<std::size_t>(3, sorted.size());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(keep),
                    sorted.end(), [](const AnchorFix& a, const AnchorFix& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.anchor_id < b.anchor_id;
                    });
  sorted.resize(keep);
  return sorted;
}

Point2 trilaterate_2d(std::span<const AnchorFix> anchors, std::optional<Point2> previous) {
  if (anchors.size() != 3) {
    throw Error(ErrorCode::kDomain, "trilateration needs exactly three anchors");
  }
  const std::array<Circle, 3> k{Circle{anchors[0].position, anchors[0].distance},
                                Circle{anchors[1].position, anchors[1].distance},
                                Circle{anchors[2].position, anchors[2].distance}};
  for (int i = 0; i < 3; ++i) {
    if (k[i].c == k[(i + 1) % 3].c) {
      throw Error(ErrorCode::kDegenerateGeometry, "two anchors share a position");
    }
  }
  if (triangle_area(k[0].c, k[1].c, k[2].c) < kMinAnchorArea) {
    throw Error(ErrorCode::kDegenerateGeometry, "anchors are collinear");
  }

  constexpr std::array<std::array<int, 3>, 3> kPairs{{{0, 1, 2}, {1, 2, 0}, {0, 2, 1}}};
  std::array<Point2, 3> inner{};
  for (std::size_t p = 0; p < kPairs.size(); ++p) {
    const auto [i, j, third] = kPairs[p];
    const auto points = intersect(k[i], k[j]);
    if (!points) return linear_least_squares(k);
    const auto residual = [&](Point2 q) { return std::abs(distance(q, k[third].c) - k[third].r); };
    const double r0 = residual((*points)[0]);
    const double r1 = residual((*points)[1]);
    if (r0 < r1) {
      inner[p] = (*points)[0];
    } else if (r1 < r0) {
      inner[p] = (*points)[1];
    } else if (previous) {
      inner[p] = distance((*points)[1], *previous) < distance((*points)[0], *previous)
                     ? (*points)[1]
                     : (*points)[0];
    } else {
      inner[p] = (*points)[0];
    }
  }
  return (1.0 / 3.0) * (inner[0] + inner[1] + inner[2]);
}

EstimateUpdate update_estimate_detailed(const PositionEstimate& prev, const OdometryDelta& odom,
                                        std::span<const AnchorFix> fixes, double clock,
                                        const FixGate& gate) {
  EstimateUpdate out;
  const Pose2 dead_reckoned = compose(prev.pose, odom);
  const double stamp = std::max(clock, prev.timestamp);

  std::vector<AnchorFix> fresh;
  fresh.reserve(fixes.size());
  for (const auto& f : fixes) {
    if (f.age <= gate.max_age) fresh.push_back(f);
  }
  const auto anchors = select_anchors(fresh);
  out.anchors_used = static_cast<int>(anchors.size());
  if (anchors.size() == 3) {
    try {
      const Point2 p = trilaterate_2d(anchors, dead_reckoned.position());
      double worst = std::isfinite(p.x) && std::isfinite(p.y) ? 0.0 : INFINITY;
      for (const auto& a : anchors) worst = std::max(worst, std::abs(distance(p, a.position) - a.distance));
      if (!(worst <= gate.max_residual)) {
        throw Error(ErrorCode::kDegenerateGeometry, "trilateration outside the plausibility gate");
      }
      out.estimate = {{p.x, p.y, dead_reckoned.theta}, EstimateSource::kTrilaterated, stamp};
      return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGeometry) throw;
      out.degenerate = true;
    }
  }
  out.estimate = {dead_reckoned, EstimateSource::kDeadReckoned, stamp};
  return out;
}

std::vector<Point2> initialize_frame(const std::vector<std::vector<double>>& d,
                                     double tolerance) {
  const std::size_t n = d.size();
  if (n < 3) throw Error(ErrorCode::kDomain, "frame initialization needs at least three robots");
  for (const auto& row : d) {
    if (row.size() != n) throw Error(ErrorCode::kDomain, "distance table must be square");
  }
  auto dist = [&](std::size_t i, std::size_t j) { return 0.5 * (d[i][j] + d[j][i]); };
  const double d01 = dist(0, 1), d02 = dist(0, 2), d12 = dist(1, 2);
  if (d01 == 0.0) throw Error(ErrorCode::kDegenerateGeometry, "robots 0 and 1 coincide");
  if (d01 > d02 + d12 + tolerance || d02 > d01 + d12 + tolerance ||
      d12 > d01 + d02 + tolerance) {
    throw Error(ErrorCode::kInconsistentRanges, "ranges among robots 0, 1, 2 violate the triangle inequality");
  }
  const double y = (d02 * d02 + d01 * d01 - d12 * d12) / (2.0 * d01);
  const double x = std::sqrt(std::max(0.0, d02 * d02 - y * y));

  std::vector<Point2> out{{0.0, 0.0}, {0.0, d01}, {x, y}};
  for (std::size_t i = 3; i < n; ++i) {
    const std::array<AnchorFix, 3> anchors{AnchorFix{0, out[0], dist(i, 0), 0.0},
                                           AnchorFix{1, out[1], dist(i, 1), 0.0},
                                           AnchorFix{2, out[2], dist(i, 2), 0.0}};
    out.push_back(trilaterate_2d(anchors));
  }
  return out;
}

double initialize_heading(Point2 before, Point2 after, double commanded_distance) {
  if (!(commanded_distance > 0.0)) {
    throw Error(ErrorCode::kDomain, "commanded distance must be positive");
  }
  if (distance(before, after) < 0.25 * commanded_distance) {
    throw Error(ErrorCode::kUnreliableHeading, "probe displacement too short for a heading");
  }
  return std::atan2(after.y - before.y, after.x - before.x);
}

CalibrationState calibrate(const CalibrationState& state, double measured, double true_distance) {
  CalibrationState next;
  next.n_samples = state.n_samples + 1;
  next.bias = state.bias + ((measured - true_distance) - state.bias) / next.n_samples;
  return next;
}

}  // namespace team
