#pragma once

#include <cmath>
#include <numbers>

namespace team {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline Point2 unit_vector(double angle) { return {std::cos(angle), std::sin(angle)}; }

/// Wraps an angle into [-pi, pi).
inline double wrap_angle(double a) {
  if (a >= -std::numbers::pi && a < std::numbers::pi) return a;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

/// Planar pose of a robot, true or estimated. Heading is measured from +x, CCW.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Point2 position() const { return {x, y}; }
  friend constexpr bool operator==(const Pose2&, const Pose2&) = default;
};

/// Applies a displacement expressed in the pose's own frame (forward, left, turn).
inline Pose2 compose(const Pose2& base, double forward, double left, double turn) {
  const double c = std::cos(base.theta);
  const double s = std::sin(base.theta);
  return {base.x + forward * c - left * s, base.y + forward * s + left * c,
          wrap_angle(base.theta + turn)};
}

/// Wall segment with zero thickness.
struct Segment {
  Point2 a;
  Point2 b;
};

/// Axis-aligned rectangle.
struct Bounds {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  bool contains(Point2 p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

}  // namespace team
