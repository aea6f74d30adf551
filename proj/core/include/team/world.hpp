#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "team/geometry.hpp"
#include "team/occupancy_grid.hpp"

namespace team {

/// Static 2D environment: zero-thickness walls inside a bounding rectangle, plus the
/// ground-truth raster used for map scoring. Immutable after construction.
class Environment {
 public:
  Environment(std::vector<Segment> segments, Bounds bounds,
              double truth_resolution = kDefaultResolution);

  const std::vector<Segment>& segments() const { return segments_; }
  const Bounds& bounds() const { return bounds_; }
  const OccupancyGrid& truth_raster() const { return truth_; }

 private:
  std::vector<Segment> segments_;
  Bounds bounds_;
  OccupancyGrid truth_;
};

/// True iff the open segment pq crosses no wall. Symmetric in p and q.
bool line_of_sight(const Environment& env, Point2 p, Point2 q);

/// Distance to the nearest wall along the ray, or nullopt if nothing lies within
/// max_range. Grazing a wall endpoint counts as a hit.
std::optional<double> raycast(const Environment& env, Point2 origin, double angle,
                              double max_range);

/// Distance along the straight path from `from` to `to` at which the first wall is
/// met, or nullopt if the path is clear.
std::optional<double> first_wall_hit(const Environment& env, Point2 from, Point2 to);

/// Ground truth over the environment bounds: cells crossed by a wall are OCCUPIED,
/// every other cell inside the bounds is FREE.
OccupancyGrid rasterize(const Environment& env, double resolution);

/// Cell box covering `bounds` on the lattice of the given resolution.
CellBox cell_box_covering(const Bounds& bounds, double resolution);

/// Initial placement of one robot in a built-in layout.
struct RobotStart {
  Pose2 pose;
  double target_direction = 0.0;
};

/// A built-in layout: environment geometry plus default robot and sink placement.
struct Layout {
  std::vector<Segment> segments;
  Bounds bounds;
  std::vector<RobotStart> robots;
  Point2 sink;
};

/// Straight corridor of the given length and width, closed at both ends.
Layout corridor_layout(double length = 40.0, double width = 4.0);
/// Trunk with one junction splitting into two arms; a divider blocks sight between arms.
Layout y_maze_layout(double trunk_length = 14.0, double arm_length = 12.0, double width = 4.0);
/// Irregular tunnel whose main line continues straight while a side branch leaves it.
Layout branched_tunnel_layout(double trunk_length = 22.0, double main_length = 24.0,
                              double branch_length = 16.0, double width = 5.0);

/// Looks up a built-in layout by name ("corridor", "y_maze", "branched_tunnel").
std::optional<Layout> builtin_layout(const std::string& name);

}  // namespace team
