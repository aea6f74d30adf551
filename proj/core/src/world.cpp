#include "team/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "team/error.hpp"

namespace team {
namespace {

constexpr double kParallelEps = 1e-15;

void require_inside(const Environment& env, Point2 p, const char* what) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !env.bounds().contains(p)) {
    throw Error(ErrorCode::kDomain, std::string(what) + " lies outside the environment bounds");
  }
}

// Walls are laid on cell centres of the default lattice so that a beam endpoint on a
// wall lands inside the wall's raster cell rather than on a cell boundary.
constexpr double kLatticeOffset = 0.025;

Bounds bounds_around(const std::vector<Segment>& segments, double margin) {
  double x0 = std::numeric_limits<double>::max(), y0 = x0;
  double x1 = std::numeric_limits<double>::lowest(), y1 = x1;
  for (const auto& s : segments) {
    for (Point2 p : {s.a, s.b}) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  auto down = [](double v) { return std::floor(v * 2.0) / 2.0; };
  auto up = [](double v) { return std::ceil(v * 2.0) / 2.0; };
  return {down(x0 - margin), down(y0 - margin), up(x1 + margin), up(y1 + margin)};
}

void add_polyline(std::vector<Segment>& out, const std::vector<Point2>& pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) out.push_back({pts[i], pts[i + 1]});
}

// Deterministic wall roughness for the tunnel: offsets repeat every five vertices.
double roughness(std::size_t i) {
  static constexpr double kPattern[] = {0.0, 0.18, -0.12, 0.22, -0.05};
  return kPattern[i % 5];
}

std::vector<Point2> rough_line(Point2 from, Point2 to, double spacing, double sign) {
  const double len = distance(from, to);
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(len / spacing)));
  const Point2 dir = (1.0 / len) * (to - from);
  const Point2 normal{-dir.y, dir.x};
  std::vector<Point2> pts;
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = len * static_cast<double>(i) / static_cast<double>(n);
    const double off = (i == 0 || i == n) ? 0.0 : sign * roughness(i);
    pts.push_back(from + s * dir + off * normal);
  }
  return pts;
}

}  // namespace

Environment::Environment(std::vector<Segment> segments, Bounds bounds, double truth_resolution)
    : segments_(std::move(segments)), bounds_(bounds), truth_(truth_resolution) {
  if (!(bounds_.max_x > bounds_.min_x && bounds_.max_y > bounds_.min_y)) {
    throw Error(ErrorCode::kDomain, "environment bounds are empty");
  }
  for (const auto& s : segments_) {
    if (s.a == s.b) throw Error(ErrorCode::kDomain, "wall segment has coincident endpoints");
    if (!bounds_.contains(s.a) || !bounds_.contains(s.b)) {
      throw Error(ErrorCode::kDomain, "wall segment extends outside the environment bounds");
    }
  }
  truth_ = rasterize(*this, truth_resolution);
}

bool line_of_sight(const Environment& env, Point2 p, Point2 q) {
  require_inside(env, p, "line-of-sight endpoint");
  require_inside(env, q, "line-of-sight endpoint");
  // Canonical order makes the floating-point evaluation identical for (p,q) and (q,p).
  if (q.x < p.x || (q.x == p.x && q.y < p.y)) std::swap(p, q);
  const Point2 r = q - p;
  for (const auto& w : env.segments()) {
    const Point2 s = w.b - w.a;
    const double denom = cross(r, s);
    if (std::abs(denom) < kParallelEps) continue;
    const Point2 ap = w.a - p;
    const double t = cross(ap, s) / denom;
    const double u = cross(ap, r) / denom;
    if (t > 0.0 && t < 1.0 && u >= 0.0 && u <= 1.0) return false;
  }
  return true;
}

std::optional<double> raycast(const Environment& env, Point2 origin, double angle,
                              double max_range) {
  require_inside(env, origin, "ray origin");
  if (!(max_range > 0.0)) throw Error(ErrorCode::kDomain, "raycast max_range must be positive");
  const Point2 dir = unit_vector(angle);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : env.segments()) {
    const Point2 s = w.b - w.a;
    const double denom = cross(dir, s);
    if (std::abs(denom) < kParallelEps) continue;
    const Point2 ao = w.a - origin;
    const double t = cross(ao, s) / denom;
    if (t < 0.0 || t >= best) continue;
    const double u = cross(ao, dir) / denom;
    if (u >= 0.0 && u <= 1.0) best = t;
  }
  if (best <= max_range) return best;
  return std::nullopt;
}

std::optional<double> first_wall_hit(const Environment& env, Point2 from, Point2 to) {
  const double len = distance(from, to);
  if (len == 0.0) return std::nullopt;
  return raycast(env, from, std::atan2(to.y - from.y, to.x - from.x), len);
}

CellBox cell_box_covering(const Bounds& bounds, double resolution) {
  const auto x0 = static_cast<std::int64_t>(std::floor(bounds.min_x / resolution + 1e-9));
  const auto y0 = static_cast<std::int64_t>(std::floor(bounds.min_y / resolution + 1e-9));
  const auto x1 = static_cast<std::int64_t>(std::ceil(bounds.max_x / resolution - 1e-9));
  const auto y1 = static_cast<std::int64_t>(std::ceil(bounds.max_y / resolution - 1e-9));
  return {x0, y0, x1 - x0, y1 - y0};
}

OccupancyGrid rasterize(const Environment& env, double resolution) {
  OccupancyGrid grid(resolution);
  const CellBox box = cell_box_covering(env.bounds(), resolution);
  grid.reserve(box);
  for (std::int64_t y = box.y0; y < box.y0 + box.height; ++y) {
    for (std::int64_t x = box.x0; x < box.x0 + box.width; ++x) grid.set({x, y}, {0, 1});
  }
  for (const auto& s : env.segments()) {
    traverse_cells(resolution, s.a, s.b, [&](CellIndex c) { grid.set(c, {1, 0}); });
  }
  return grid;
}

Layout corridor_layout(double length, double width) {
  const double o = kLatticeOffset;
  Layout layout;
  add_polyline(layout.segments, {{o, o}, {length + o, o}, {length + o, width + o},
                                 {o, width + o}, {o, o}});
  layout.bounds = bounds_around(layout.segments, 0.5);
  const double lo = 1.0, hi = width - 1.0;
  layout.robots = {{{1.0, lo, 0.0}, 0.0},
                   {{1.0, hi, 0.0}, 0.0},
                   {{2.5, lo, 0.0}, 0.0},
                   {{2.5, hi, 0.0}, 0.0}};
  layout.sink = {0.5, width / 2.0};
  return layout;
}

Layout y_maze_layout(double trunk_length, double arm_length, double width) {
  const double o = kLatticeOffset;
  const double c = std::cos(std::numbers::pi / 4.0);
  const Point2 up{c, c};
  const Point2 down{c, -c};
  const Point2 top_corner{trunk_length + o, width + o};
  const Point2 bottom_corner{trunk_length + o, o};
  // Inner arm walls sit one arm-width inside the outer walls and meet on the axis.
  const double apex_back = width * (1.0 - c);
  const Point2 apex{trunk_length + o + width * c + apex_back * c, width / 2.0 + o};
  const double inner_len = arm_length - apex_back;

  Layout layout;
  auto& segs = layout.segments;
  add_polyline(segs, {bottom_corner, {o, o}, {o, width + o}, top_corner});
  const Point2 top_outer_end = top_corner + arm_length * up;
  const Point2 top_inner_end = apex + inner_len * up;
  add_polyline(segs, {top_corner, top_outer_end, top_inner_end, apex});
  const Point2 bottom_outer_end = bottom_corner + arm_length * down;
  const Point2 bottom_inner_end = apex + inner_len * down;
  add_polyline(segs, {bottom_corner, bottom_outer_end, bottom_inner_end, apex});
  // Pillar in the trunk between the two robot lanes.
  const double px = trunk_length / 2.0 + o, py = width / 2.0 + o, h = 0.3;
  add_polyline(segs, {{px - h, py - h}, {px + h, py - h}, {px + h, py + h}, {px - h, py + h},
                      {px - h, py - h}});
  layout.bounds = bounds_around(segs, 1.0);
  const double lo = 1.0, hi = width - 1.0;
  const double up_dir = std::numbers::pi / 4.0;
  layout.robots = {{{1.0, lo, 0.0}, up_dir},
                   {{1.0, hi, 0.0}, -up_dir},
                   {{2.5, lo, 0.0}, up_dir},
                   {{2.5, hi, 0.0}, -up_dir}};
  layout.sink = {0.5, width / 2.0};
  return layout;
}

Layout branched_tunnel_layout(double trunk_length, double main_length, double branch_length,
                              double width) {
  const double o = kLatticeOffset;
  const double branch_angle = 40.0 * std::numbers::pi / 180.0;
  const double branch_width = 4.0;
  const double end_x = trunk_length + main_length + o;
  const double opening = branch_width / std::sin(branch_angle);
  const Point2 bdir = unit_vector(branch_angle);

  Layout layout;
  auto& segs = layout.segments;
  // South wall, west cap, north wall up to the branch opening.
  auto south = rough_line({o, o}, {end_x, o}, 2.0, 1.0);
  add_polyline(segs, south);
  add_polyline(segs, {{o, o}, {o, width + o}});
  const Point2 open_w{trunk_length + o, width + o};
  const Point2 open_e{trunk_length + o + opening, width + o};
  add_polyline(segs, rough_line({o, width + o}, open_w, 2.0, -1.0));
  add_polyline(segs, rough_line(open_e, {end_x, width + o}, 2.0, -1.0));
  add_polyline(segs, {{end_x, o}, {end_x, width + o}});
  // Side branch.
  const Point2 west_end = open_w + branch_length * bdir;
  const Point2 east_end = open_e + branch_length * bdir;
  add_polyline(segs, rough_line(open_w, west_end, 2.0, -1.0));
  add_polyline(segs, rough_line(open_e, east_end, 2.0, 1.0));
  add_polyline(segs, {west_end, east_end});

  layout.bounds = bounds_around(segs, 1.0);
  const double lo = width / 4.0, hi = width - width / 4.0;
  // Round-robin branch assignment: even robots take the main line, odd ones the branch.
  layout.robots = {{{1.0, lo, 0.0}, 0.0},
                   {{1.0, hi, 0.0}, branch_angle},
                   {{2.5, lo, 0.0}, 0.0},
                   {{2.5, hi, 0.0}, branch_angle}};
  layout.sink = {0.5, width / 2.0};
  return layout;
}

std::optional<Layout> builtin_layout(const std::string& name) {
  if (name == "corridor") return corridor_layout();
  if (name == "y_maze") return y_maze_layout();
  if (name == "branched_tunnel") return branched_tunnel_layout();
  return std::nullopt;
}

}  // namespace team
