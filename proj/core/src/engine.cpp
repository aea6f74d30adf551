#include "team/engine.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include "team/error.hpp"
#include "team/tdma.hpp"

namespace team {
namespace {

using Clock = std::chrono::steady_clock;

// Trilaterated positions that miss any corrected range by more than this (m) are
// discarded in favour of dead reckoning.
constexpr double kMaxRangeResidual = 0.5;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// World-frame scan endpoints; beams without a return are placed at max range.
struct ScanPoint {
  Point2 p;
  bool hit;
};

std::vector<ScanPoint> scan_points(const Scan& scan) {
  std::vector<ScanPoint> pts;
  pts.reserve(scan.ranges.size());
  const Pose2& o = scan.pose_of_record;
  for (std::size_t k = 0; k < scan.ranges.size(); ++k) {
    const double a = o.theta + static_cast<double>(k) * scan.angular_resolution;
    const auto& r = scan.ranges[k];
    pts.push_back({o.position() + (r ? *r : scan.max_range) * unit_vector(a), r.has_value()});
  }
  return pts;
}

// Least-squares rigid map (rotation, optional reflection, translation) taking
// `from` onto `to`.
struct Alignment {
  double c = 1.0, s = 0.0;
  bool reflect = false;
  Point2 offset;

  Point2 linear(Point2 p) const {
    if (reflect) p.y = -p.y;
    return {c * p.x - s * p.y, s * p.x + c * p.y};
  }
  Point2 apply(Point2 p) const { return linear(p) + offset; }
  double apply_heading(double theta) const {
    const Point2 u = linear(unit_vector(theta));
    return std::atan2(u.y, u.x);
  }
};

Alignment fit_alignment(const std::vector<Point2>& from, const std::vector<Point2>& to) {
  Point2 fa, ta;
  for (std::size_t i = 0; i < from.size(); ++i) {
    fa = fa + from[i];
    ta = ta + to[i];
  }
  const double inv = 1.0 / static_cast<double>(from.size());
  fa = inv * fa;
  ta = inv * ta;
  Alignment best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (bool reflect : {false, true}) {
    Alignment a;
    a.reflect = reflect;
    double sd = 0.0, sc = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      Point2 f = from[i] - fa;
      if (reflect) f.y = -f.y;
      const Point2 t = to[i] - ta;
      sd += dot(f, t);
      sc += cross(f, t);
    }
    const double angle = std::atan2(sc, sd);
    a.c = std::cos(angle);
    a.s = std::sin(angle);
    a.offset = ta - a.linear(fa);
    double residual = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
      const Point2 d = a.apply(from[i]) - to[i];
      residual += dot(d, d);
    }
    if (residual < best_residual) {
      best_residual = residual;
      best = a;
    }
  }
  return best;
}

}  // namespace

double choose_heading(const DriveConfig& config, const Pose2& pose, double target,
                      const Scan* scan) {
  if (!scan) return target;
  const auto pts = scan_points(*scan);
  const Point2 p = pose.position();
  auto open = [&](double heading) {
    const Point2 u = unit_vector(heading);
    for (const auto& q : pts) {
      if (!q.hit) continue;
      const Point2 v = q.p - p;
      const double along = dot(v, u);
      if (along <= 0.0 || along > config.lookahead) continue;
      if (std::abs(cross(u, v)) < config.corridor_half_width) return false;
    }
    return true;
  };
  if (open(target)) return target;
  constexpr double kStep = std::numbers::pi / 90.0;
  for (int m = 1; m <= 90; ++m) {
    for (double sign : {1.0, -1.0}) {
      const double h = wrap_angle(target + sign * m * kStep);
      if (open(h)) return h;
    }
  }
  return target;
}

OdometryDelta drive_step(const DriveConfig& config, const Pose2& pose, double steer_heading,
                         const Scan* scan, bool allowed, double tick) {
  if (!allowed) return {};
  const double max_turn = config.max_turn_rate * tick;
  if (scan) {
    const Point2 p = pose.position();
    const Point2 u = unit_vector(pose.theta);
    const double cos_cone = std::cos(config.cone_half_angle);
    bool blocked = false;
    double left = 0.0, right = 0.0;
    int n_left = 0, n_right = 0;
    for (const auto& q : scan_points(*scan)) {
      const Point2 v = q.p - p;
      const double r = norm(v);
      if (r == 0.0) continue;
      const double along = dot(v, u);
      const double side = cross(u, v);
      if (q.hit && along >= r * cos_cone && r < config.clearance) blocked = true;
      if (along < 0.0) continue;
      if (side > 0.0) {
        left += r;
        ++n_left;
      } else if (side < 0.0) {
        right += r;
        ++n_right;
      }
    }
    if (blocked) {
      const double mean_left = n_left ? left / n_left : 0.0;
      const double mean_right = n_right ? right / n_right : 0.0;
      return {0.0, 0.0, mean_left >= mean_right ? max_turn : -max_turn, 0.0};
    }
  }
  const double err = wrap_angle(steer_heading - pose.theta);
  const double turn = std::clamp(err, -max_turn, max_turn);
  const double forward =
      std::abs(err) < config.cone_half_angle ? config.max_speed * tick : 0.0;
  return {forward, 0.0, turn, 0.0};
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kNoLos: return "NO_LOS";
    case EventKind::kDegenerateGeometry: return "DEGENERATE_GEOMETRY";
    case EventKind::kDropped: return "DROPPED";
    case EventKind::kGateSkip: return "GATE_SKIP";
    case EventKind::kFilterReset: return "FILTER_RESET";
  }
  return "UNKNOWN";
}

void TimingStats::add(double seconds) {
  ++count;
  total += seconds;
  max = std::max(max, seconds);
}

struct Simulation::Impl {
  std::int64_t k = 0;
  std::int64_t n_ticks = 0;
  std::int64_t odom_ticks = 1, lidar_ticks = 1, batch_ticks = 1, window_ticks = 1;
  std::int64_t coords_ticks = 1, map_ticks = 1;
  bool initialized = false;
  TdmaSchedule schedule;

  struct Streams {
    RandomStream uwb, lidar, odometry, comms;
  };
  std::vector<Streams> rng;

  MessageQueue queue;
  std::vector<std::optional<std::pair<double, OccupancyGrid>>> sink_maps;
  OccupancyGrid merged;
  bool merged_dirty = false;

  TraceRecord record;
  std::vector<TraceRecord> trace;
  std::vector<MapErrorSample> map_errors;
  std::size_t trilaterations = 0;
};

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)),
      env_(scenario_.segments, scenario_.bounds, scenario_.config.mapping.resolution),
      impl_(std::make_unique<Impl>()) {
  scenario_.validate();
  const SimConfig& c = scenario_.config;
  const int n = static_cast<int>(scenario_.robots.size());
  auto& m = *impl_;
  m.n_ticks = static_cast<std::int64_t>(std::llround(c.duration / c.tick));
  m.odom_ticks = ticks_per_period(1.0 / c.odometry_rate, c.tick, "odometry.rate");
  m.lidar_ticks = ticks_per_period(1.0 / c.lidar.rate, c.tick, "lidar.rate");
  m.batch_ticks = ticks_per_period(c.uwb.n_average / c.uwb_rate, c.tick, "uwb.rate");
  m.window_ticks = ticks_per_period(c.tdma.window, c.tick, "tdma.window");
  m.coords_ticks =
      ticks_per_period(1.0 / c.mapping.coords_publish_rate, c.tick, "mapping.coords_publish_rate");
  m.map_ticks =
      ticks_per_period(1.0 / c.mapping.map_publish_rate, c.tick, "mapping.map_publish_rate");
  m.schedule = c.tdma;
  m.schedule.n_robots = n;
  m.sink_maps.resize(static_cast<std::size_t>(n));
  m.merged = OccupancyGrid(c.mapping.resolution, c.mapping.occupancy_threshold);

  for (int i = 0; i < n; ++i) {
    const auto owner = static_cast<std::uint64_t>(i);
    m.rng.push_back({RandomStream::for_owner(c.seed, owner, StreamKind::kUwb),
                     RandomStream::for_owner(c.seed, owner, StreamKind::kLidar),
                     RandomStream::for_owner(c.seed, owner, StreamKind::kOdometry),
                     RandomStream::for_owner(c.seed, owner, StreamKind::kComms)});
    RobotState r;
    r.id = i;
    r.true_pose = scenario_.robots[static_cast<std::size_t>(i)].pose;
    r.target_direction = scenario_.robots[static_cast<std::size_t>(i)].target_direction;
    r.steer_heading = r.target_direction;
    r.grid = OccupancyGrid(c.mapping.resolution, c.mapping.occupancy_threshold);
    robots_.push_back(std::move(r));
  }
}

Simulation::~Simulation() = default;

double Simulation::clock() const {
  return static_cast<double>(impl_->k) * scenario_.config.tick;
}

bool Simulation::done() const { return impl_->k >= impl_->n_ticks; }

const OccupancyGrid& Simulation::merged_map() const { return impl_->merged; }

void Simulation::initialize() {
  auto& m = *impl_;
  if (m.initialized) return;
  m.initialized = true;
  const SimConfig& c = scenario_.config;
  const auto n = robots_.size();

  if (c.init.mode == InitMode::kKnown) {
    for (auto& r : robots_) r.estimate = {r.true_pose, EstimateSource::kDeadReckoned, 0.0};
  } else {
    // Anchorless bootstrap: pairwise ranges, frame construction, heading probes.
    std::vector<RandomStream> init_rng;
    for (std::size_t i = 0; i < n; ++i) {
      init_rng.push_back(RandomStream::for_owner(c.seed, i, StreamKind::kInit));
    }
    auto range = [&](std::size_t i, std::size_t j) {
      const auto d = uwb_range(c.uwb, env_, robots_[i].true_pose.position(),
                               robots_[j].true_pose.position(), init_rng[i]);
      if (!d) {
        throw Error(ErrorCode::kConfig, "bootstrap initialization needs line of sight between robots " +
                                            std::to_string(i) + " and " + std::to_string(j));
      }
      return *d;
    };
    std::vector<std::vector<double>> table(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) table[i][j] = table[j][i] = range(i, j);
    }
    auto frame = initialize_frame(table, 0.05);
    std::vector<double> headings(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& r = robots_[i];
      const double probe = c.init.heading_probe_distance;
      const Point2 p = r.true_pose.position();
      const Point2 u = unit_vector(r.true_pose.theta);
      double travel = probe;
      if (const auto hit = first_wall_hit(env_, p, p + (probe + c.drive.standoff) * u)) {
        travel = std::max(0.0, *hit - c.drive.standoff);
      }
      r.true_pose = compose(r.true_pose, travel, 0.0, 0.0);
      std::vector<AnchorFix> anchors;
      for (std::size_t j = 0; j < n && anchors.size() < 3; ++j) {
        if (j != i) anchors.push_back({static_cast<int>(j), frame[j], range(i, j), 0.0});
      }
      const Point2 after = trilaterate_2d(anchors, frame[i]);
      headings[i] = initialize_heading(frame[i], after, probe);
      frame[i] = after;
    }
    std::vector<Point2> truth;
    for (const auto& r : robots_) truth.push_back(r.true_pose.position());
    const Alignment a = fit_alignment(frame, truth);
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 w = a.apply(frame[i]);
      robots_[i].estimate = {{w.x, w.y, a.apply_heading(headings[i])},
                             EstimateSource::kTrilaterated, 0.0};
    }
  }

  if (c.algorithm == Algorithm::kTeam && c.init.mode == InitMode::kKnown) {
    for (std::size_t i = 0; i < n; ++i) {
      for (int b = 0; b < c.init.calibration_batches; ++b) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i) continue;
          const Point2 pi = robots_[i].true_pose.position();
          const Point2 pj = robots_[j].true_pose.position();
          if (const auto d = uwb_range(c.uwb, env_, pi, pj, m.rng[i].uwb)) {
            robots_[i].calibration = calibrate(robots_[i].calibration, *d, distance(pi, pj));
          }
        }
      }
    }
  }

  for (auto& r : robots_) {
    for (const auto& other : robots_) {
      if (other.id != r.id) r.neighbors[other.id] = {other.estimate, 0.0};
    }
    if (c.algorithm == Algorithm::kParticleFilter) {
      r.filter = std::make_unique<ParticleFilter>(
          c.pf, r.estimate.pose, c.mapping.resolution, c.mapping.occupancy_threshold,
          RandomStream::for_owner(c.seed, static_cast<std::uint64_t>(r.id), StreamKind::kParticles));
    }
  }
}

const TraceRecord& Simulation::step() {
  initialize();
  auto& m = *impl_;
  const SimConfig& c = scenario_.config;
  const auto step_start = Clock::now();
  const double t = clock();
  const int n = static_cast<int>(robots_.size());
  const int sink = n;
  const bool team = c.algorithm == Algorithm::kTeam;
  const bool pf = c.algorithm == Algorithm::kParticleFilter;
  m.record = TraceRecord{};
  m.record.t = t;
  auto event = [&](int robot, EventKind kind) { m.record.events.push_back({robot, kind}); };

  std::vector<Point2> nodes;
  for (const auto& r : robots_) nodes.push_back(r.true_pose.position());
  nodes.push_back(scenario_.sink);
  const LinkGraph links = build_links(c.comms, env_, nodes);

  for (auto& msg : m.queue.release(t)) {
    if (msg.kind == MessageKind::kCoords) {
      auto& slot = robots_[static_cast<std::size_t>(msg.dst)].neighbors[msg.src];
      const auto& est = std::get<PositionEstimate>(msg.payload);
      if (est.timestamp >= slot.estimate.timestamp) slot = {est, t};
    } else {
      auto& slot = m.sink_maps[static_cast<std::size_t>(msg.src)];
      if (!slot || msg.sent_at >= slot->first) {
        slot.emplace(msg.sent_at, std::move(std::get<OccupancyGrid>(msg.payload)));
        m.merged_dirty = true;
      }
    }
  }

  if (m.k % m.map_ticks == 0) {
    if (m.merged_dirty) {
      OccupancyGrid merged(c.mapping.resolution, c.mapping.occupancy_threshold);
      for (const auto& slot : m.sink_maps) {
        if (slot) merge_into(merged, slot->second);
      }
      m.merged = std::move(merged);
      m.merged_dirty = false;
    }
    m.map_errors.push_back({t, pixel_error(m.merged, env_.truth_raster())});
  }

  const std::int64_t window_start = (m.k / m.window_ticks) * m.window_ticks;
  const bool batch_tick = (m.k - window_start) % m.batch_ticks == m.batch_ticks - 1;

  for (auto& r : robots_) {
    auto& streams = m.rng[static_cast<std::size_t>(r.id)];

    if (m.k % m.odom_ticks == 0) {
      const OdometryDelta reported = odometry_step(c.odometry, r.true_pending, streams.odometry);
      r.true_pending = {};
      if (pf) {
        r.filter->add_odometry(reported);
      } else {
        r.odometer = accumulate(r.odometer, reported);
        r.estimate = update_estimate(r.estimate, r.odometer, {}, t);
        r.odometer = {};
      }
    }

    if (team && batch_tick && may_range(m.schedule, r.id, t)) {
      std::vector<AnchorFix> fixes;
      for (const auto& other : robots_) {
        if (other.id == r.id) continue;
        const auto d = uwb_range(c.uwb, env_, r.true_pose.position(),
                                 other.true_pose.position(), streams.uwb);
        if (!d) {
          event(r.id, EventKind::kNoLos);
          continue;
        }
        const auto it = r.neighbors.find(other.id);
        if (it == r.neighbors.end()) continue;
        fixes.push_back({other.id, it->second.estimate.pose.position(),
                         std::max(0.0, r.calibration.correct(*d)), t - it->second.received_at});
      }
      const auto start = Clock::now();
      const auto update =
          update_estimate_detailed(r.estimate, r.odometer, fixes, t,
                                   {m.schedule.cycle(), kMaxRangeResidual});
      timing_["trilateration"].add(seconds_since(start));
      r.estimate = update.estimate;
      r.odometer = {};
      if (update.degenerate) event(r.id, EventKind::kDegenerateGeometry);
      if (update.estimate.source == EstimateSource::kTrilaterated) ++m.trilaterations;
    }

    if (m.k % m.lidar_ticks == 0) {
      Scan scan = lidar_scan(c.lidar, env_, r.true_pose, t, streams.lidar);
      if (c.drive.reactive) {
        r.steer_heading = choose_heading(c.drive, r.true_pose, r.target_direction, &scan);
      }
      if (pf) {
        const auto outcome = r.filter->process_scan(scan, t);
        if (outcome.processed) timing_["pf_predict_update"].add(outcome.predict_update_seconds);
        if (outcome.reset) event(r.id, EventKind::kFilterReset);
      } else if (sync_gate(scan.timestamp, r.estimate.timestamp, c.mapping.sync_timeout)) {
        const auto start = Clock::now();
        integrate_scan(r.grid, scan, r.estimate.pose);
        timing_["integrate_scan"].add(seconds_since(start));
      } else {
        event(r.id, EventKind::kGateSkip);
      }
      r.last_scan = std::move(scan);
    }

    auto send = [&](int dst, MessageKind kind, std::variant<PositionEstimate, OccupancyGrid> payload) {
      Message msg{r.id, dst, kind, std::move(payload), t};
      if (const auto at = deliver(c.comms, links, msg, streams.comms)) {
        m.queue.push(*at, std::move(msg));
      } else {
        event(r.id, EventKind::kDropped);
      }
    };
    if (team && m.k % m.coords_ticks == 0) {
      for (int dst = 0; dst < n; ++dst) {
        if (dst != r.id) send(dst, MessageKind::kCoords, r.estimate);
      }
    }
    if (m.k % m.map_ticks == 0) send(sink, MessageKind::kMap, pf ? r.filter->map() : r.grid);
  }

  for (const auto& r : robots_) {
    RobotTrace rt;
    rt.true_pose = r.true_pose;
    if (pf) {
      rt.estimate = r.filter->pose();
    } else {
      rt.estimate = r.estimate.pose;
      rt.source = r.estimate.source;
    }
    rt.error = distance(rt.true_pose.position(), rt.estimate.position());
    m.record.robots.push_back(rt);
  }

  // Motion over [t, t + tick).
  for (auto& r : robots_) {
    const bool allowed = may_drive(m.schedule, r.id, t);
    const Scan* scan = r.last_scan && c.drive.reactive ? &*r.last_scan : nullptr;
    const OdometryDelta cmd = drive_step(c.drive, r.true_pose, r.steer_heading, scan, allowed, c.tick);
    double travel = cmd.dx;
    if (travel > 0.0) {
      const Point2 p = r.true_pose.position();
      const Point2 u = unit_vector(r.true_pose.theta);
      if (const auto hit = first_wall_hit(env_, p, p + (travel + c.drive.standoff) * u)) {
        travel = std::min(travel, std::max(0.0, *hit - c.drive.standoff));
      }
    }
    const OdometryDelta actual{travel, 0.0, cmd.dtheta, t + c.tick};
    if (!actual.is_zero()) {
      r.true_pose = compose(r.true_pose, actual);
      r.true_pending = accumulate(r.true_pending, actual);
    }
  }

  ++m.k;
  timing_["step"].add(seconds_since(step_start));
  m.trace.push_back(m.record);
  return m.trace.back();
}

RunResult Simulation::run() {
  initialize();
  while (!done()) step();
  auto& m = *impl_;
  RunResult out;
  out.map_errors = m.map_errors;
  out.merged_map = m.merged;
  const bool pf = scenario_.config.algorithm == Algorithm::kParticleFilter;
  for (const auto& r : robots_) out.robot_maps.push_back(pf ? r.filter->map() : r.grid);
  out.timing = timing_;

  RunMetrics& mt = out.metrics;
  mt.final_map_error = pixel_error(m.merged, env_.truth_raster());
  mt.per_robot_max_error.assign(robots_.size(), 0.0);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& rec : m.trace) {
    for (std::size_t i = 0; i < rec.robots.size(); ++i) {
      const double e = rec.robots[i].error;
      mt.per_robot_max_error[i] = std::max(mt.per_robot_max_error[i], e);
      mt.max_localization_error = std::max(mt.max_localization_error, e);
      sum += e;
      ++count;
    }
    for (const auto& ev : rec.events) ++mt.event_counts[to_string(ev.kind)];
  }
  mt.mean_localization_error = count ? sum / static_cast<double>(count) : 0.0;
  mt.trilaterations = m.trilaterations;
  out.trace = std::move(m.trace);
  m.trace.clear();
  return out;
}

RunResult run_simulation(const Scenario& scenario) {
  Simulation sim(scenario);
  return sim.run();
}

}  // namespace team
