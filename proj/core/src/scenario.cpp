#include "team/scenario.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "json.hpp"

#include "team/error.hpp"

namespace team {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

// Reads the keys of one JSON object, remembering which were consumed so that any
// leftover key can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(label() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      config_error(name(key) + " has the wrong type");
    }
  }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) config_error("unknown key " + name(item.key()));
    }
  }

 private:
  std::string label() const { return path_.empty() ? "scenario" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
void with_section(Section& parent, const char* key, F&& f) {
  if (const json* j = parent.find(key)) {
    Section s(*j, parent.name(key));
    f(s);
    s.finish();
  }
}

void check(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) config_error(key + " " + rule);
}

// Re-raises component validation failures as configuration errors.
template <typename F>
void as_config(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, e.what());
  }
}

const std::map<std::string, std::map<std::string, double>>& builtin_defaults() {
  static const std::map<std::string, std::map<std::string, double>> defaults{
      {"corridor", {{"length", 40.0}, {"width", 4.0}}},
      {"y_maze", {{"trunk_length", 14.0}, {"arm_length", 12.0}, {"width", 4.0}}},
      {"branched_tunnel",
       {{"trunk_length", 22.0}, {"main_length", 24.0}, {"branch_length", 16.0}, {"width", 5.0}}},
  };
  return defaults;
}

Layout make_layout(const std::string& name, std::map<std::string, double>& params) {
  const auto& all = builtin_defaults();
  const auto it = all.find(name);
  if (it == all.end()) config_error("environment.builtin: unknown layout '" + name + "'");
  for (const auto& [key, value] : params) {
    if (!it->second.count(key)) config_error("unknown key environment.params." + key);
    check(value > 0.0, "environment.params." + key, "must be > 0");
  }
  for (const auto& [key, value] : it->second) params.emplace(key, value);
  auto p = [&](const char* key) { return params.at(key); };
  if (name == "corridor") return corridor_layout(p("length"), p("width"));
  if (name == "y_maze") return y_maze_layout(p("trunk_length"), p("arm_length"), p("width"));
  return branched_tunnel_layout(p("trunk_length"), p("main_length"), p("branch_length"),
                                p("width"));
}

Algorithm algorithm_from(const std::string& s, const std::string& key) {
  if (s == "TEAM") return Algorithm::kTeam;
  if (s == "ODOM_ONLY") return Algorithm::kOdomOnly;
  if (s == "PF_BASELINE") return Algorithm::kParticleFilter;
  config_error(key + ": unknown algorithm '" + s + "'");
}

std::string to_string(TdmaMode m) { return m == TdmaMode::kFaithful ? "faithful" : "simultaneous"; }
std::string to_string(InitMode m) { return m == InitMode::kKnown ? "known" : "bootstrap"; }

void read_config(Section& root, SimConfig& c) {
  with_section(root, "config", [&](Section& s) {
    s.get("tick", c.tick);
    s.get("duration", c.duration);
    s.get("seed", c.seed);
    std::string algorithm = to_string(c.algorithm);
    s.get("algorithm", algorithm);
    c.algorithm = algorithm_from(algorithm, s.name("algorithm"));
    with_section(s, "uwb", [&](Section& u) {
      u.get("sigma", c.uwb.sigma);
      u.get("mu", c.uwb.mu);
      u.get("n_average", c.uwb.n_average);
      u.get("max_range", c.uwb.max_range);
      u.get("rate", c.uwb_rate);
    });
    with_section(s, "lidar", [&](Section& l) {
      l.get("n_beams", c.lidar.n_beams);
      l.get("rate", c.lidar.rate);
      l.get("sigma", c.lidar.sigma);
      l.get("max_range", c.lidar.max_range);
      if (c.lidar.n_beams > 0) c.lidar.angular_resolution = 2.0 * std::numbers::pi / c.lidar.n_beams;
    });
    with_section(s, "odometry", [&](Section& o) {
      o.get("variance", c.odometry.variance);
      o.get("rate", c.odometry_rate);
    });
    with_section(s, "tdma", [&](Section& t) {
      t.get("window", c.tdma.window);
      t.get("buffer", c.tdma.buffer);
      std::string mode = to_string(c.tdma.mode);
      t.get("mode", mode);
      if (mode == "faithful") {
        c.tdma.mode = TdmaMode::kFaithful;
      } else if (mode == "simultaneous") {
        c.tdma.mode = TdmaMode::kSimultaneous;
      } else {
        config_error(t.name("mode") + ": expected 'faithful' or 'simultaneous'");
      }
    });
    with_section(s, "comms", [&](Section& m) {
      m.get("comm_range", c.comms.comm_range);
      m.get("per_hop_latency", c.comms.per_hop_latency);
      m.get("drop_prob", c.comms.drop_prob);
    });
    with_section(s, "mapping", [&](Section& m) {
      m.get("resolution", c.mapping.resolution);
      m.get("occupancy_threshold", c.mapping.occupancy_threshold);
      m.get("sync_timeout", c.mapping.sync_timeout);
      m.get("map_publish_rate", c.mapping.map_publish_rate);
      m.get("coords_publish_rate", c.mapping.coords_publish_rate);
    });
    with_section(s, "pf", [&](Section& p) {
      p.get("n_particles", c.pf.n_particles);
      p.get("motion_noise_scale", c.pf.motion_noise_scale);
      p.get("resample_threshold", c.pf.resample_threshold);
      p.get("beam_subsample", c.pf.beam_subsample);
      p.get("likelihood_sigma", c.pf.likelihood_sigma);
      p.get("likelihood_max_distance", c.pf.likelihood_max_distance);
      p.get("unknown_floor", c.pf.unknown_floor);
      p.get("min_translation", c.pf.min_translation);
      p.get("min_rotation", c.pf.min_rotation);
      p.get("field_refresh_period", c.pf.field_refresh_period);
    });
    with_section(s, "drive", [&](Section& d) {
      d.get("max_speed", c.drive.max_speed);
      d.get("max_turn_rate", c.drive.max_turn_rate);
      d.get("cone_half_angle", c.drive.cone_half_angle);
      d.get("clearance", c.drive.clearance);
      d.get("standoff", c.drive.standoff);
      d.get("corridor_half_width", c.drive.corridor_half_width);
      d.get("lookahead", c.drive.lookahead);
      d.get("reactive", c.drive.reactive);
    });
    with_section(s, "init", [&](Section& i) {
      std::string mode = to_string(c.init.mode);
      i.get("mode", mode);
      if (mode == "known") {
        c.init.mode = InitMode::kKnown;
      } else if (mode == "bootstrap") {
        c.init.mode = InitMode::kBootstrap;
      } else {
        config_error(i.name("mode") + ": expected 'known' or 'bootstrap'");
      }
      i.get("calibration_batches", c.init.calibration_batches);
      i.get("heading_probe_distance", c.init.heading_probe_distance);
    });
  });
}

Point2 read_point(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    config_error(key + " must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kTeam: return "TEAM";
    case Algorithm::kOdomOnly: return "ODOM_ONLY";
    case Algorithm::kParticleFilter: return "PF_BASELINE";
  }
  return "TEAM";
}

Algorithm parse_algorithm(const std::string& name) { return algorithm_from(name, "algorithm"); }

std::int64_t ticks_per_period(double period, double tick, const std::string& key) {
  const double q = period / tick;
  const auto r = std::llround(q);
  if (!std::isfinite(q) || r < 1 || std::abs(q - static_cast<double>(r)) > 1e-6 * std::max(1.0, q)) {
    config_error(key + ": period is not a whole number of ticks");
  }
  return r;
}

void DriveConfig::validate() const {
  check(max_speed >= 0.0, "drive.max_speed", "must be >= 0");
  check(max_turn_rate >= 0.0, "drive.max_turn_rate", "must be >= 0");
  check(cone_half_angle > 0.0 && cone_half_angle < std::numbers::pi / 2.0, "drive.cone_half_angle",
        "must lie in (0, pi/2)");
  check(clearance >= 0.0, "drive.clearance", "must be >= 0");
  check(standoff >= 0.0, "drive.standoff", "must be >= 0");
  check(corridor_half_width >= 0.0, "drive.corridor_half_width", "must be >= 0");
  check(lookahead >= 0.0, "drive.lookahead", "must be >= 0");
}

void MappingConfig::validate() const {
  check(resolution > 0.0, "mapping.resolution", "must be > 0");
  check(occupancy_threshold > 0.0 && occupancy_threshold <= 1.0, "mapping.occupancy_threshold",
        "must lie in (0, 1]");
  check(sync_timeout >= 0.0, "mapping.sync_timeout", "must be >= 0");
  check(map_publish_rate > 0.0, "mapping.map_publish_rate", "must be > 0");
  check(coords_publish_rate > 0.0, "mapping.coords_publish_rate", "must be > 0");
}

void InitConfig::validate() const {
  check(calibration_batches >= 0, "init.calibration_batches", "must be >= 0");
  check(heading_probe_distance > 0.0, "init.heading_probe_distance", "must be > 0");
}

void SimConfig::validate(int n_robots) const {
  check(tick > 0.0 && std::isfinite(tick), "config.tick", "must be > 0");
  check(duration >= 0.0 && std::isfinite(duration), "config.duration", "must be >= 0");
  check(uwb_rate > 0.0, "uwb.rate", "must be > 0");
  check(odometry_rate > 0.0, "odometry.rate", "must be > 0");
  as_config([&] {
    uwb.validate();
    lidar.validate();
    odometry.validate();
    TdmaSchedule s = tdma;
    s.n_robots = n_robots;
    s.validate();
    comms.validate();
    pf.validate();
  });
  mapping.validate();
  drive.validate();
  init.validate();
  ticks_per_period(1.0 / odometry_rate, tick, "odometry.rate");
  ticks_per_period(1.0 / lidar.rate, tick, "lidar.rate");
  ticks_per_period(uwb.n_average / uwb_rate, tick, "uwb.rate");
  ticks_per_period(tdma.window, tick, "tdma.window");
  ticks_per_period(1.0 / mapping.coords_publish_rate, tick, "mapping.coords_publish_rate");
  ticks_per_period(1.0 / mapping.map_publish_rate, tick, "mapping.map_publish_rate");
  if (algorithm == Algorithm::kTeam && n_robots < 4) {
    config_error("robots: TEAM needs at least 4 robots for continuous trilateration");
  }
  if (init.mode == InitMode::kBootstrap && n_robots < 4) {
    config_error("robots: bootstrap initialization needs at least 4 robots");
  }
}

void Scenario::validate() const {
  check(!robots.empty(), "robots", "must list at least one robot");
  check(bounds.max_x > bounds.min_x && bounds.max_y > bounds.min_y, "environment.bounds",
        "must be a non-empty rectangle");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    check(bounds.contains(robots[i].pose.position()), "robots[" + std::to_string(i) + "]",
          "must start inside the environment bounds");
  }
  check(bounds.contains(sink), "sink", "must lie inside the environment bounds");
  config.validate(static_cast<int>(robots.size()));
}

Scenario builtin_scenario(const std::string& layout, const std::map<std::string, double>& params) {
  Scenario s;
  s.name = layout;
  s.builtin = layout;
  s.builtin_params = params;
  Layout l = make_layout(layout, s.builtin_params);
  s.segments = std::move(l.segments);
  s.bounds = l.bounds;
  s.robots = std::move(l.robots);
  s.sink = l.sink;
  return s;
}

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed scenario JSON: ") + e.what());
  }
  Section root(doc, "");
  Scenario s;
  root.get("name", s.name);

  const json* env = root.find("environment");
  if (!env) config_error("environment is required");
  Section es(*env, "environment");
  std::string builtin;
  es.get("builtin", builtin);
  if (!builtin.empty()) {
    std::map<std::string, double> params;
    es.get("params", params);
    s = builtin_scenario(builtin, params);
    root.get("name", s.name);
  } else {
    std::vector<double> b;
    es.get("bounds", b);
    check(b.size() == 4, "environment.bounds", "must be [min_x, min_y, max_x, max_y]");
    s.bounds = {b[0], b[1], b[2], b[3]};
    std::vector<std::vector<double>> segs;
    es.get("segments", segs);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      check(segs[i].size() == 4, "environment.segments[" + std::to_string(i) + "]",
            "must be [x1, y1, x2, y2]");
      s.segments.push_back({{segs[i][0], segs[i][1]}, {segs[i][2], segs[i][3]}});
    }
  }
  es.finish();

  if (const json* robots = root.find("robots")) {
    if (!robots->is_array()) config_error("robots must be a list");
    s.robots.clear();
    for (std::size_t i = 0; i < robots->size(); ++i) {
      Section r((*robots)[i], "robots[" + std::to_string(i) + "]");
      RobotStart start;
      r.get("x", start.pose.x);
      r.get("y", start.pose.y);
      r.get("theta", start.pose.theta);
      r.get("target_direction", start.target_direction);
      r.finish();
      s.robots.push_back(start);
    }
  }
  if (const json* sink = root.find("sink")) s.sink = read_point(*sink, "sink");
  read_config(root, s.config);
  root.finish();
  if (s.name.empty()) s.name = s.builtin.empty() ? "custom" : s.builtin;
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read scenario " + path.string());
  return parse_scenario(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  if (!s.builtin.empty()) {
    doc["environment"] = {{"builtin", s.builtin}, {"params", s.builtin_params}};
  } else {
    json segs = json::array();
    for (const auto& g : s.segments) segs.push_back({g.a.x, g.a.y, g.b.x, g.b.y});
    doc["environment"] = {{"bounds", {s.bounds.min_x, s.bounds.min_y, s.bounds.max_x, s.bounds.max_y}},
                          {"segments", segs}};
  }
  json robots = json::array();
  for (const auto& r : s.robots) {
    robots.push_back({{"x", r.pose.x}, {"y", r.pose.y}, {"theta", r.pose.theta},
                      {"target_direction", r.target_direction}});
  }
  doc["robots"] = robots;
  doc["sink"] = {s.sink.x, s.sink.y};
  const SimConfig& c = s.config;
  doc["config"] = {
      {"tick", c.tick},
      {"duration", c.duration},
      {"seed", c.seed},
      {"algorithm", to_string(c.algorithm)},
      {"uwb",
       {{"sigma", c.uwb.sigma},
        {"mu", c.uwb.mu},
        {"n_average", c.uwb.n_average},
        {"max_range", c.uwb.max_range},
        {"rate", c.uwb_rate}}},
      {"lidar",
       {{"n_beams", c.lidar.n_beams},
        {"rate", c.lidar.rate},
        {"sigma", c.lidar.sigma},
        {"max_range", c.lidar.max_range}}},
      {"odometry", {{"variance", c.odometry.variance}, {"rate", c.odometry_rate}}},
      {"tdma", {{"window", c.tdma.window}, {"buffer", c.tdma.buffer}, {"mode", to_string(c.tdma.mode)}}},
      {"comms",
       {{"comm_range", c.comms.comm_range},
        {"per_hop_latency", c.comms.per_hop_latency},
        {"drop_prob", c.comms.drop_prob}}},
      {"mapping",
       {{"resolution", c.mapping.resolution},
        {"occupancy_threshold", c.mapping.occupancy_threshold},
        {"sync_timeout", c.mapping.sync_timeout},
        {"map_publish_rate", c.mapping.map_publish_rate},
        {"coords_publish_rate", c.mapping.coords_publish_rate}}},
      {"pf",
       {{"n_particles", c.pf.n_particles},
        {"motion_noise_scale", c.pf.motion_noise_scale},
        {"resample_threshold", c.pf.resample_threshold},
        {"beam_subsample", c.pf.beam_subsample},
        {"likelihood_sigma", c.pf.likelihood_sigma},
        {"likelihood_max_distance", c.pf.likelihood_max_distance},
        {"unknown_floor", c.pf.unknown_floor},
        {"min_translation", c.pf.min_translation},
        {"min_rotation", c.pf.min_rotation},
        {"field_refresh_period", c.pf.field_refresh_period}}},
      {"drive",
       {{"max_speed", c.drive.max_speed},
        {"max_turn_rate", c.drive.max_turn_rate},
        {"cone_half_angle", c.drive.cone_half_angle},
        {"clearance", c.drive.clearance},
        {"standoff", c.drive.standoff},
        {"corridor_half_width", c.drive.corridor_half_width},
        {"lookahead", c.drive.lookahead},
        {"reactive", c.drive.reactive}}},
      {"init",
       {{"mode", to_string(c.init.mode)},
        {"calibration_batches", c.init.calibration_batches},
        {"heading_probe_distance", c.init.heading_probe_distance}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace team
