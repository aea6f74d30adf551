#include "team/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "team/error.hpp"
#include "team/mapping.hpp"

namespace team {
namespace {

constexpr double kFar = 1e20;

// 1D squared distance transform of a sampled function (lower envelope of parabolas).
void distance_transform_1d(const std::vector<double>& f, std::vector<double>& d,
                           std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    for (;;) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + q * q) - (f[static_cast<std::size_t>(p)] + p * p)) /
          (2.0 * (q - p));
      if (s > z[static_cast<std::size_t>(k)]) break;
      --k;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

void normalize(std::vector<Particle>& particles) {
  double total = 0.0;
  for (const auto& p : particles) total += p.weight;
  for (auto& p : particles) p.weight /= total;
}

// Windows are rebuilt once a particle drifts this far from the window centre.
constexpr double kWindowMargin = 1.0;

}  // namespace

void PfConfig::validate() const {
  if (n_particles < 1) throw Error(ErrorCode::kConfig, "pf.n_particles must be >= 1");
  if (!(motion_noise_scale >= 0.0)) {
    throw Error(ErrorCode::kConfig, "pf.motion_noise_scale must be >= 0");
  }
  if (!(resample_threshold >= 0.0 && resample_threshold <= 1.0)) {
    throw Error(ErrorCode::kConfig, "pf.resample_threshold must lie in [0, 1]");
  }
  if (beam_subsample < 1) throw Error(ErrorCode::kConfig, "pf.beam_subsample must be >= 1");
  if (!(likelihood_sigma > 0.0)) throw Error(ErrorCode::kConfig, "pf.likelihood_sigma must be > 0");
  if (!(likelihood_max_distance > 0.0)) {
    throw Error(ErrorCode::kConfig, "pf.likelihood_max_distance must be > 0");
  }
  if (!(unknown_floor > 0.0 && unknown_floor <= 1.0)) {
    throw Error(ErrorCode::kConfig, "pf.unknown_floor must lie in (0, 1]");
  }
  if (!(min_translation >= 0.0 && min_rotation >= 0.0)) {
    throw Error(ErrorCode::kConfig, "pf update thresholds must be >= 0");
  }
  if (!(field_refresh_period > 0.0)) {
    throw Error(ErrorCode::kConfig, "pf.field_refresh_period must be > 0");
  }
}

std::vector<Particle> make_particles(const PfConfig& config, const Pose2& pose,
                                     const OccupancyGrid& grid) {
  const double w = 1.0 / config.n_particles;
  return std::vector<Particle>(static_cast<std::size_t>(config.n_particles),
                               Particle{pose, w, grid, nullptr});
}

void pf_predict(std::vector<Particle>& particles, const OdometryDelta& odom,
                const PfConfig& config, RandomStream& rng) {
  const double trans = std::hypot(odom.dx, odom.dy);
  const double rot = std::abs(odom.dtheta);
  const double s = config.motion_noise_scale;
  const double sd_xy = s * (0.1 * trans + 0.05 * rot);
  const double sd_theta = s * (0.1 * rot + 0.1 * trans);
  for (auto& p : particles) {
    const double fwd = odom.dx + rng.normal(0.0, sd_xy);
    const double lat = odom.dy + rng.normal(0.0, sd_xy);
    const double turn = odom.dtheta + rng.normal(0.0, sd_theta);
    p.pose = compose(p.pose, fwd, lat, turn);
  }
}

LikelihoodField build_likelihood_field(const OccupancyGrid& grid, Point2 center,
                                       double half_size, double max_distance, double t) {
  LikelihoodField field;
  field.center = center;
  field.built_at = t;
  const CellIndex lo = grid.cell_of(center - Point2{half_size, half_size});
  const CellIndex hi = grid.cell_of(center + Point2{half_size, half_size});
  field.box = {lo.x, lo.y, hi.x - lo.x + 1, hi.y - lo.y + 1};
  const auto w = static_cast<std::size_t>(field.box.width);
  const auto h = static_cast<std::size_t>(field.box.height);
  field.state.resize(w * h);
  std::vector<double> sq(w * h);
  for (std::size_t j = 0; j < h; ++j) {
    for (std::size_t i = 0; i < w; ++i) {
      const CellState st = grid.state(
          {lo.x + static_cast<std::int64_t>(i), lo.y + static_cast<std::int64_t>(j)});
      field.state[j * w + i] = st;
      sq[j * w + i] = st == CellState::kOccupied ? 0.0 : kFar;
    }
  }
  const std::size_t n = std::max(w, h);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (std::size_t j = 0; j < h; ++j) {
    f.resize(w);
    d.resize(w);
    for (std::size_t i = 0; i < w; ++i) f[i] = sq[j * w + i];
    distance_transform_1d(f, d, v, z);
    for (std::size_t i = 0; i < w; ++i) sq[j * w + i] = d[i];
  }
  for (std::size_t i = 0; i < w; ++i) {
    f.resize(h);
    d.resize(h);
    for (std::size_t j = 0; j < h; ++j) f[j] = sq[j * w + i];
    distance_transform_1d(f, d, v, z);
    for (std::size_t j = 0; j < h; ++j) sq[j * w + i] = d[j];
  }
  field.distance.resize(w * h);
  const double res = grid.resolution();
  for (std::size_t k = 0; k < w * h; ++k) {
    field.distance[k] = static_cast<float>(std::min(max_distance, std::sqrt(sq[k]) * res));
  }
  return field;
}

double scan_log_likelihood(const LikelihoodField& field, double resolution, const Pose2& pose,
                           const Scan& scan, const PfConfig& config) {
  const auto n = scan.ranges.size();
  const std::size_t stride =
      std::max<std::size_t>(1, n / static_cast<std::size_t>(config.beam_subsample));
  const double log_floor = std::log(config.unknown_floor);
  const double inv_two_var = 1.0 / (2.0 * config.likelihood_sigma * config.likelihood_sigma);
  double total = 0.0;
  for (std::size_t k = 0; k < n; k += stride) {
    const auto& r = scan.ranges[k];
    if (!r) continue;
    const double angle = pose.theta + static_cast<double>(k) * scan.angular_resolution;
    const Point2 end = pose.position() + *r * unit_vector(angle);
    const CellIndex c{static_cast<std::int64_t>(std::floor(end.x / resolution)),
                      static_cast<std::int64_t>(std::floor(end.y / resolution))};
    if (!field.box.contains(c)) {
      total += log_floor;
      continue;
    }
    const auto idx = static_cast<std::size_t>((c.y - field.box.y0) * field.box.width +
                                              (c.x - field.box.x0));
    if (field.state[idx] == CellState::kUnknown) {
      total += log_floor;
      continue;
    }
    const double d = field.distance[idx];
    total -= d * d * inv_two_var;
  }
  return total;
}

bool pf_update(std::vector<Particle>& particles, const Scan& scan, const PfConfig& config,
               double t) {
  if (particles.empty()) return true;
  const double half = scan.max_range + config.likelihood_max_distance + kWindowMargin;
  std::vector<double> log_w(particles.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < particles.size(); ++i) {
    auto& p = particles[i];
    if (!p.field || t - p.field->built_at >= config.field_refresh_period - 1e-9 ||
        distance(p.pose.position(), p.field->center) > kWindowMargin) {
      p.field = std::make_shared<const LikelihoodField>(build_likelihood_field(
          p.grid, p.pose.position(), half, config.likelihood_max_distance, t));
    }
    log_w[i] = std::log(p.weight) +
               scan_log_likelihood(*p.field, p.grid.resolution(), p.pose, scan, config);
    best = std::max(best, log_w[i]);
  }
  if (!std::isfinite(best)) {
    for (auto& p : particles) p.weight = 1.0 / static_cast<double>(particles.size());
    return false;
  }
  for (std::size_t i = 0; i < particles.size(); ++i) {
    particles[i].weight = std::exp(log_w[i] - best);
  }
  normalize(particles);
  return true;
}

double effective_sample_size(const std::vector<Particle>& particles) {
  double sum_sq = 0.0;
  for (const auto& p : particles) sum_sq += p.weight * p.weight;
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

bool pf_resample(std::vector<Particle>& particles, double threshold, RandomStream& rng) {
  const auto n = particles.size();
  if (n == 0 || effective_sample_size(particles) >= threshold * static_cast<double>(n)) {
    return false;
  }
  std::vector<Particle> out;
  out.reserve(n);
  const double step = 1.0 / static_cast<double>(n);
  const double u0 = rng.uniform() * step;
  double cumulative = particles[0].weight;
  std::size_t i = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const double u = u0 + static_cast<double>(m) * step;
    while (u > cumulative && i + 1 < n) cumulative += particles[++i].weight;
    out.push_back(particles[i]);
    out.back().weight = step;
  }
  particles = std::move(out);
  return true;
}

PfEstimate pf_estimate(const std::vector<Particle>& particles) {
  PfEstimate e;
  double x = 0.0, y = 0.0, s = 0.0, c = 0.0, total = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    const auto& p = particles[i];
    x += p.weight * p.pose.x;
    y += p.weight * p.pose.y;
    s += p.weight * std::sin(p.pose.theta);
    c += p.weight * std::cos(p.pose.theta);
    total += p.weight;
    if (p.weight > particles[e.best].weight) e.best = i;
  }
  if (total > 0.0) e.pose = {x / total, y / total, wrap_angle(std::atan2(s, c))};
  return e;
}

ParticleFilter::ParticleFilter(PfConfig config, const Pose2& initial, double resolution,
                               double occupancy_threshold, RandomStream rng)
    : config_(config),
      rng_(std::move(rng)),
      particles_(make_particles(config_, initial, OccupancyGrid(resolution, occupancy_threshold))) {
  estimate_ = pf_estimate(particles_);
}

void ParticleFilter::add_odometry(const OdometryDelta& d) { pending_ = accumulate(pending_, d); }

ParticleFilter::ScanOutcome ParticleFilter::process_scan(const Scan& scan, double t) {
  ScanOutcome out;
  const bool moved = std::hypot(pending_.dx, pending_.dy) >= config_.min_translation ||
                     std::abs(pending_.dtheta) >= config_.min_rotation;
  if (seen_scan_ && !moved) return out;
  out.processed = true;
  const auto start = std::chrono::steady_clock::now();
  if (!pending_.is_zero()) pf_predict(particles_, pending_, config_, rng_);
  if (seen_scan_) out.reset = !pf_update(particles_, scan, config_, t);
  out.predict_update_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (seen_scan_) {
    out.resampled = pf_resample(particles_, config_.resample_threshold, rng_);
  }
  for (auto& p : particles_) integrate_scan(p.grid, scan, p.pose);
  pending_ = OdometryDelta{};
  seen_scan_ = true;
  estimate_ = pf_estimate(particles_);
  return out;
}

Pose2 ParticleFilter::pose() const { return compose(estimate_.pose, pending_); }

const OccupancyGrid& ParticleFilter::map() const { return particles_[estimate_.best].grid; }

}  // namespace team
