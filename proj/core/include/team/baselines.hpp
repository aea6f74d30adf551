#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "team/geometry.hpp"
#include "team/occupancy_grid.hpp"
#include "team/random.hpp"
#include "team/sensors.hpp"
#include "team/trilateration.hpp"

namespace team {

/// Odometry-only dead reckoning: the localization update with no fixes at all.
inline PositionEstimate odom_only_update(const PositionEstimate& prev, const OdometryDelta& odom,
                                         double clock) {
  return update_estimate(prev, odom, {}, clock);
}

/// Simplified Rao-Blackwellized particle filter: raw motion-model proposal, per-particle
/// counter grids and a likelihood-field observation model.
struct PfConfig {
  int n_particles = 50;
  /// Multiplies every motion-noise standard deviation; 0 disables diffusion.
  double motion_noise_scale = 1.0;
  /// Resample when the effective sample size drops below this fraction of P.
  double resample_threshold = 0.5;
  int beam_subsample = 36;
  double likelihood_sigma = 0.2;
  double likelihood_max_distance = 1.0;
  double unknown_floor = 0.1;
  /// Scans are processed only after this much motion since the last processed scan.
  double min_translation = 0.1;
  double min_rotation = 0.1;
  /// Age after which a particle's distance field is rebuilt from its grid.
  double field_refresh_period = 1.0;

  void validate() const;
};

/// Distance from each cell to the nearest occupied cell (capped), over a window of
/// a particle's grid, frozen at build time.
struct LikelihoodField {
  CellBox box;
  Point2 center;
  double built_at = 0.0;
  std::vector<float> distance;
  std::vector<CellState> state;
};

struct Particle {
  Pose2 pose;
  double weight = 1.0;
  OccupancyGrid grid;
  std::shared_ptr<const LikelihoodField> field;
};

std::vector<Particle> make_particles(const PfConfig& config, const Pose2& pose,
                                     const OccupancyGrid& grid);

void pf_predict(std::vector<Particle>& particles, const OdometryDelta& odom,
                const PfConfig& config, RandomStream& rng);

/// Reweights by the scan likelihood. Returns false when every likelihood vanished
/// and the weights were reset to uniform.
bool pf_update(std::vector<Particle>& particles, const Scan& scan, const PfConfig& config,
               double t);

double effective_sample_size(const std::vector<Particle>& particles);

/// Systematic resampling when ESS < threshold * P. Returns true if it resampled.
bool pf_resample(std::vector<Particle>& particles, double threshold, RandomStream& rng);

struct PfEstimate {
  Pose2 pose;
  /// Index of the heaviest particle (lowest index on ties); its grid is the map.
  std::size_t best = 0;
};

/// Weighted mean position, weighted circular-mean heading, grid of the heaviest particle.
PfEstimate pf_estimate(const std::vector<Particle>& particles);

/// Score of one scan against a field, as a log-likelihood.
double scan_log_likelihood(const LikelihoodField& field, double resolution, const Pose2& pose,
                           const Scan& scan, const PfConfig& config);

LikelihoodField build_likelihood_field(const OccupancyGrid& grid, Point2 center,
                                       double half_size, double max_distance, double t);

/// Per-robot filter state as driven by the engine.
class ParticleFilter {
 public:
  ParticleFilter(PfConfig config, const Pose2& initial, double resolution,
                 double occupancy_threshold, RandomStream rng);

  /// Accumulates odometry between processed scans.
  void add_odometry(const OdometryDelta& d);

  struct ScanOutcome {
    bool processed = false;
    bool reset = false;
    bool resampled = false;
    /// Wall time spent in predict + update for this scan.
    double predict_update_seconds = 0.0;
  };
  ScanOutcome process_scan(const Scan& scan, double t);

  /// Current pose: filter estimate composed with odometry not yet absorbed.
  Pose2 pose() const;
  const OccupancyGrid& map() const;
  const std::vector<Particle>& particles() const { return particles_; }

 private:
  PfConfig config_;
  RandomStream rng_;
  std::vector<Particle> particles_;
  OdometryDelta pending_;
  bool seen_scan_ = false;
  PfEstimate estimate_;
};

}  // namespace team
