#pragma once

#include <cstdint>
#include <random>

namespace team {

/// Which sensor or subsystem a random substream feeds.
enum class StreamKind : std::uint64_t {
  kUwb = 1,
  kLidar = 2,
  kOdometry = 3,
  kComms = 4,
  kParticles = 5,
  kInit = 6,
};

/// Seeded pseudo-random stream. Each robot/sensor pair gets its own stream so that
/// adding a robot or a sensor never shifts another stream's sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t derive_seed(std::uint64_t root, std::uint64_t owner, StreamKind kind);
  static RandomStream for_owner(std::uint64_t root, std::uint64_t owner, StreamKind kind) {
    return RandomStream(derive_seed(root, owner, kind));
  }

  double normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return mean + stddev * standard_normal_(engine_);
  }
  /// Uniform in [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> standard_normal_{0.0, 1.0};
};

}  // namespace team
