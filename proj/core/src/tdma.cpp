#include "team/tdma.hpp"

#include <cmath>

#include "team/error.hpp"

namespace team {
namespace {

// Slot counting absorbs floating-point drift so that t = k * window lands in slot k.
constexpr double kSlotEps = 1e-9;

long long slot_of(const TdmaSchedule& s, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::kDomain, "time must be non-negative");
  return static_cast<long long>(std::floor(t / s.window + kSlotEps));
}

}  // namespace

void TdmaSchedule::validate() const {
  if (n_robots < 1) throw Error(ErrorCode::kConfig, "tdma needs at least one robot");
  if (!(window > 0.0)) throw Error(ErrorCode::kConfig, "tdma.window must be > 0");
  if (!(buffer >= 0.0 && buffer < window)) {
    throw Error(ErrorCode::kConfig, "tdma.buffer must satisfy 0 <= buffer < window");
  }
}

int active_robot(const TdmaSchedule& s, double t) {
  return static_cast<int>(slot_of(s, t) % s.n_robots);
}

double window_start(const TdmaSchedule& s, double t) {
  return static_cast<double>(slot_of(s, t)) * s.window;
}

bool may_range(const TdmaSchedule& s, int robot, double t) {
  if (s.mode == TdmaMode::kSimultaneous) {
    slot_of(s, t);
    return true;
  }
  return active_robot(s, t) == robot;
}

bool may_drive(const TdmaSchedule& s, int robot, double t) {
  if (s.mode == TdmaMode::kSimultaneous) {
    slot_of(s, t);
    return true;
  }
  if (active_robot(s, t) != robot) return false;
  const double into = t - window_start(s, t);
  return into < s.window - s.buffer - kSlotEps;
}

}  // namespace team
