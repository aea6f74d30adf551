#pragma once

namespace team {

enum class TdmaMode { kFaithful, kSimultaneous };

/// Cyclic per-robot windows in robot-id order starting at t = 0.
struct TdmaSchedule {
  int n_robots = 1;
  double window = 5.0;
  double buffer = 0.3;
  TdmaMode mode = TdmaMode::kFaithful;

  double cycle() const { return n_robots * window; }
  void validate() const;
};

int active_robot(const TdmaSchedule& s, double t);

/// True while the robot's window is open and the end-of-window buffer has not started.
/// In simultaneous mode every robot may always drive.
bool may_drive(const TdmaSchedule& s, int robot, double t);

/// True while the robot's window is open (buffer included).
bool may_range(const TdmaSchedule& s, int robot, double t);

/// Start time of the window containing t.
double window_start(const TdmaSchedule& s, double t);

}  // namespace team
