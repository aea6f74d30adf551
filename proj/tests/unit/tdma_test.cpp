#include "doctest.h"

#include <random>

#include "team/error.hpp"
#include "team/tdma.hpp"

using namespace team;

TEST_SUITE("tdma") {

TEST_CASE("active robot") {
  const TdmaSchedule s{4, 5.0, 0.3, TdmaMode::kFaithful};
  CHECK(s.cycle() == 20.0);
  CHECK(active_robot(s, 6.2) == 1);
  CHECK(active_robot(s, 0.0) == 0);
  CHECK(active_robot(s, 20.0) == 0);
  CHECK(active_robot(s, 19.999) == 3);
  CHECK(window_start(s, 6.2) == doctest::Approx(5.0));
  CHECK_THROWS_AS((void)active_robot(s, -1.0), Error);
}

TEST_CASE("drive and range permissions") {
  const TdmaSchedule s{4, 5.0, 0.3, TdmaMode::kFaithful};
  CHECK(may_drive(s, 1, 6.2));
  CHECK_FALSE(may_drive(s, 1, 9.8));
  CHECK_FALSE(may_drive(s, 2, 6.2));
  CHECK(may_range(s, 1, 9.8));
  CHECK(may_range(s, 0, 2.0));
  CHECK_FALSE(may_range(s, 3, 2.0));
}

TEST_CASE("simultaneous mode lifts exclusivity") {
  const TdmaSchedule s{4, 5.0, 0.3, TdmaMode::kSimultaneous};
  for (int r = 0; r < 4; ++r) {
    CHECK(may_range(s, r, 9.8));
    CHECK(may_drive(s, r, 9.8));
  }
}

TEST_CASE("schedule validation") {
  CHECK_NOTHROW(TdmaSchedule{}.validate());
  CHECK_THROWS_AS((TdmaSchedule{4, 5.0, 5.0}).validate(), Error);
  CHECK_THROWS_AS((TdmaSchedule{4, 5.0, -0.1}).validate(), Error);
  CHECK_THROWS_AS((TdmaSchedule{0, 5.0, 0.3}).validate(), Error);
}

TEST_CASE("exclusivity, containment and periodicity over random schedules") {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int> robots(1, 12);
  std::uniform_real_distribution<double> window(0.2, 10.0), frac(0.0, 0.99), time(0.0, 1000.0);
  for (int trial = 0; trial < 300; ++trial) {
    TdmaSchedule s;
    s.n_robots = robots(gen);
    s.window = window(gen);
    s.buffer = frac(gen) * s.window;
    s.validate();
    for (int k = 0; k < 50; ++k) {
      const double t = time(gen);
      int ranging = 0;
      for (int r = 0; r < s.n_robots; ++r) {
        const bool range = may_range(s, r, t);
        const bool drive = may_drive(s, r, t);
        ranging += range;
        CHECK((!drive || range));
        const double later = t + 3 * s.cycle();
        // Periodicity up to rounding of t + cycle near a window edge.
        const double in_window = t - window_start(s, t);
        if (in_window > 1e-6 && s.window - in_window > 1e-6 &&
            std::abs(in_window - (s.window - s.buffer)) > 1e-6) {
          CHECK(may_range(s, r, later) == range);
          CHECK(may_drive(s, r, later) == drive);
        }
      }
      CHECK(ranging == 1);
      // The buffer is the final `buffer` seconds of the active robot's window.
      const int active = active_robot(s, t);
      const double into = t - window_start(s, t);
      if (std::abs(into - (s.window - s.buffer)) > 1e-6) {
        CHECK(may_drive(s, active, t) == (into < s.window - s.buffer));
      }
    }
  }
}

}  // TEST_SUITE
