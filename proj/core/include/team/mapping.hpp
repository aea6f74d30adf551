#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "team/occupancy_grid.hpp"
#include "team/sensors.hpp"
#include "team/trilateration.hpp"

namespace team {

inline constexpr double kDefaultSyncTimeout = 0.1;

struct PoseTaggedScan {
  Scan scan;
  PositionEstimate pose;
};

/// True iff the scan and the pose are at most `sync_timeout` apart (closed boundary).
bool sync_gate(double scan_t, double pose_t, double sync_timeout = kDefaultSyncTimeout);

/// Adds one scan taken from `pose`: every traversed cell but the last gains a pass,
/// the endpoint cell gains a hit. Beams without a return add passes out to max_range.
void integrate_scan(OccupancyGrid& grid, const Scan& scan, const Pose2& pose);

inline OccupancyGrid integrate_scan(OccupancyGrid grid, const PoseTaggedScan& tagged) {
  integrate_scan(grid, tagged.scan, tagged.pose.pose);
  return grid;
}

/// Adds src's counters into dst. Throws kDomain when resolutions differ.
void merge_into(OccupancyGrid& dst, const OccupancyGrid& src);

OccupancyGrid merge(std::span<const OccupancyGrid> maps);

struct PixelError {
  std::size_t count = 0;
  std::size_t known = 0;
  /// count / known; nullopt when the candidate knows no cell (no coverage).
  std::optional<double> rate;
};

/// Cells known in the candidate whose tri-state disagrees with the truth raster.
PixelError pixel_error(const OccupancyGrid& candidate, const OccupancyGrid& truth);

/// Binary PGM (P5): 0 occupied, 205 unknown, 254 free, top row = largest y.
/// Comment lines carry the resolution and lattice origin so the file re-imports exactly
/// at tri-state level.
std::string to_pgm(const OccupancyGrid& grid);
OccupancyGrid from_pgm(const std::string& bytes);

void write_pgm(const OccupancyGrid& grid, const std::filesystem::path& path);
OccupancyGrid read_pgm(const std::filesystem::path& path);

}  // namespace team
