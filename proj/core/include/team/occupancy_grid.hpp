#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "team/geometry.hpp"

namespace team {

enum class CellState : std::uint8_t { kUnknown, kFree, kOccupied };

struct CellCounts {
  std::uint32_t hits = 0;
  std::uint32_t passes = 0;

  friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

/// Index of a cell on the global lattice: cell (i, j) spans
/// [i*res, (i+1)*res) x [j*res, (j+1)*res) in world coordinates.
struct CellIndex {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Inclusive-exclusive rectangle of cells.
struct CellBox {
  std::int64_t x0 = 0;
  std::int64_t y0 = 0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(CellIndex c) const {
    return c.x >= x0 && c.x < x0 + width && c.y >= y0 && c.y < y0 + height;
  }
  friend bool operator==(const CellBox&, const CellBox&) = default;
};

inline constexpr double kDefaultResolution = 0.05;
inline constexpr double kDefaultOccupancyThreshold = 0.5;

/// Tri-state occupancy raster backed by hit/pass counters.
///
/// Storage is a set of fixed-size tiles shared copy-on-write between copies, so
/// copying a grid (map snapshots, particle resampling) costs one pointer per tile.
/// The grid grows on demand; there is no fixed extent.
class OccupancyGrid {
 public:
  static constexpr int kTileBits = 5;
  static constexpr int kTileSize = 1 << kTileBits;

  explicit OccupancyGrid(double resolution = kDefaultResolution,
                         double occupancy_threshold = kDefaultOccupancyThreshold);

  double resolution() const { return resolution_; }
  double occupancy_threshold() const { return occupancy_threshold_; }

  CellIndex cell_of(Point2 p) const;
  Point2 cell_center(CellIndex c) const;
  /// World coordinates of the lower-left corner of a cell.
  Point2 cell_corner(CellIndex c) const;

  CellCounts counts(CellIndex c) const;
  CellState state(CellIndex c) const { return classify(counts(c)); }
  CellState classify(CellCounts c) const;

  void add(CellIndex c, std::uint32_t hits, std::uint32_t passes);
  void set(CellIndex c, CellCounts value);

  /// Makes every cell in `box` addressable without further allocation.
  void reserve(const CellBox& box);

  /// Smallest box holding every known cell; nullopt when nothing is known.
  std::optional<CellBox> known_extent() const;
  std::size_t known_cells() const;
  bool empty() const { return known_cells() == 0; }

  /// Visits every known cell in deterministic order (tile rows, then cell rows).
  template <typename F>
  void for_each_known(F&& f) const {
    for (std::int64_t ty = 0; ty < tiles_h_; ++ty) {
      for (std::int64_t tx = 0; tx < tiles_w_; ++tx) {
        const auto& tile = tiles_[static_cast<std::size_t>(ty * tiles_w_ + tx)];
        if (!tile) continue;
        for (int j = 0; j < kTileSize; ++j) {
          for (int i = 0; i < kTileSize; ++i) {
            const CellCounts& c = (*tile)[static_cast<std::size_t>(j * kTileSize + i)];
            if (c.hits == 0 && c.passes == 0) continue;
            f(CellIndex{(tile_x0_ + tx) * kTileSize + i, (tile_y0_ + ty) * kTileSize + j}, c);
          }
        }
      }
    }
  }

  /// Counter equality over all cells, independent of allocated extent.
  bool same_counts(const OccupancyGrid& other) const;

  /// Number of tiles whose storage is shared with another grid (for tests).
  std::size_t shared_tiles() const;

 private:
  using Tile = std::array<CellCounts, kTileSize * kTileSize>;

  static std::int64_t tile_coord(std::int64_t cell) { return cell >> kTileBits; }
  static int in_tile(std::int64_t cell) { return static_cast<int>(cell & (kTileSize - 1)); }

  const Tile* find_tile(std::int64_t tx, std::int64_t ty) const;
  Tile& writable_tile(std::int64_t tx, std::int64_t ty);
  void grow_to(std::int64_t tx0, std::int64_t ty0, std::int64_t tx1, std::int64_t ty1);

  double resolution_;
  double occupancy_threshold_;
  std::int64_t tile_x0_ = 0;
  std::int64_t tile_y0_ = 0;
  std::int64_t tiles_w_ = 0;
  std::int64_t tiles_h_ = 0;
  std::vector<std::shared_ptr<Tile>> tiles_;
};

/// Visits the cells crossed by segment from->to in order, starting with the cell
/// containing `from`. A segment ending exactly on a cell boundary does not enter
/// the next cell; passing exactly through a corner steps diagonally.
template <typename Visit>
void traverse_cells(double resolution, Point2 from, Point2 to, Visit&& visit) {
  const double gx0 = from.x / resolution;
  const double gy0 = from.y / resolution;
  const double dx = to.x / resolution - gx0;
  const double dy = to.y / resolution - gy0;

  auto start_cell = [](double g, double d) {
    if (d < 0.0) return static_cast<std::int64_t>(std::ceil(g)) - 1;
    return static_cast<std::int64_t>(std::floor(g));
  };
  std::int64_t cx = start_cell(gx0, dx);
  std::int64_t cy = start_cell(gy0, dy);
  const std::int64_t sx = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const std::int64_t sy = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double t_max_x = kInf, t_max_y = kInf, t_delta_x = kInf, t_delta_y = kInf;
  if (sx != 0) {
    t_delta_x = 1.0 / std::abs(dx);
    t_max_x = (sx > 0 ? (static_cast<double>(cx) + 1.0 - gx0) : (gx0 - static_cast<double>(cx))) *
              t_delta_x;
  }
  if (sy != 0) {
    t_delta_y = 1.0 / std::abs(dy);
    t_max_y = (sy > 0 ? (static_cast<double>(cy) + 1.0 - gy0) : (gy0 - static_cast<double>(cy))) *
              t_delta_y;
  }

  constexpr double kEndSlack = 1e-9;
  constexpr double kCornerSlack = 1e-12;
  visit(CellIndex{cx, cy});
  for (;;) {
    const double t = std::min(t_max_x, t_max_y);
    if (t >= 1.0 - kEndSlack) break;
    if (std::abs(t_max_x - t_max_y) <= kCornerSlack) {
      cx += sx;
      cy += sy;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    } else if (t_max_x < t_max_y) {
      cx += sx;
      t_max_x += t_delta_x;
    } else {
      cy += sy;
      t_max_y += t_delta_y;
    }
    visit(CellIndex{cx, cy});
  }
}

}  // namespace team
