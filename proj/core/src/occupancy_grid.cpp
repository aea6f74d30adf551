#include "team/occupancy_grid.hpp"

#include <cmath>
#include <limits>

#include "team/error.hpp"

namespace team {

OccupancyGrid::OccupancyGrid(double resolution, double occupancy_threshold)
    : resolution_(resolution), occupancy_threshold_(occupancy_threshold) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::kDomain, "grid resolution must be positive");
  }
  if (!(occupancy_threshold > 0.0 && occupancy_threshold <= 1.0)) {
    throw Error(ErrorCode::kDomain, "occupancy threshold must lie in (0, 1]");
  }
}

CellIndex OccupancyGrid::cell_of(Point2 p) const {
  return {static_cast<std::int64_t>(std::floor(p.x / resolution_)),
          static_cast<std::int64_t>(std::floor(p.y / resolution_))};
}

Point2 OccupancyGrid::cell_center(CellIndex c) const {
  return {(static_cast<double>(c.x) + 0.5) * resolution_,
          (static_cast<double>(c.y) + 0.5) * resolution_};
}

Point2 OccupancyGrid::cell_corner(CellIndex c) const {
  return {static_cast<double>(c.x) * resolution_, static_cast<double>(c.y) * resolution_};
}

CellState OccupancyGrid::classify(CellCounts c) const {
  const std::uint64_t total = std::uint64_t{c.hits} + c.passes;
  if (total == 0) return CellState::kUnknown;
  const double ratio = static_cast<double>(c.hits) / static_cast<double>(total);
  return ratio >= occupancy_threshold_ ? CellState::kOccupied : CellState::kFree;
}

const OccupancyGrid::Tile* OccupancyGrid::find_tile(std::int64_t tx, std::int64_t ty) const {
  const std::int64_t lx = tx - tile_x0_;
  const std::int64_t ly = ty - tile_y0_;
  if (lx < 0 || ly < 0 || lx >= tiles_w_ || ly >= tiles_h_) return nullptr;
  return tiles_[static_cast<std::size_t>(ly * tiles_w_ + lx)].get();
}

CellCounts OccupancyGrid::counts(CellIndex c) const {
  const Tile* tile = find_tile(tile_coord(c.x), tile_coord(c.y));
  if (tile == nullptr) return {};
  return (*tile)[static_cast<std::size_t>(in_tile(c.y) * kTileSize + in_tile(c.x))];
}

void OccupancyGrid::grow_to(std::int64_t tx0, std::int64_t ty0, std::int64_t tx1,
                            std::int64_t ty1) {
  if (tiles_w_ == 0) {
    tile_x0_ = tx0;
    tile_y0_ = ty0;
    tiles_w_ = tx1 - tx0 + 1;
    tiles_h_ = ty1 - ty0 + 1;
    tiles_.assign(static_cast<std::size_t>(tiles_w_ * tiles_h_), nullptr);
    return;
  }
  const std::int64_t nx0 = std::min(tx0, tile_x0_);
  const std::int64_t ny0 = std::min(ty0, tile_y0_);
  const std::int64_t nx1 = std::max(tx1, tile_x0_ + tiles_w_ - 1);
  const std::int64_t ny1 = std::max(ty1, tile_y0_ + tiles_h_ - 1);
  if (nx0 == tile_x0_ && ny0 == tile_y0_ && nx1 == tile_x0_ + tiles_w_ - 1 &&
      ny1 == tile_y0_ + tiles_h_ - 1) {
    return;
  }
  const std::int64_t nw = nx1 - nx0 + 1;
  const std::int64_t nh = ny1 - ny0 + 1;
  std::vector<std::shared_ptr<Tile>> next(static_cast<std::size_t>(nw * nh));
  for (std::int64_t y = 0; y < tiles_h_; ++y) {
    for (std::int64_t x = 0; x < tiles_w_; ++x) {
      const std::int64_t gx = tile_x0_ + x - nx0;
      const std::int64_t gy = tile_y0_ + y - ny0;
      next[static_cast<std::size_t>(gy * nw + gx)] =
          std::move(tiles_[static_cast<std::size_t>(y * tiles_w_ + x)]);
    }
  }
  tiles_ = std::move(next);
  tile_x0_ = nx0;
  tile_y0_ = ny0;
  tiles_w_ = nw;
  tiles_h_ = nh;
}

OccupancyGrid::Tile& OccupancyGrid::writable_tile(std::int64_t tx, std::int64_t ty) {
  if (find_tile(tx, ty) == nullptr) {
    // Grow with slack so a robot creeping along an edge does not reallocate per scan.
    const bool outside = tiles_w_ == 0 || tx < tile_x0_ || ty < tile_y0_ ||
                         tx >= tile_x0_ + tiles_w_ || ty >= tile_y0_ + tiles_h_;
    if (outside) grow_to(tx - 2, ty - 2, tx + 2, ty + 2);
  }
  auto& slot = tiles_[static_cast<std::size_t>((ty - tile_y0_) * tiles_w_ + (tx - tile_x0_))];
  if (!slot) {
    slot = std::make_shared<Tile>();
  } else if (slot.use_count() > 1) {
    slot = std::make_shared<Tile>(*slot);
  }
  return *slot;
}

void OccupancyGrid::add(CellIndex c, std::uint32_t hits, std::uint32_t passes) {
  Tile& tile = writable_tile(tile_coord(c.x), tile_coord(c.y));
  CellCounts& cell = tile[static_cast<std::size_t>(in_tile(c.y) * kTileSize + in_tile(c.x))];
  cell.hits += hits;
  cell.passes += passes;
}

void OccupancyGrid::set(CellIndex c, CellCounts value) {
  Tile& tile = writable_tile(tile_coord(c.x), tile_coord(c.y));
  tile[static_cast<std::size_t>(in_tile(c.y) * kTileSize + in_tile(c.x))] = value;
}

void OccupancyGrid::reserve(const CellBox& box) {
  if (box.empty()) return;
  grow_to(tile_coord(box.x0), tile_coord(box.y0), tile_coord(box.x0 + box.width - 1),
          tile_coord(box.y0 + box.height - 1));
}

std::optional<CellBox> OccupancyGrid::known_extent() const {
  std::int64_t x0 = std::numeric_limits<std::int64_t>::max();
  std::int64_t y0 = x0;
  std::int64_t x1 = std::numeric_limits<std::int64_t>::min();
  std::int64_t y1 = x1;
  for_each_known([&](CellIndex c, const CellCounts&) {
    x0 = std::min(x0, c.x);
    y0 = std::min(y0, c.y);
    x1 = std::max(x1, c.x);
    y1 = std::max(y1, c.y);
  });
  if (x1 < x0) return std::nullopt;
  return CellBox{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

std::size_t OccupancyGrid::known_cells() const {
  std::size_t n = 0;
  for_each_known([&](CellIndex, const CellCounts&) { ++n; });
  return n;
}

bool OccupancyGrid::same_counts(const OccupancyGrid& other) const {
  bool same = true;
  for_each_known([&](CellIndex c, const CellCounts& v) {
    if (same && !(other.counts(c) == v)) same = false;
  });
  if (!same) return false;
  other.for_each_known([&](CellIndex c, const CellCounts& v) {
    if (same && !(counts(c) == v)) same = false;
  });
  return same;
}

std::size_t OccupancyGrid::shared_tiles() const {
  std::size_t n = 0;
  for (const auto& t : tiles_) {
    if (t && t.use_count() > 1) ++n;
  }
  return n;
}

}  // namespace team
