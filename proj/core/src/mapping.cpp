#include "team/mapping.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "team/error.hpp"

namespace team {
namespace {

constexpr unsigned char kPgmOccupied = 0;
constexpr unsigned char kPgmUnknown = 205;
constexpr unsigned char kPgmFree = 254;

void require_same_resolution(const OccupancyGrid& a, const OccupancyGrid& b) {
  if (std::abs(a.resolution() - b.resolution()) > 1e-12) {
    throw Error(ErrorCode::kDomain, "occupancy grids have different resolutions");
  }
}

}  // namespace

bool sync_gate(double scan_t, double pose_t, double sync_timeout) {
  // The slack absorbs rounding in clock arithmetic so that an exact 100 ms gap passes.
  return std::abs(scan_t - pose_t) <= sync_timeout + 1e-9;
}

void integrate_scan(OccupancyGrid& grid, const Scan& scan, const Pose2& pose) {
  const Point2 origin = pose.position();
  const double res = grid.resolution();
  for (std::size_t k = 0; k < scan.ranges.size(); ++k) {
    const auto& r = scan.ranges[k];
    const double angle = pose.theta + static_cast<double>(k) * scan.angular_resolution;
    const Point2 end = origin + (r ? *r : scan.max_range) * unit_vector(angle);
    std::optional<CellIndex> last;
    traverse_cells(res, origin, end, [&](CellIndex c) {
      if (last) grid.add(*last, 0, 1);
      last = c;
    });
    if (r) {
      grid.add(*last, 1, 0);
    } else {
      grid.add(*last, 0, 1);
    }
  }
}

void merge_into(OccupancyGrid& dst, const OccupancyGrid& src) {
  require_same_resolution(dst, src);
  if (const auto box = src.known_extent()) dst.reserve(*box);
  src.for_each_known([&](CellIndex c, CellCounts n) { dst.add(c, n.hits, n.passes); });
}

OccupancyGrid merge(std::span<const OccupancyGrid> maps) {
  if (maps.empty()) return OccupancyGrid();
  OccupancyGrid out(maps.front().resolution(), maps.front().occupancy_threshold());
  for (const auto& m : maps) merge_into(out, m);
  return out;
}

PixelError pixel_error(const OccupancyGrid& candidate, const OccupancyGrid& truth) {
  require_same_resolution(candidate, truth);
  PixelError e;
  candidate.for_each_known([&](CellIndex c, CellCounts n) {
    ++e.known;
    if (candidate.classify(n) != truth.state(c)) ++e.count;
  });
  if (e.known > 0) e.rate = static_cast<double>(e.count) / static_cast<double>(e.known);
  return e;
}

std::string to_pgm(const OccupancyGrid& grid) {
  // An empty map still yields a valid image: a single unknown pixel.
  const CellBox box = grid.known_extent().value_or(CellBox{0, 0, 1, 1});
  std::ostringstream header;
  header << "P5\n# resolution " << grid.resolution() << "\n# cell_origin " << box.x0 << ' '
         << box.y0 << "\n"
         << box.width << ' ' << box.height << "\n255\n";
  std::string out = header.str();
  out.reserve(out.size() + static_cast<std::size_t>(box.width * box.height));
  for (std::int64_t y = box.y0 + box.height - 1; y >= box.y0; --y) {
    for (std::int64_t x = box.x0; x < box.x0 + box.width; ++x) {
      switch (grid.state({x, y})) {
        case CellState::kOccupied: out.push_back(static_cast<char>(kPgmOccupied)); break;
        case CellState::kFree: out.push_back(static_cast<char>(kPgmFree)); break;
        case CellState::kUnknown: out.push_back(static_cast<char>(kPgmUnknown)); break;
      }
    }
  }
  return out;
}

OccupancyGrid from_pgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error(ErrorCode::kIo, "not a binary PGM file");
  double resolution = kDefaultResolution;
  std::int64_t x0 = 0, y0 = 0;
  std::int64_t values[3];
  int n_values = 0;
  while (n_values < 3) {
    in >> std::ws;
    if (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      std::istringstream comment(line.substr(1));
      std::string key;
      comment >> key;
      if (key == "resolution") comment >> resolution;
      if (key == "cell_origin") comment >> x0 >> y0;
      continue;
    }
    if (!(in >> values[n_values])) throw Error(ErrorCode::kIo, "truncated PGM header");
    ++n_values;
  }
  in.get();  // the single whitespace byte after maxval
  const std::int64_t width = values[0], height = values[1];
  if (width <= 0 || height <= 0 || values[2] != 255) {
    throw Error(ErrorCode::kIo, "unsupported PGM dimensions or depth");
  }
  std::string pixels(static_cast<std::size_t>(width * height), '\0');
  if (!in.read(pixels.data(), static_cast<std::streamsize>(pixels.size()))) {
    throw Error(ErrorCode::kIo, "truncated PGM pixel data");
  }

  OccupancyGrid grid(resolution);
  std::size_t i = 0;
  for (std::int64_t y = y0 + height - 1; y >= y0; --y) {
    for (std::int64_t x = x0; x < x0 + width; ++x) {
      const auto v = static_cast<unsigned char>(pixels[i++]);
      if (v == kPgmUnknown) continue;
      // Darker than the unknown grey reads as occupied, lighter as free.
      grid.set({x, y}, v < kPgmUnknown ? CellCounts{1, 0} : CellCounts{0, 1});
    }
  }
  return grid;
}

void write_pgm(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  const std::string bytes = to_pgm(grid);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

OccupancyGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return from_pgm(std::string(std::istreambuf_iterator<char>(in), {}));
}

}  // namespace team
