#include "gdex/mapping.hpp"

#include <fstream>

namespace gdex {

OccupancyGrid::OccupancyGrid(double resolution, const Vec2& origin, int width,
                             int height)
    : resolution_(resolution),
      origin_(origin),
      width_(width),
      height_(height),
      cells_(static_cast<std::size_t>(width) * height, Cell::Unknown) {}

OccupancyGrid OccupancyGrid::covering(const Box& bounds, double resolution) {
  const Vec2 lo = bounds.min() - Vec2{resolution, resolution};
  const Vec2 hi = bounds.max() + Vec2{resolution, resolution};
  const int w = static_cast<int>(std::ceil((hi.x() - lo.x()) / resolution));
  const int h = static_cast<int>(std::ceil((hi.y() - lo.y()) / resolution));
  return OccupancyGrid(resolution, lo, w, h);
}

std::pair<int, int> OccupancyGrid::cell_of(const Vec2& p) const {
  return {static_cast<int>(std::floor((p.x() - origin_.x()) / resolution_)),
          static_cast<int>(std::floor((p.y() - origin_.y()) / resolution_))};
}

Vec2 OccupancyGrid::center_of(int cx, int cy) const {
  return {origin_.x() + (cx + 0.5) * resolution_,
          origin_.y() + (cy + 0.5) * resolution_};
}

Cell OccupancyGrid::at_point(const Vec2& p) const {
  const auto [cx, cy] = cell_of(p);
  return at(cx, cy);
}

void OccupancyGrid::mark_free(int cx, int cy) {
  if (!in_grid(cx, cy)) return;
  Cell& c = cells_[index(cx, cy)];
  if (c == Cell::Unknown) {
    c = Cell::Free;
    ++known_cells_;
  }
}

void OccupancyGrid::mark_occupied(int cx, int cy) {
  if (!in_grid(cx, cy)) return;
  Cell& c = cells_[index(cx, cy)];
  if (c == Cell::Unknown) ++known_cells_;
  c = Cell::Occupied;
}

void OccupancyGrid::ensure_covers(const Vec2& p) {
  while (true) {
    const auto [cx, cy] = cell_of(p);
    if (in_grid(cx, cy)) return;
    // Double each dimension, extending toward the uncovered side.
    const int shift_x = cx < 0 ? width_ : 0;
    const int shift_y = cy < 0 ? height_ : 0;
    OccupancyGrid grown(resolution_,
                        origin_ - Vec2{shift_x * resolution_, shift_y * resolution_},
                        width_ * 2, height_ * 2);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x)
        grown.cells_[grown.index(x + shift_x, y + shift_y)] =
            cells_[index(x, y)];
    grown.known_cells_ = known_cells_;
    *this = std::move(grown);
  }
}

namespace {

// Amanatides-Woo grid traversal from world point a to b, visiting every cell
// the segment crosses in order.
template <typename Visit>
void traverse(const OccupancyGrid& grid, const Vec2& a, const Vec2& b,
              Visit&& visit) {
  const double res = grid.resolution();
  auto [cx, cy] = grid.cell_of(a);
  const auto [ex, ey] = grid.cell_of(b);
  const Vec2 d = b - a;
  const int step_x = d.x() > 0 ? 1 : -1;
  const int step_y = d.y() > 0 ? 1 : -1;

  auto boundary = [&](int cell, double origin, int step) {
    return origin + (cell + (step > 0 ? 1 : 0)) * res;
  };
  double t_max_x = d.x() != 0.0
      ? (boundary(cx, grid.origin().x(), step_x) - a.x()) / d.x()
      : std::numeric_limits<double>::infinity();
  double t_max_y = d.y() != 0.0
      ? (boundary(cy, grid.origin().y(), step_y) - a.y()) / d.y()
      : std::numeric_limits<double>::infinity();
  const double t_delta_x = d.x() != 0.0 ? res / std::abs(d.x())
                                        : std::numeric_limits<double>::infinity();
  const double t_delta_y = d.y() != 0.0 ? res / std::abs(d.y())
                                        : std::numeric_limits<double>::infinity();

  const int max_cells = grid.width() + grid.height() + 2;
  for (int i = 0; i < max_cells; ++i) {
    visit(cx, cy);
    if (cx == ex && cy == ey) return;
    if (t_max_x < t_max_y) {
      cx += step_x;
      t_max_x += t_delta_x;
    } else {
      cy += step_y;
      t_max_y += t_delta_y;
    }
  }
}

}  // namespace

void integrate_scan(OccupancyGrid& grid, const Pose& pose,
                    const LidarScan& scan) {
  grid.ensure_covers(pose.position);
  for (int i = 0; i < scan.beam_count(); ++i) {
    const double r = scan.ranges[i];
    const bool hit = !is_out_of_range(r);
    const double len = hit ? r : scan.max_range;
    const double angle = pose.heading + scan.beam_angle(i);
    const Vec2 end = pose.position + len * Vec2{std::cos(angle), std::sin(angle)};
    grid.ensure_covers(end);
    const auto [ex, ey] = grid.cell_of(end);
    traverse(grid, pose.position, end, [&](int cx, int cy) {
      if (hit && cx == ex && cy == ey)
        grid.mark_occupied(cx, cy);
      else
        grid.mark_free(cx, cy);
    });
  }
}

double info_fraction(const OccupancyGrid& grid, const Vec2& point,
                     const InfoKernel& kernel) {
  const int half = kernel.cells(grid.resolution()) / 2;
  const auto [cx, cy] = grid.cell_of(point);
  const int x0 = std::max(0, cx - half);
  const int x1 = std::min(grid.width() - 1, cx + half);
  const int y0 = std::max(0, cy - half);
  const int y1 = std::min(grid.height() - 1, cy + half);
  if (x1 < x0 || y1 < y0) return 0.0;
  int known = 0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (grid.at(x, y) != Cell::Unknown) ++known;
  const int total = (x1 - x0 + 1) * (y1 - y0 + 1);
  return static_cast<double>(known) / total;
}

double known_area(const OccupancyGrid& grid) {
  return static_cast<double>(grid.known_cell_count()) * grid.resolution() *
         grid.resolution();
}

OccupancyGrid rasterize_world(const WorldModel& world, double resolution) {
  OccupancyGrid grid = OccupancyGrid::covering(world.bounds, resolution);
  for (int cy = 0; cy < grid.height(); ++cy) {
    for (int cx = 0; cx < grid.width(); ++cx) {
      if (world.disk_collides(grid.center_of(cx, cy), resolution * 0.5))
        grid.mark_occupied(cx, cy);
      else
        grid.mark_free(cx, cy);
    }
  }
  return grid;
}

void export_graymap(const OccupancyGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graymap: " + path);
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  // Row 0 of the image is the top of the map (max y).
  for (int cy = grid.height() - 1; cy >= 0; --cy) {
    for (int cx = 0; cx < grid.width(); ++cx) {
      const Cell c = grid.at(cx, cy);
      const unsigned char v = c == Cell::Occupied ? 0
                              : c == Cell::Free   ? 255
                                                  : 127;
      out.put(static_cast<char>(v));
    }
  }
  std::ofstream hdr(path + ".hdr");
  hdr.precision(17);
  hdr << "resolution " << grid.resolution() << "\norigin "
      << grid.origin().x() << ' ' << grid.origin().y() << "\nwidth "
      << grid.width() << "\nheight " << grid.height() << '\n';
}

}  // namespace gdex
