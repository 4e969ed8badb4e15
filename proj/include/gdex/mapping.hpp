#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdex/sim.hpp"

namespace gdex {

enum class Cell : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// Ternary occupancy grid built online from scans. Knowledge is monotone:
// a cell never returns to Unknown, and Occupied is never overwritten by Free.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(double resolution, const Vec2& origin, int width, int height);

  // Grid sized to cover the given bounds (plus one cell of slack).
  static OccupancyGrid covering(const Box& bounds, double resolution = 0.1);

  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Cell at(int cx, int cy) const {
    return in_grid(cx, cy) ? cells_[index(cx, cy)] : Cell::Unknown;
  }
  Cell at_point(const Vec2& p) const;
  bool in_grid(int cx, int cy) const {
    return cx >= 0 && cy >= 0 && cx < width_ && cy < height_;
  }

  std::pair<int, int> cell_of(const Vec2& p) const;
  Vec2 center_of(int cx, int cy) const;

  void mark_free(int cx, int cy);      // no-op on Occupied (sticky)
  void mark_occupied(int cx, int cy);

  // Grows by doubling until the point is covered; origin mapping preserved.
  void ensure_covers(const Vec2& p);

  std::size_t known_cell_count() const { return known_cells_; }

  bool operator==(const OccupancyGrid& other) const = default;

 private:
  std::size_t index(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * width_ + cx;
  }

  double resolution_ = 0.1;
  Vec2 origin_{0.0, 0.0};  // world coords of the min corner of cell (0,0)
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
  std::size_t known_cells_ = 0;
};

// Square map-information kernel, side length in meters; the cell window is
// ceil(k/resolution) rounded up to odd.
struct InfoKernel {
  double k = 1.5;

  int cells(double resolution) const {
    int n = static_cast<int>(std::ceil(k / resolution));
    return n % 2 == 0 ? n + 1 : n;
  }
};

// Marks cells along each beam Free up to the hit cell, which becomes
// Occupied. Out-of-range beams mark Free along the full max_range.
void integrate_scan(OccupancyGrid& grid, const Pose& pose,
                    const LidarScan& scan);

// Fraction of known (Free or Occupied) cells in the kernel window centered
// on the point's cell; windows are clipped at the grid edge.
double info_fraction(const OccupancyGrid& grid, const Vec2& point,
                     const InfoKernel& kernel);

// (Free + Occupied cell count) * resolution^2.
double known_area(const OccupancyGrid& grid);

// Fully known grid rasterized from world geometry (used by the PP oracle).
OccupancyGrid rasterize_world(const WorldModel& world, double resolution = 0.1);

// Portable graymap (P5): 0 occupied, 255 free, 127 unknown; sidecar text
// header <path>.hdr carries resolution and origin.
void export_graymap(const OccupancyGrid& grid, const std::string& path);

}  // namespace gdex
