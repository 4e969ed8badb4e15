#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gdex/geometry.hpp"

namespace gdex {

using Obstacle = std::variant<Box, ConvexPolygon>;

// Static 2D world: rectangular bounds, obstacles, start pose, global goal.
struct WorldModel {
  Box bounds;  // axis-aligned, interior is navigable
  std::vector<Obstacle> obstacles;
  Pose start_pose;
  Vec2 global_goal{0.0, 0.0};

  // Every obstacle edge plus the four bound walls.
  std::vector<Segment> all_segments() const;

  // True if a disk of the given radius centered at p overlaps any obstacle
  // or pokes outside the bounds.
  bool disk_collides(const Vec2& p, double radius) const;
};

enum class TrapKind { UTrap, Corridor, Clutter };

struct WorldGenError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 10x10 m world with 4 randomized axis-aligned boxes; start and goal are
// collision-free, >= 1 m apart, and connected on a rasterized grid.
WorldModel generate_training_world(std::mt19937_64& rng);

// World where the straight start->goal segment leads into a concave pocket;
// the goal stays reachable by detour.
WorldModel generate_trap_world(TrapKind kind, std::mt19937_64& rng);

TrapKind trap_kind_from_string(const std::string& name);

// World file text format, one directive per line:
//   bounds <min_x> <min_y> <max_x> <max_y>
//   start <x> <y> <heading>
//   goal <x> <y>
//   box <cx> <cy> <half_x> <half_y>
//   poly <x1> <y1> <x2> <y2> ... (>= 3 CCW vertices)
// '#' starts a comment. Loader validates the WorldModel invariants.
WorldModel load_world(const std::string& path);
void save_world(const WorldModel& world, const std::string& path);
WorldModel parse_world(const std::string& text);
std::string world_to_text(const WorldModel& world);

}  // namespace gdex
