#pragma once

#include "gdex/explorer.hpp"

namespace gdex {

struct Frontier {
  std::vector<std::pair<int, int>> cells;  // FREE cells with UNKNOWN 4-neighbor
  Vec2 centroid{0.0, 0.0};
  int size = 0;
};

struct GridPath {
  std::vector<std::pair<int, int>> cells;  // 8-adjacent sequence
  std::vector<Vec2> points;                // cell centers in world coords
  double length = 0.0;                     // m
};

struct NoFrontiersError : std::runtime_error {
  NoFrontiersError() : std::runtime_error("no frontiers found") {}
};
struct UnreachableError : std::runtime_error {
  UnreachableError() : std::runtime_error("goal unreachable on grid") {}
};

struct PlannerParams {
  double inflation = 0.3;       // m, robot_radius + 0.1
  bool unknown_traversable = true;
  int min_frontier_size = 5;    // cells
  int replan_interval = 10;     // steps
  double lookahead = 0.5;       // m
  double steer_gain = 2.0;      // K
};

// Connected components (8-connectivity) of FREE cells having an UNKNOWN
// 4-neighbor; components below min_frontier_size are dropped.
std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid,
                                       int min_frontier_size = 5);

// argmin of d(pose, centroid) + d(centroid, goal); ties by lowest first
// cell index. Throws NoFrontiersError on an empty list.
const Frontier& nf_select(const std::vector<Frontier>& frontiers,
                          const Pose& pose, const Vec2& goal);

// Minimal-cost 8-connected path on the inflated grid (unit cost 1,
// diagonals sqrt(2)). Throws UnreachableError.
GridPath plan_path(const OccupancyGrid& grid, const Vec2& from, const Vec2& to,
                   const PlannerParams& params);

// Lookahead steering: w = K * bearing clipped to +-w_max; v tapers linearly
// with |bearing| and is zero beyond 90 degrees.
Action follow_path(const GridPath& path, const RobotState& robot,
                   const SimConfig& cfg, const PlannerParams& params);

enum class BaselineMethod { NF, LP_AE, PP };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::NF;
  SimConfig sim;
  IdleParams idle;        // LP_AE reuses the GDAE global layer
  PlannerParams planner;
  int step_budget = 3000;
  std::uint64_t seed = 0;
};

BaselineMethod baseline_from_string(const std::string& name);

RunRecord run_baseline(const WorldModel& world, const BaselineConfig& cfg);

}  // namespace gdex
