#include "gdex/baselines.hpp"

#include <queue>

namespace gdex {

namespace {

// Only in-grid UNKNOWN cells count: the grid auto-grows with the sensed
// area, so beyond-the-edge space is not an explorable frontier.
bool has_unknown_4neighbor(const OccupancyGrid& grid, int cx, int cy) {
  auto unknown = [&](int x, int y) {
    return grid.in_grid(x, y) && grid.at(x, y) == Cell::Unknown;
  };
  return unknown(cx + 1, cy) || unknown(cx - 1, cy) || unknown(cx, cy + 1) ||
         unknown(cx, cy - 1);
}

}  // namespace

std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid,
                                       int min_frontier_size) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<char> is_frontier(static_cast<std::size_t>(w) * h, 0);
  for (int cy = 0; cy < h; ++cy)
    for (int cx = 0; cx < w; ++cx)
      if (grid.at(cx, cy) == Cell::Free && has_unknown_4neighbor(grid, cx, cy))
        is_frontier[static_cast<std::size_t>(cy) * w + cx] = 1;

  std::vector<Frontier> out;
  std::vector<char> seen(is_frontier.size(), 0);
  for (int cy = 0; cy < h; ++cy) {
    for (int cx = 0; cx < w; ++cx) {
      const std::size_t idx0 = static_cast<std::size_t>(cy) * w + cx;
      if (!is_frontier[idx0] || seen[idx0]) continue;
      Frontier f;
      std::queue<std::pair<int, int>> q;
      q.push({cx, cy});
      seen[idx0] = 1;
      Vec2 sum{0.0, 0.0};
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        f.cells.push_back({x, y});
        sum += grid.center_of(x, y);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t idx = static_cast<std::size_t>(ny) * w + nx;
            if (!is_frontier[idx] || seen[idx]) continue;
            seen[idx] = 1;
            q.push({nx, ny});
          }
        }
      }
      f.size = static_cast<int>(f.cells.size());
      if (f.size < min_frontier_size) continue;
      f.centroid = sum / f.size;
      out.push_back(std::move(f));
    }
  }
  return out;
}

const Frontier& nf_select(const std::vector<Frontier>& frontiers,
                          const Pose& pose, const Vec2& goal) {
  if (frontiers.empty()) throw NoFrontiersError{};
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < frontiers.size(); ++i) {
    const double cost = (frontiers[i].centroid - pose.position).norm() +
                        (frontiers[i].centroid - goal).norm();
    if (cost < best_cost) {  // strict: ties keep the earlier component
      best_cost = cost;
      best = i;
    }
  }
  return frontiers[best];
}

namespace {

std::vector<char> inflated_blocked(const OccupancyGrid& grid,
                                   const PlannerParams& params) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<char> blocked(static_cast<std::size_t>(w) * h, 0);
  const int r = static_cast<int>(std::ceil(params.inflation / grid.resolution()));
  const double r2 = params.inflation / grid.resolution();
  for (int cy = 0; cy < h; ++cy) {
    for (int cx = 0; cx < w; ++cx) {
      const Cell c = grid.at(cx, cy);
      if (c == Cell::Unknown && !params.unknown_traversable) {
        blocked[static_cast<std::size_t>(cy) * w + cx] = 1;
        continue;
      }
      if (c != Cell::Occupied) continue;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r2 * r2) continue;
          const int nx = cx + dx;
          const int ny = cy + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          blocked[static_cast<std::size_t>(ny) * w + nx] = 1;
        }
      }
    }
  }
  return blocked;
}

// Nearest unblocked cell within a small snap radius (the robot footprint can
// sit inside the inflation band next to a wall).
std::optional<std::pair<int, int>> snap_cell(const OccupancyGrid& grid,
                                             const std::vector<char>& blocked,
                                             const Vec2& p, double radius) {
  const auto [cx, cy] = grid.cell_of(p);
  const int r = static_cast<int>(std::ceil(radius / grid.resolution()));
  std::optional<std::pair<int, int>> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const int nx = cx + dx;
      const int ny = cy + dy;
      if (!grid.in_grid(nx, ny)) continue;
      if (blocked[static_cast<std::size_t>(ny) * grid.width() + nx]) continue;
      const double d = (grid.center_of(nx, ny) - p).norm();
      if (d < best_d && d <= radius) {
        best_d = d;
        best = {{nx, ny}};
      }
    }
  }
  return best;
}

}  // namespace

GridPath plan_path(const OccupancyGrid& grid, const Vec2& from, const Vec2& to,
                   const PlannerParams& params) {
  const int w = grid.width();
  const int h = grid.height();
  const std::vector<char> blocked = inflated_blocked(grid, params);

  const auto start = snap_cell(grid, blocked, from, 0.35);
  const auto goal = snap_cell(grid, blocked, to, 0.35);
  if (!start || !goal) throw UnreachableError{};

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  auto index = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  using Node = std::pair<double, std::size_t>;  // (cost, cell index)
  std::priority_queue<Node, std::vector<Node>, std::greater<>> open;
  const std::size_t s = index(start->first, start->second);
  const std::size_t g = index(goal->first, goal->second);
  dist[s] = 0.0;
  open.push({0.0, s});
  const double kDiag = std::sqrt(2.0);

  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (d > dist[u]) continue;
    if (u == g) break;
    const int ux = static_cast<int>(u % w);
    const int uy = static_cast<int>(u / w);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = ux + dx;
        const int ny = uy + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t v = index(nx, ny);
        if (blocked[v]) continue;
        const double step_cost = (dx != 0 && dy != 0) ? kDiag : 1.0;
        if (dist[u] + step_cost < dist[v]) {
          dist[v] = dist[u] + step_cost;
          parent[v] = static_cast<int>(u);
          open.push({dist[v], v});
        }
      }
    }
  }
  if (!std::isfinite(dist[g])) throw UnreachableError{};

  GridPath path;
  path.length = dist[g] * grid.resolution();
  for (std::size_t v = g;; v = static_cast<std::size_t>(parent[v])) {
    path.cells.push_back({static_cast<int>(v % w), static_cast<int>(v / w)});
    if (v == s) break;
  }
  std::reverse(path.cells.begin(), path.cells.end());
  path.points.reserve(path.cells.size());
  for (const auto& [cx, cy] : path.cells)
    path.points.push_back(grid.center_of(cx, cy));
  return path;
}

Action follow_path(const GridPath& path, const RobotState& robot,
                   const SimConfig& cfg, const PlannerParams& params) {
  if (path.points.empty()) return {0.0, 0.0};

  // Lookahead point: nearest path point, advanced by the lookahead distance.
  std::size_t nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const double d = (path.points[i] - robot.pose.position).norm();
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  std::size_t target = nearest;
  double travelled = 0.0;
  while (target + 1 < path.points.size() && travelled < params.lookahead) {
    travelled += (path.points[target + 1] - path.points[target]).norm();
    ++target;
  }

  const auto [d, bearing] = waypoint_to_polar(robot.pose, path.points[target]);
  (void)d;
  const double w = std::clamp(params.steer_gain * bearing, -cfg.w_max, cfg.w_max);
  const double half_pi = kPi / 2.0;
  const double v = std::abs(bearing) >= half_pi
                       ? 0.0
                       : cfg.v_max * (1.0 - std::abs(bearing) / half_pi);
  return {v, w};
}

BaselineMethod baseline_from_string(const std::string& name) {
  if (name == "nf") return BaselineMethod::NF;
  if (name == "lp_ae") return BaselineMethod::LP_AE;
  if (name == "pp") return BaselineMethod::PP;
  throw std::invalid_argument("unknown baseline method: " + name);
}

namespace {

struct BaseLoop {
  RobotState robot;
  OccupancyGrid grid;
  RunRecord record;
  std::mt19937_64 rng;
  LidarScan scan;

  void advance(const WorldModel& world, const BaselineConfig& cfg,
               const Action& action) {
    const Vec2 before = robot.pose.position;
    robot = step(world, robot, action, cfg.sim);
    record.distance += (robot.pose.position - before).norm();
    record.trace.push_back(robot.pose);
    ++record.steps;
  }

  void sense_and_map(const WorldModel& world, const BaselineConfig& cfg) {
    scan = cast_lidar(world, robot, cfg.sim, rng);
    ++record.scan_count;
    integrate_scan(grid, robot.pose, scan);
  }

  bool at_goal(const WorldModel& world, const BaselineConfig& cfg) const {
    return (world.global_goal - robot.pose.position).norm() <
           cfg.idle.reach_distance;
  }
};

RunRecord finish(BaseLoop& loop, RunOutcome outcome) {
  loop.record.outcome = outcome;
  loop.record.grid = std::move(loop.grid);
  return loop.record;
}

RunRecord run_pp(const WorldModel& world, const BaselineConfig& cfg) {
  BaseLoop loop;
  loop.robot.pose = world.start_pose;
  loop.grid = rasterize_world(world, 0.1);
  loop.rng = derive_rng(cfg.seed, 31, 0);
  loop.record.method = "pp";
  loop.record.trace.push_back(loop.robot.pose);

  PlannerParams planner = cfg.planner;
  planner.unknown_traversable = false;
  GridPath path;
  try {
    path = plan_path(loop.grid, world.start_pose.position, world.global_goal,
                     planner);
  } catch (const UnreachableError&) {
    return finish(loop, RunOutcome::Timeout);
  }
  loop.record.waypoint_trace.push_back(
      {0, world.global_goal, true, WaypointEvent::Initial});

  while (loop.record.steps < cfg.step_budget) {
    if (loop.at_goal(world, cfg)) return finish(loop, RunOutcome::Goal);
    loop.advance(world, cfg, follow_path(path, loop.robot, cfg.sim, planner));
    if (loop.robot.collided) return finish(loop, RunOutcome::Collision);
  }
  return finish(loop, RunOutcome::Timeout);
}

RunRecord run_nf(const WorldModel& world, const BaselineConfig& cfg) {
  BaseLoop loop;
  loop.robot.pose = world.start_pose;
  loop.grid = OccupancyGrid::covering(world.bounds);
  loop.rng = derive_rng(cfg.seed, 32, 0);
  loop.record.method = "nf";
  loop.record.trace.push_back(loop.robot.pose);

  GridPath path;
  int steps_since_plan = cfg.planner.replan_interval;  // plan immediately

  while (loop.record.steps < cfg.step_budget) {
    loop.sense_and_map(world, cfg);
    if (loop.at_goal(world, cfg)) return finish(loop, RunOutcome::Goal);

    if (++steps_since_plan > cfg.planner.replan_interval || path.points.empty()) {
      steps_since_plan = 0;
      bool planned = false;
      // Plan straight to the goal once it lies in known free space.
      if (loop.grid.at_point(world.global_goal) == Cell::Free) {
        try {
          path = plan_path(loop.grid, loop.robot.pose.position,
                           world.global_goal, cfg.planner);
          planned = true;
          loop.record.waypoint_trace.push_back({loop.record.steps,
                                                world.global_goal, true,
                                                WaypointEvent::Reached});
        } catch (const UnreachableError&) {
        }
      }
      if (!planned) {
        try {
          const std::vector<Frontier> frontiers =
              detect_frontiers(loop.grid, cfg.planner.min_frontier_size);
          const Frontier& f =
              nf_select(frontiers, loop.robot.pose, world.global_goal);
          path = plan_path(loop.grid, loop.robot.pose.position, f.centroid,
                           cfg.planner);
          loop.record.waypoint_trace.push_back({loop.record.steps, f.centroid,
                                                false, WaypointEvent::Reached});
        } catch (const NoFrontiersError&) {
          return finish(loop, RunOutcome::Timeout);
        } catch (const UnreachableError&) {
          return finish(loop, RunOutcome::Timeout);
        }
      }
    }

    loop.advance(world, cfg,
                 follow_path(path, loop.robot, cfg.sim, cfg.planner));
    if (loop.robot.collided) return finish(loop, RunOutcome::Collision);
  }
  return finish(loop, RunOutcome::Timeout);
}

// GDAE's global layer verbatim, with the planner+tracker as local navigation.
RunRecord run_lp_ae(const WorldModel& world, const BaselineConfig& cfg) {
  BaseLoop loop;
  loop.robot.pose = world.start_pose;
  loop.grid = OccupancyGrid::covering(world.bounds);
  loop.rng = derive_rng(cfg.seed, 33, 0);
  loop.record.method = "lp_ae";
  loop.record.trace.push_back(loop.robot.pose);

  PoiStore store;
  bool has_waypoint = false;
  bool waypoint_is_goal = false;
  Vec2 waypoint{0.0, 0.0};
  GridPath path;
  int steps_since_plan = 0;

  while (loop.record.steps < cfg.step_budget) {
    loop.sense_and_map(world, cfg);

    std::vector<PoiCandidate> fresh =
        extract_gap_pois(loop.scan, loop.robot.pose, cfg.idle,
                         loop.record.steps);
    std::vector<PoiCandidate> freespace = extract_freespace_pois(
        loop.scan, loop.robot.pose, loop.record.steps);
    fresh.insert(fresh.end(), freespace.begin(), freespace.end());
    const bool had_poi = store.current_waypoint.has_value();
    update_poi_store(store, std::move(fresh), loop.grid, loop.robot.pose,
                     cfg.idle);
    bool need_select = !has_waypoint;
    if (had_poi && !store.current_waypoint.has_value()) {
      need_select = true;
      has_waypoint = false;
    }

    if (has_waypoint) {
      const double d_wp = (waypoint - loop.robot.pose.position).norm();
      if (d_wp < cfg.idle.reach_distance) {
        if (waypoint_is_goal) return finish(loop, RunOutcome::Goal);
        need_select = true;
      }
    }

    if (need_select) {
      try {
        waypoint = select_waypoint(store, loop.robot.pose, world.global_goal,
                                   loop.grid, cfg.idle);
        waypoint_is_goal = !store.current_waypoint.has_value();
        has_waypoint = true;
        path.points.clear();
        loop.record.waypoint_trace.push_back({loop.record.steps, waypoint,
                                              waypoint_is_goal,
                                              WaypointEvent::Reached});
      } catch (const NoCandidatesError&) {
        return finish(loop, RunOutcome::Timeout);
      }
    }

    if (++steps_since_plan > cfg.planner.replan_interval ||
        path.points.empty()) {
      steps_since_plan = 0;
      try {
        path = plan_path(loop.grid, loop.robot.pose.position, waypoint,
                         cfg.planner);
      } catch (const UnreachableError&) {
        // Treat an unplannable waypoint like a vanished one.
        if (store.current_waypoint) {
          store.candidates[*store.current_waypoint].status = PoiStatus::Deleted;
          store.current_waypoint.reset();
        }
        has_waypoint = false;
        continue;
      }
    }

    loop.advance(world, cfg,
                 follow_path(path, loop.robot, cfg.sim, cfg.planner));
    if (loop.robot.collided) return finish(loop, RunOutcome::Collision);
    ++store.steps_since_selected;
  }
  return finish(loop, RunOutcome::Timeout);
}

}  // namespace

RunRecord run_baseline(const WorldModel& world, const BaselineConfig& cfg) {
  switch (cfg.method) {
    case BaselineMethod::PP: return run_pp(world, cfg);
    case BaselineMethod::NF: return run_nf(world, cfg);
    case BaselineMethod::LP_AE: return run_lp_ae(world, cfg);
  }
  throw std::logic_error("unhandled baseline method");
}

}  // namespace gdex
