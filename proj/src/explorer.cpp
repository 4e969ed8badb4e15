#include "gdex/explorer.hpp"

#include <fstream>

namespace gdex {

std::pair<double, double> waypoint_to_polar(const Pose& pose,
                                            const Vec2& waypoint) {
  const Vec2 d = waypoint - pose.position;
  return {d.norm(), wrap_angle(std::atan2(d.y(), d.x()) - pose.heading)};
}

namespace {

struct LoopState {
  RobotState robot;
  OccupancyGrid grid;
  PoiStore store;
  RunRecord record;
  std::mt19937_64 rng;
  LidarScan scan;
  bool has_waypoint = false;
  bool waypoint_is_goal = false;
  Vec2 waypoint{0.0, 0.0};
};

void sense_and_map(LoopState& ls, const WorldModel& world,
                   const ExplorerConfig& cfg) {
  ls.scan = cast_lidar(world, ls.robot, cfg.sim, ls.rng);
  ++ls.record.scan_count;
  integrate_scan(ls.grid, ls.robot.pose, ls.scan);
}

void update_pois(LoopState& ls, const ExplorerConfig& cfg, int step) {
  std::vector<PoiCandidate> fresh =
      extract_gap_pois(ls.scan, ls.robot.pose, cfg.params, step);
  std::vector<PoiCandidate> freespace =
      extract_freespace_pois(ls.scan, ls.robot.pose, step);
  fresh.insert(fresh.end(), freespace.begin(), freespace.end());
  update_poi_store(ls.store, std::move(fresh), ls.grid, ls.robot.pose,
                   cfg.params);
}

void advance(LoopState& ls, const WorldModel& world,
             const ExplorerConfig& cfg, const Action& action) {
  const Vec2 before = ls.robot.pose.position;
  ls.robot = step(world, ls.robot, action, cfg.sim);
  ls.record.distance += (ls.robot.pose.position - before).norm();
  ls.record.trace.push_back(ls.robot.pose);
  ++ls.record.steps;
  ++ls.store.steps_since_selected;
}

Action policy_action(const LoopState& ls, const ExplorerConfig& cfg) {
  PolicyState state;
  state.laser_bins = bag_scan(ls.scan);
  std::tie(state.waypoint_distance, state.waypoint_bearing) =
      waypoint_to_polar(ls.robot.pose, ls.waypoint);
  return scale_action(cfg.agent->act(state, cfg.sim.lidar_max_range), cfg.sim);
}

}  // namespace

RunRecord run_episode(const WorldModel& world, const ExplorerConfig& cfg) {
  if (!cfg.agent) throw std::invalid_argument("explorer needs a trained actor");

  LoopState ls;
  ls.robot.pose = world.start_pose;
  ls.grid = OccupancyGrid::covering(world.bounds);
  ls.rng = derive_rng(cfg.seed, 21, 0);
  ls.record.method = cfg.mode == ExplorerMode::GDAE ? "gdae" : "gd_rl";
  ls.record.trace.push_back(ls.robot.pose);

  auto set_waypoint = [&](const Vec2& target, bool is_goal, int step,
                          WaypointEvent event) {
    ls.waypoint = target;
    ls.has_waypoint = true;
    ls.waypoint_is_goal = is_goal;
    ls.record.waypoint_trace.push_back({step, target, is_goal, event});
  };

  if (cfg.mode == ExplorerMode::GD_RL)
    set_waypoint(world.global_goal, true, 0, WaypointEvent::Initial);

  while (ls.record.steps < cfg.step_budget) {
    const int step_idx = ls.record.steps;
    sense_and_map(ls, world, cfg);

    WaypointEvent pending_event =
        ls.has_waypoint ? WaypointEvent::Reached : WaypointEvent::Initial;
    bool need_select = !ls.has_waypoint;

    if (cfg.mode == ExplorerMode::GDAE) {
      const bool timing_out =
          ls.store.current_waypoint.has_value() &&
          ls.store.steps_since_selected > cfg.params.waypoint_timeout;
      const bool had_poi_waypoint = ls.store.current_waypoint.has_value();
      update_pois(ls, cfg, step_idx);
      if (had_poi_waypoint && !ls.store.current_waypoint.has_value()) {
        // Pursued POI vanished mid-pursuit; re-select immediately.
        need_select = true;
        pending_event =
            timing_out ? WaypointEvent::TimedOut : WaypointEvent::Deleted;
        ls.has_waypoint = false;
      }
    }

    if (ls.has_waypoint) {
      const double d_wp = (ls.waypoint - ls.robot.pose.position).norm();
      if (d_wp < cfg.params.reach_distance) {
        if (ls.waypoint_is_goal) {
          ls.record.outcome = RunOutcome::Goal;
          ls.record.final_candidates = ls.store.candidates;
          ls.record.grid = std::move(ls.grid);
          return ls.record;
        }
        need_select = true;
        pending_event = WaypointEvent::Reached;
      }
    }

    if (need_select && cfg.mode == ExplorerMode::GDAE) {
      bool selected = false;
      try {
        const Vec2 target = select_waypoint(ls.store, ls.robot.pose,
                                            world.global_goal, ls.grid,
                                            cfg.params);
        set_waypoint(target, !ls.store.current_waypoint.has_value(),
                     step_idx, pending_event);
        selected = true;
      } catch (const NoCandidatesError&) {
        // Rotate in place to gather scans until a candidate appears.
        for (int r = 0; r < cfg.recovery_rotation_steps &&
                        ls.record.steps < cfg.step_budget && !selected;
             ++r) {
          advance(ls, world, cfg, Action{0.0, cfg.sim.w_max});
          if (ls.robot.collided) {
            ls.record.outcome = RunOutcome::Collision;
            break;
          }
          sense_and_map(ls, world, cfg);
          update_pois(ls, cfg, ls.record.steps);
          try {
            const Vec2 target = select_waypoint(ls.store, ls.robot.pose,
                                                world.global_goal, ls.grid,
                                                cfg.params);
            set_waypoint(target, !ls.store.current_waypoint.has_value(),
                         ls.record.steps, WaypointEvent::Recovery);
            selected = true;
          } catch (const NoCandidatesError&) {
          }
        }
        if (!selected) {
          if (ls.record.outcome != RunOutcome::Collision)
            ls.record.outcome = RunOutcome::Timeout;
          ls.record.final_candidates = ls.store.candidates;
          ls.record.grid = std::move(ls.grid);
          return ls.record;
        }
      }
    } else if (need_select) {
      set_waypoint(world.global_goal, true, step_idx, pending_event);
    }

    advance(ls, world, cfg, policy_action(ls, cfg));
    if (ls.robot.collided) {
      ls.record.outcome = RunOutcome::Collision;
      break;
    }
  }

  ls.record.final_candidates = ls.store.candidates;
  ls.record.grid = std::move(ls.grid);
  return ls.record;
}

void export_trajectory(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trajectory: " + path);
  out << "step,x,y,heading\n";
  out.precision(9);
  for (std::size_t i = 0; i < record.trace.size(); ++i) {
    const Pose& p = record.trace[i];
    out << i << ',' << p.position.x() << ',' << p.position.y() << ','
        << p.heading << '\n';
  }
}

void export_poi_trace(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write POI trace: " + path);
  out << "id,x,y,source,status,created_step\n";
  out.precision(9);
  for (std::size_t i = 0; i < record.final_candidates.size(); ++i) {
    const PoiCandidate& c = record.final_candidates[i];
    out << i << ',' << c.position.x() << ',' << c.position.y() << ','
        << (c.source == PoiSource::Gap ? "gap" : "out_of_range") << ','
        << (c.status == PoiStatus::Active ? "active" : "deleted") << ','
        << c.created_step << '\n';
  }
}

}  // namespace gdex
