#pragma once

#include "gdex/navgraph.hpp"
#include "gdex/policy.hpp"

namespace gdex {

enum class ExplorerMode { GDAE, GD_RL };

struct ExplorerConfig {
  ExplorerMode mode = ExplorerMode::GDAE;
  IdleParams params;
  SimConfig sim;
  int step_budget = 3000;
  int recovery_rotation_steps = 40;
  const Td3Agent* agent = nullptr;  // trained actor
  std::uint64_t seed = 0;
};

enum class RunOutcome { Goal, Collision, Timeout };

// Why the pursued waypoint changed at a given step; used to assert the
// loop only re-selects on arrival, timeout, or deletion.
enum class WaypointEvent { Initial, Reached, TimedOut, Deleted, Recovery };

struct WaypointChange {
  int step = 0;
  Vec2 target{0.0, 0.0};
  bool is_global_goal = false;
  WaypointEvent event = WaypointEvent::Initial;
};

struct RunRecord {
  std::vector<Pose> trace;
  std::vector<WaypointChange> waypoint_trace;
  std::vector<PoiCandidate> final_candidates;
  RunOutcome outcome = RunOutcome::Timeout;
  double distance = 0.0;  // m, sum of consecutive pose gaps
  int steps = 0;
  int scan_count = 0;
  std::string method;
  OccupancyGrid grid;

  double elapsed_seconds(double dt) const { return steps * dt; }
};

// (Euclidean distance, bearing wrapped into (-pi, pi]) of the waypoint
// relative to the robot.
std::pair<double, double> waypoint_to_polar(const Pose& pose,
                                            const Vec2& waypoint);

// Sense -> map -> POI update -> (re)select waypoint on arrival/timeout ->
// policy action -> step, until the global goal, a collision, or the step
// budget. GD_RL mode pins the waypoint to the global goal and skips the
// POI machinery.
RunRecord run_episode(const WorldModel& world, const ExplorerConfig& cfg);

// Trajectory CSV: step,x,y,heading.
void export_trajectory(const RunRecord& record, const std::string& path);
// Per-candidate CSV: id,x,y,source,status,created_step.
void export_poi_trace(const RunRecord& record, const std::string& path);

}  // namespace gdex
