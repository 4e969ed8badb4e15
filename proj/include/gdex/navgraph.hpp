#pragma once

#include <optional>
#include <vector>

#include "gdex/mapping.hpp"

namespace gdex {

enum class PoiSource { Gap, OutOfRange };
enum class PoiStatus { Active, Deleted };

struct PoiCandidate {
  Vec2 position{0.0, 0.0};
  int created_step = 0;
  PoiSource source = PoiSource::Gap;
  PoiStatus status = PoiStatus::Active;
};

// IDLE scoring and POI lifecycle parameters. Defaults marked (paper) come
// from the published protocol; the rest are artifact choices.
struct IdleParams {
  double l1 = 5.0;                 // m (paper)
  double l2 = 10.0;                // m (paper)
  InfoKernel kernel{1.5};          // m (paper)
  double gap_threshold = 1.0;      // m
  double reach_distance = 1.0;     // eta_D, m (paper)
  double goal_switch_distance = 10.0;  // delta, m
  int waypoint_timeout = 100;      // steps
  double merge_radius = 0.5;       // m
  double obstacle_clearance = 0.45;  // m
  double visit_radius = 1.0;       // m
};

// Candidate POIs plus the visited trail and the currently pursued waypoint.
struct PoiStore {
  std::vector<PoiCandidate> candidates;
  std::vector<Vec2> visited_trail;
  std::optional<std::size_t> current_waypoint;  // index into candidates
  int steps_since_selected = 0;
};

struct NoCandidatesError : std::runtime_error {
  NoCandidatesError() : std::runtime_error("no active POI candidates") {}
};

// One candidate per adjacent finite beam pair whose range difference exceeds
// gap_threshold, placed at the midpoint of the two beam endpoints.
std::vector<PoiCandidate> extract_gap_pois(const LidarScan& scan,
                                           const Pose& pose,
                                           const IdleParams& params,
                                           int step_index = 0);

// One candidate per maximal run of >= 2 out-of-range beams, placed at
// max_range/2 along the run's central beam.
std::vector<PoiCandidate> extract_freespace_pois(const LidarScan& scan,
                                                 const Pose& pose,
                                                 int step_index = 0);

// Lifecycle pass: drop new candidates inside the visited trail, dedupe
// against active ones, delete candidates near mapped obstacles, expire a
// timed-out waypoint, then append the pose to the trail.
void update_poi_store(PoiStore& store, std::vector<PoiCandidate> fresh,
                      const OccupancyGrid& grid, const Pose& pose,
                      const IdleParams& params);

// tanh(e^{(d/(l2-l1))^2} / e^{(l2/(l2-l1))^2}) * l2
double idle_distance_component(double d, const IdleParams& params);

// Distance component + Euclidean candidate-to-goal distance + e^{info}.
double idle_score(const PoiCandidate& candidate, const Pose& pose,
                  const Vec2& goal, const OccupancyGrid& grid,
                  const IdleParams& params);

// The global goal when within goal_switch_distance, else the active
// candidate with the smallest IDLE score (ties: lowest index). Throws
// NoCandidatesError when neither applies.
Vec2 select_waypoint(PoiStore& store, const Pose& pose, const Vec2& goal,
                     const OccupancyGrid& grid, const IdleParams& params);

}  // namespace gdex
