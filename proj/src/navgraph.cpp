#include "gdex/navgraph.hpp"

namespace gdex {

namespace {

Vec2 beam_endpoint(const LidarScan& scan, const Pose& pose, int beam,
                   double range) {
  const double angle = pose.heading + scan.beam_angle(beam);
  return pose.position + range * Vec2{std::cos(angle), std::sin(angle)};
}

bool near_occupied(const OccupancyGrid& grid, const Vec2& p, double clearance) {
  const int r = static_cast<int>(std::ceil(clearance / grid.resolution()));
  const auto [cx, cy] = grid.cell_of(p);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (grid.at(cx + dx, cy + dy) != Cell::Occupied) continue;
      if ((grid.center_of(cx + dx, cy + dy) - p).norm() <= clearance)
        return true;
    }
  }
  return false;
}

bool inside_trail(const std::vector<Vec2>& trail, const Vec2& p,
                  double radius) {
  for (const Vec2& t : trail)
    if ((t - p).norm() <= radius) return true;
  return false;
}

}  // namespace

std::vector<PoiCandidate> extract_gap_pois(const LidarScan& scan,
                                           const Pose& pose,
                                           const IdleParams& params,
                                           int step_index) {
  std::vector<PoiCandidate> out;
  for (int i = 0; i + 1 < scan.beam_count(); ++i) {
    const double r0 = scan.ranges[i];
    const double r1 = scan.ranges[i + 1];
    if (is_out_of_range(r0) || is_out_of_range(r1)) continue;
    if (std::abs(r0 - r1) <= params.gap_threshold) continue;
    const Vec2 mid = 0.5 * (beam_endpoint(scan, pose, i, r0) +
                            beam_endpoint(scan, pose, i + 1, r1));
    out.push_back({mid, step_index, PoiSource::Gap, PoiStatus::Active});
  }
  return out;
}

std::vector<PoiCandidate> extract_freespace_pois(const LidarScan& scan,
                                                 const Pose& pose,
                                                 int step_index) {
  std::vector<PoiCandidate> out;
  int run_start = -1;
  auto flush = [&](int run_end) {
    const int len = run_end - run_start;
    if (run_start < 0 || len < 2) return;
    const int center = run_start + (len - 1) / 2;
    const Vec2 p = beam_endpoint(scan, pose, center, scan.max_range / 2.0);
    out.push_back({p, step_index, PoiSource::OutOfRange, PoiStatus::Active});
  };
  for (int i = 0; i < scan.beam_count(); ++i) {
    if (is_out_of_range(scan.ranges[i])) {
      if (run_start < 0) run_start = i;
    } else {
      flush(i);
      run_start = -1;
    }
  }
  flush(scan.beam_count());
  return out;
}

void update_poi_store(PoiStore& store, std::vector<PoiCandidate> fresh,
                      const OccupancyGrid& grid, const Pose& pose,
                      const IdleParams& params) {
  // (a) drop new candidates inside the visited trail
  // (b) dedupe against existing active candidates
  for (PoiCandidate& cand : fresh) {
    if (inside_trail(store.visited_trail, cand.position, params.visit_radius))
      continue;
    bool duplicate = false;
    for (const PoiCandidate& existing : store.candidates) {
      if (existing.status != PoiStatus::Active) continue;
      if ((existing.position - cand.position).norm() <= params.merge_radius) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) store.candidates.push_back(cand);
  }

  // (c) delete active candidates too close to mapped obstacles
  for (std::size_t i = 0; i < store.candidates.size(); ++i) {
    PoiCandidate& cand = store.candidates[i];
    if (cand.status != PoiStatus::Active) continue;
    if (near_occupied(grid, cand.position, params.obstacle_clearance)) {
      cand.status = PoiStatus::Deleted;
      if (store.current_waypoint == i) store.current_waypoint.reset();
    }
  }

  // (d) expire a timed-out waypoint
  if (store.current_waypoint &&
      store.steps_since_selected > params.waypoint_timeout) {
    store.candidates[*store.current_waypoint].status = PoiStatus::Deleted;
    store.current_waypoint.reset();
  }

  // (e) extend the visited trail
  store.visited_trail.push_back(pose.position);
}

double idle_distance_component(double d, const IdleParams& params) {
  const double span = params.l2 - params.l1;
  const double num = std::exp(std::pow(d / span, 2.0));
  const double den = std::exp(std::pow(params.l2 / span, 2.0));
  return std::tanh(num / den) * params.l2;
}

double idle_score(const PoiCandidate& candidate, const Pose& pose,
                  const Vec2& goal, const OccupancyGrid& grid,
                  const IdleParams& params) {
  const double d_robot = (candidate.position - pose.position).norm();
  const double d_goal = (candidate.position - goal).norm();
  const double info = info_fraction(grid, candidate.position, params.kernel);
  return idle_distance_component(d_robot, params) + d_goal + std::exp(info);
}

Vec2 select_waypoint(PoiStore& store, const Pose& pose, const Vec2& goal,
                     const OccupancyGrid& grid, const IdleParams& params) {
  store.steps_since_selected = 0;
  if ((goal - pose.position).norm() < params.goal_switch_distance) {
    store.current_waypoint.reset();
    return goal;
  }
  std::optional<std::size_t> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < store.candidates.size(); ++i) {
    if (store.candidates[i].status != PoiStatus::Active) continue;
    const double h = idle_score(store.candidates[i], pose, goal, grid, params);
    if (h < best_score) {  // strict: ties keep the lowest index
      best_score = h;
      best = i;
    }
  }
  if (!best) throw NoCandidatesError{};
  store.current_waypoint = best;
  return store.candidates[*best].position;
}

}  // namespace gdex
