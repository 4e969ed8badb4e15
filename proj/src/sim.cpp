#include "gdex/sim.hpp"

#include <algorithm>

namespace gdex {

RobotState step(const WorldModel& world, const RobotState& robot,
                const Action& action, const SimConfig& cfg) {
  RobotState next = robot;
  next.linear_velocity = std::clamp(action.v, 0.0, cfg.v_max);
  next.angular_velocity = std::clamp(action.w, -cfg.w_max, cfg.w_max);

  constexpr int kSubsteps = 4;
  const double dt = cfg.timestep / kSubsteps;
  Pose pose = robot.pose;
  for (int i = 0; i < kSubsteps; ++i) {
    Pose trial = pose;
    trial.position.x() += next.linear_velocity * std::cos(pose.heading) * dt;
    trial.position.y() += next.linear_velocity * std::sin(pose.heading) * dt;
    trial.heading = wrap_angle(pose.heading + next.angular_velocity * dt);
    if (world.disk_collides(trial.position, cfg.robot_radius)) {
      next.collided = true;
      break;
    }
    pose = trial;
  }
  next.pose = pose;
  return next;
}

static double cast_ray(const WorldModel& world, const Vec2& origin,
                       const Vec2& dir, double max_range) {
  double best = kOutOfRange;
  for (const Segment& seg : world.all_segments()) {
    if (auto t = ray_segment_intersection(origin, dir, seg)) {
      if (*t < best) best = *t;
    }
  }
  return best <= max_range ? best : kOutOfRange;
}

LidarScan cast_lidar_exact(const WorldModel& world, const RobotState& robot,
                           const SimConfig& cfg) {
  LidarScan scan;
  scan.max_range = cfg.lidar_max_range;
  scan.ranges.resize(cfg.beam_count);
  for (int i = 0; i < cfg.beam_count; ++i) {
    const double angle = robot.pose.heading + scan.beam_angle(i);
    const Vec2 dir{std::cos(angle), std::sin(angle)};
    scan.ranges[i] = cast_ray(world, robot.pose.position, dir, scan.max_range);
  }
  return scan;
}

LidarScan cast_lidar(const WorldModel& world, const RobotState& robot,
                     const SimConfig& cfg, std::mt19937_64& rng) {
  LidarScan scan = cast_lidar_exact(world, robot, cfg);
  if (cfg.sensor_noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, cfg.sensor_noise_std);
    for (double& r : scan.ranges) {
      if (is_out_of_range(r)) continue;
      r = std::clamp(r + noise(rng), 1e-6, scan.max_range);
    }
  }
  return scan;
}

}  // namespace gdex
