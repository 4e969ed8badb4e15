#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gdex/world.hpp"

namespace gdex {

struct RobotState {
  Pose pose;
  double linear_velocity = 0.0;   // m/s, in [0, v_max]
  double angular_velocity = 0.0;  // rad/s, in [-w_max, w_max]
  bool collided = false;
};

// Sentinel for beams that see nothing within max_range.
constexpr double kOutOfRange = std::numeric_limits<double>::infinity();

inline bool is_out_of_range(double r) { return std::isinf(r); }

// 180 deg planar scan in front of the robot, beams ordered -90..+90 deg
// relative to heading. Finite readings are in (0, max_range].
struct LidarScan {
  std::vector<double> ranges;
  double max_range = 10.0;

  int beam_count() const { return static_cast<int>(ranges.size()); }

  // Beam angle relative to heading for beam index i (endpoints inclusive).
  double beam_angle(int i) const {
    const int n = beam_count();
    if (n == 1) return 0.0;
    return -kPi / 2.0 + kPi * static_cast<double>(i) / (n - 1);
  }
};

struct SimConfig {
  double v_max = 0.5;            // m/s
  double w_max = 1.0;            // rad/s
  double timestep = 0.1;         // s
  double robot_radius = 0.2;     // m
  double lidar_max_range = 10.0; // m
  int beam_count = 126;          // 21 bins x 6 beams
  double sensor_noise_std = 0.03;
  double action_noise_std = 0.0; // exploration noise lives in the policy
  int max_episode_steps = 500;
  std::uint64_t rng_seed = 0;
};

struct Action {
  double v = 0.0;  // m/s
  double w = 0.0;  // rad/s
};

// One unicycle timestep with swept-disk collision checking (4 substeps).
// On collision the pose stays at the last free pose and `collided` is set.
RobotState step(const WorldModel& world, const RobotState& robot,
                const Action& action, const SimConfig& cfg);

// Ray-cast scan with additive Gaussian range noise, clamped to
// (0, max_range]. Beams with no hit read kOutOfRange.
LidarScan cast_lidar(const WorldModel& world, const RobotState& robot,
                     const SimConfig& cfg, std::mt19937_64& rng);

// Noise-free variant used by oracles and deterministic checks.
LidarScan cast_lidar_exact(const WorldModel& world, const RobotState& robot,
                           const SimConfig& cfg);

}  // namespace gdex
