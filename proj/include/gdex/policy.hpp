#pragma once

#include <array>
#include <optional>
#include <string>

#include "gdex/nn.hpp"
#include "gdex/sim.hpp"

namespace gdex {

constexpr int kLaserBins = 21;
constexpr int kStateDim = kLaserBins + 2;  // bins + waypoint polar
constexpr int kActionDim = 2;

// Network input state: bagged laser bins plus the waypoint in polar
// coordinates relative to the robot.
struct PolicyState {
  std::array<double, kLaserBins> laser_bins{};  // meters
  double waypoint_distance = 0.0;               // m
  double waypoint_bearing = 0.0;                // rad, (-pi, pi]

  // Normalized 23-vector fed to the networks (bins and distance by
  // max_range, bearing by pi).
  nn::Vec to_input(double max_range = 10.0) const;
};

struct RawAction {
  double a1 = 0.0;  // linear, (-1,1)
  double a2 = 0.0;  // angular, (-1,1)
};

struct BeamCountMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Min over each of the 21 contiguous beam groups; out-of-range beams count
// as max_range. Throws BeamCountMismatch unless beam count divides evenly.
std::array<double, kLaserBins> bag_scan(const LidarScan& scan);

// v = v_max*(a1+1)/2, w = w_max*a2. Backward motion is never produced.
Action scale_action(const RawAction& raw, const SimConfig& cfg);

struct RewardParams {
  double r_goal = 100.0;
  double r_collision = -100.0;
  double reach_distance = 1.0;  // eta_D, m
  int delayed_steps = 10;       // n
};

// r_g if the goal is within reach_distance, r_c on collision, else v - |w|.
double reward(double v, double w, bool collided, double goal_distance,
              const RewardParams& params);

struct Transition {
  nn::Vec state;       // normalized input
  nn::Vec next_state;
  RawAction action;
  double reward = 0.0;
  bool done = false;   // true only for goal/collision, not truncation
};

// Retroactively adds r_g/i to the i-th step before a goal-terminated
// episode, for i = 1..min(n, t). No-op otherwise.
void attribute_delayed_reward(std::vector<Transition>& episode,
                              const RewardParams& params, bool reached_goal);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  std::size_t size() const { return storage_.size(); }

  std::vector<const Transition*> sample(std::size_t batch,
                                        std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> storage_;
};

struct Td3Config {
  int hidden1 = 800;
  int hidden2 = 600;
  double gamma = 0.99;
  double rho = 0.995;  // target retention per soft update
  int policy_delay = 2;
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 200000;
  double explore_sigma_start = 0.5;
  double explore_sigma_end = 0.05;
  double smoothing_sigma = 0.2;
  double smoothing_clip = 0.5;
  int warmup_steps = 1000;
  int updates_per_step = 1;
  bool episode_level_delay = false;  // literal paper reading, off by default
};

struct BufferUnderfull : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Td3Agent {
 public:
  Td3Agent(const Td3Config& cfg, std::uint64_t init_seed);

  RawAction act(const PolicyState& state, double max_range = 10.0) const;
  RawAction act_noisy(const PolicyState& state, double sigma,
                      std::mt19937_64& rng, double max_range = 10.0) const;

  struct Losses {
    double critic1 = 0.0;
    double critic2 = 0.0;
    double actor = 0.0;   // NaN when this call skipped the actor update
    bool actor_updated = false;
  };

  // One TD3 step: twin-critic regression to the min-Q smoothed target;
  // every policy_delay-th call also updates the actor and all targets.
  // actor_override forces the actor/target update on or off for this call
  // (used by the episode-level delay interpretation).
  Losses update(const ReplayBuffer& buffer, std::mt19937_64& rng,
                std::optional<bool> actor_override = std::nullopt);

  const Td3Config& config() const { return cfg_; }
  nn::ActorNet& actor() { return actor_; }
  const nn::ActorNet& actor() const { return actor_; }
  nn::CriticNet& critic1() { return critic1_; }
  nn::CriticNet& critic2() { return critic2_; }
  nn::CriticNet& critic1_target() { return critic1_target_; }
  nn::CriticNet& critic2_target() { return critic2_target_; }
  nn::ActorNet& actor_target() { return actor_target_; }

  void save_checkpoint(const std::string& path) const;
  static Td3Agent load_checkpoint(const std::string& path);

 private:
  Td3Config cfg_;
  nn::ActorNet actor_, actor_target_;
  nn::CriticNet critic1_, critic2_, critic1_target_, critic2_target_;
  nn::Adam opt_actor_, opt_critic1_, opt_critic2_;
  long update_calls_ = 0;
};

struct TrainConfig {
  Td3Config td3;
  SimConfig sim;
  RewardParams reward;
  int episodes = 800;
  int eval_interval = 50;   // episodes between eval sweeps (0 = off)
  int eval_episodes = 20;
  std::uint64_t seed = 1;
  std::string checkpoint_path;  // empty = no checkpoint
  std::string log_path;         // empty = no CSV log
};

struct TrainResult {
  double final_eval_success = 0.0;  // rate from the last eval sweep
  int episodes_run = 0;
};

enum class EpisodeOutcome { Goal, Collision, Timeout };

// One policy-only episode in the given world: waypoint fixed at the world
// goal. Returns the outcome; appends transitions when a sink is given.
EpisodeOutcome run_policy_episode(const WorldModel& world,
                                  const Td3Agent& agent, const SimConfig& sim,
                                  const RewardParams& rew,
                                  std::mt19937_64& rng, double explore_sigma,
                                  std::vector<Transition>* sink);

TrainResult train(const TrainConfig& cfg, Td3Agent& agent);

// Fraction of noise-free episodes reaching the goal on freshly generated
// training-distribution worlds.
double evaluate(const Td3Agent& agent, const SimConfig& sim,
                const RewardParams& rew, int episodes, std::uint64_t seed);

// Deterministic per-purpose RNG stream derived from (seed, stream, index).
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index);

}  // namespace gdex
