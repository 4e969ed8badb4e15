#include "gdex/policy.hpp"

#include <cstring>
#include <fstream>

namespace gdex {

nn::Vec PolicyState::to_input(double max_range) const {
  nn::Vec v(kStateDim);
  for (int i = 0; i < kLaserBins; ++i) v[i] = laser_bins[i] / max_range;
  v[kLaserBins] = waypoint_distance / max_range;
  v[kLaserBins + 1] = waypoint_bearing / kPi;
  return v;
}

std::array<double, kLaserBins> bag_scan(const LidarScan& scan) {
  const int beams = scan.beam_count();
  if (beams % kLaserBins != 0)
    throw BeamCountMismatch("beam count " + std::to_string(beams) +
                            " is not divisible by " +
                            std::to_string(kLaserBins));
  const int group = beams / kLaserBins;
  std::array<double, kLaserBins> bins{};
  for (int i = 0; i < kLaserBins; ++i) {
    double lo = scan.max_range;
    for (int j = 0; j < group; ++j) {
      const double r = scan.ranges[i * group + j];
      lo = std::min(lo, is_out_of_range(r) ? scan.max_range : r);
    }
    bins[i] = lo;
  }
  return bins;
}

Action scale_action(const RawAction& raw, const SimConfig& cfg) {
  return {cfg.v_max * (raw.a1 + 1.0) / 2.0, cfg.w_max * raw.a2};
}

double reward(double v, double w, bool collided, double goal_distance,
              const RewardParams& params) {
  if (goal_distance < params.reach_distance) return params.r_goal;
  if (collided) return params.r_collision;
  return v - std::abs(w);
}

void attribute_delayed_reward(std::vector<Transition>& episode,
                              const RewardParams& params, bool reached_goal) {
  if (!reached_goal || episode.empty()) return;
  const int t = static_cast<int>(episode.size()) - 1;
  const int n = std::min(params.delayed_steps, t);
  for (int i = 1; i <= n; ++i)
    episode[t - i].reward += params.r_goal / static_cast<double>(i);
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
}

std::vector<const Transition*> ReplayBuffer::sample(
    std::size_t batch, std::mt19937_64& rng) const {
  if (batch > storage_.size())
    throw BufferUnderfull("replay buffer smaller than requested batch");
  std::vector<const Transition*> out(batch);
  std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
  for (std::size_t i = 0; i < batch; ++i) out[i] = &storage_[pick(rng)];
  return out;
}

std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t index) {
  auto mix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return std::mt19937_64(mix(mix(mix(seed) + stream) + index));
}

Td3Agent::Td3Agent(const Td3Config& cfg, std::uint64_t init_seed)
    : cfg_(cfg),
      opt_actor_(cfg.lr_actor),
      opt_critic1_(cfg.lr_critic),
      opt_critic2_(cfg.lr_critic) {
  std::mt19937_64 rng = derive_rng(init_seed, 0, 0);
  actor_ = nn::ActorNet(kStateDim, cfg.hidden1, cfg.hidden2, rng);
  critic1_ = nn::CriticNet(kStateDim, kActionDim, cfg.hidden1, cfg.hidden2, rng);
  critic2_ = nn::CriticNet(kStateDim, kActionDim, cfg.hidden1, cfg.hidden2, rng);
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
}

RawAction Td3Agent::act(const PolicyState& state, double max_range) const {
  const nn::Vec a = actor_.forward_single(state.to_input(max_range));
  return {a[0], a[1]};
}

RawAction Td3Agent::act_noisy(const PolicyState& state, double sigma,
                              std::mt19937_64& rng, double max_range) const {
  RawAction a = act(state, max_range);
  std::normal_distribution<double> noise(0.0, sigma);
  constexpr double lim = 1.0 - 1e-9;
  a.a1 = std::clamp(a.a1 + noise(rng), -lim, lim);
  a.a2 = std::clamp(a.a2 + noise(rng), -lim, lim);
  return a;
}

Td3Agent::Losses Td3Agent::update(const ReplayBuffer& buffer,
                                  std::mt19937_64& rng,
                                  std::optional<bool> actor_override) {
  const std::size_t b = cfg_.batch_size;
  if (buffer.size() < b)
    throw BufferUnderfull("replay buffer smaller than batch size");
  const auto batch = buffer.sample(b, rng);

  nn::Mat S(b, kStateDim), S2(b, kStateDim), A(b, kActionDim);
  nn::Vec R(b), not_done(b);
  for (std::size_t i = 0; i < b; ++i) {
    S.row(i) = batch[i]->state.transpose();
    S2.row(i) = batch[i]->next_state.transpose();
    A(i, 0) = batch[i]->action.a1;
    A(i, 1) = batch[i]->action.a2;
    R[i] = batch[i]->reward;
    not_done[i] = batch[i]->done ? 0.0 : 1.0;
  }

  // Smoothed target actions.
  nn::Mat A2 = actor_target_.forward(S2);
  std::normal_distribution<double> noise(0.0, cfg_.smoothing_sigma);
  for (Eigen::Index i = 0; i < A2.size(); ++i) {
    const double eps =
        std::clamp(noise(rng), -cfg_.smoothing_clip, cfg_.smoothing_clip);
    A2.data()[i] = std::clamp(A2.data()[i] + eps, -1.0, 1.0);
  }

  const nn::Vec q1t = critic1_target_.forward(S2, A2);
  const nn::Vec q2t = critic2_target_.forward(S2, A2);
  const nn::Vec y =
      R.array() + cfg_.gamma * not_done.array() * q1t.cwiseMin(q2t).array();

  Losses losses;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (nn::CriticNet* critic : {&critic1_, &critic2_}) {
    const nn::Vec q = critic->forward(S, A);
    const nn::Vec err = q - y;
    const double mse = err.squaredNorm() * inv_b;
    (critic == &critic1_ ? losses.critic1 : losses.critic2) = mse;
    nn::ParamSet p = critic->params();
    p.zero_grads();
    critic->backward(S, A, 2.0 * inv_b * err);
  }
  {
    nn::ParamSet p1 = critic1_.params();
    opt_critic1_.step(p1);
    nn::ParamSet p2 = critic2_.params();
    opt_critic2_.step(p2);
  }

  ++update_calls_;
  losses.actor = std::numeric_limits<double>::quiet_NaN();
  const bool do_actor = actor_override
                            ? *actor_override
                            : update_calls_ % cfg_.policy_delay == 0;
  if (do_actor) {
    const nn::Mat a_pi = actor_.forward(S);
    losses.actor = -critic1_.forward(S, a_pi).mean();
    losses.actor_updated = true;
    const nn::Mat dq_da = critic1_.action_gradient(S, a_pi);
    nn::ParamSet ap = actor_.params();
    ap.zero_grads();
    actor_.backward(S, -dq_da);
    opt_actor_.step(ap);

    nn::soft_update(actor_target_.params(), actor_.params(), cfg_.rho);
    nn::soft_update(critic1_target_.params(), critic1_.params(), cfg_.rho);
    nn::soft_update(critic2_target_.params(), critic2_.params(), cfg_.rho);
  }
  return losses;
}

namespace {

PolicyState make_state(const LidarScan& scan, const RobotState& robot,
                       const Vec2& waypoint) {
  PolicyState s;
  s.laser_bins = bag_scan(scan);
  const Vec2 d = waypoint - robot.pose.position;
  s.waypoint_distance = d.norm();
  s.waypoint_bearing = wrap_angle(std::atan2(d.y(), d.x()) - robot.pose.heading);
  return s;
}

}  // namespace

EpisodeOutcome run_policy_episode(const WorldModel& world,
                                  const Td3Agent& agent, const SimConfig& sim,
                                  const RewardParams& rew,
                                  std::mt19937_64& rng, double explore_sigma,
                                  std::vector<Transition>* sink) {
  RobotState robot;
  robot.pose = world.start_pose;
  LidarScan scan = cast_lidar(world, robot, sim, rng);

  for (int t = 0; t < sim.max_episode_steps; ++t) {
    const PolicyState state = make_state(scan, robot, world.global_goal);
    const RawAction raw =
        explore_sigma > 0.0
            ? agent.act_noisy(state, explore_sigma, rng, sim.lidar_max_range)
            : agent.act(state, sim.lidar_max_range);
    const Action action = scale_action(raw, sim);
    robot = step(world, robot, action, sim);
    scan = cast_lidar(world, robot, sim, rng);

    const double goal_dist = (world.global_goal - robot.pose.position).norm();
    const bool reached = goal_dist < rew.reach_distance;
    const bool done = reached || robot.collided;
    if (sink) {
      const PolicyState next = make_state(scan, robot, world.global_goal);
      sink->push_back({state.to_input(sim.lidar_max_range),
                       next.to_input(sim.lidar_max_range), raw,
                       reward(action.v, action.w, robot.collided, goal_dist,
                              rew),
                       done});
    }
    if (reached) return EpisodeOutcome::Goal;
    if (robot.collided) return EpisodeOutcome::Collision;
  }
  return EpisodeOutcome::Timeout;
}

double evaluate(const Td3Agent& agent, const SimConfig& sim,
                const RewardParams& rew, int episodes, std::uint64_t seed) {
  SimConfig eval_sim = sim;
  eval_sim.sensor_noise_std = 0.0;
  int goals = 0;
  for (int i = 0; i < episodes; ++i) {
    std::mt19937_64 world_rng = derive_rng(seed, 11, i);
    const WorldModel world = generate_training_world(world_rng);
    std::mt19937_64 ep_rng = derive_rng(seed, 12, i);
    if (run_policy_episode(world, agent, eval_sim, rew, ep_rng, 0.0,
                           nullptr) == EpisodeOutcome::Goal)
      ++goals;
  }
  return static_cast<double>(goals) / episodes;
}

TrainResult train(const TrainConfig& cfg, Td3Agent& agent) {
  ReplayBuffer buffer(cfg.td3.buffer_capacity);
  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path);
    log << "episode,steps,return,outcome,eval_success\n";
  }

  std::mt19937_64 update_rng = derive_rng(cfg.seed, 3, 0);
  std::size_t total_steps = 0;
  double last_eval = 0.0;
  const double decay_span = 0.7 * cfg.episodes;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    std::mt19937_64 world_rng = derive_rng(cfg.seed, 1, ep);
    const WorldModel world = generate_training_world(world_rng);
    std::mt19937_64 ep_rng = derive_rng(cfg.seed, 2, ep);
    const double sigma =
        cfg.td3.explore_sigma_end +
        (cfg.td3.explore_sigma_start - cfg.td3.explore_sigma_end) *
            std::max(0.0, 1.0 - ep / decay_span);

    std::vector<Transition> episode;
    const EpisodeOutcome outcome = run_policy_episode(
        world, agent, cfg.sim, cfg.reward, ep_rng, sigma, &episode);
    attribute_delayed_reward(episode, cfg.reward,
                             outcome == EpisodeOutcome::Goal);

    double ep_return = 0.0;
    for (const Transition& t : episode) ep_return += t.reward;
    const std::size_t ep_steps = episode.size();
    for (Transition& t : episode) buffer.push(std::move(t));
    total_steps += ep_steps;

    // Rewards are mutable until episode finalization, so the per-step
    // updates for this episode run as a batch right after it.
    if (total_steps >= static_cast<std::size_t>(cfg.td3.warmup_steps) &&
        buffer.size() >= cfg.td3.batch_size) {
      const std::size_t updates = ep_steps * cfg.td3.updates_per_step;
      std::optional<bool> actor_override;
      if (cfg.td3.episode_level_delay)
        actor_override = (ep + 1) % cfg.td3.policy_delay == 0;
      for (std::size_t u = 0; u < updates; ++u)
        agent.update(buffer, update_rng, actor_override);
    }

    std::string eval_field;
    if (cfg.eval_interval > 0 && (ep + 1) % cfg.eval_interval == 0) {
      last_eval = evaluate(agent, cfg.sim, cfg.reward, cfg.eval_episodes,
                           cfg.seed + 1000 + ep);
      eval_field = std::to_string(last_eval);
    }
    if (log) {
      const char* name = outcome == EpisodeOutcome::Goal        ? "goal"
                         : outcome == EpisodeOutcome::Collision ? "collision"
                                                                : "timeout";
      log << ep << ',' << ep_steps << ',' << ep_return << ',' << name << ','
          << eval_field << std::endl;  // flushed so training can be tailed
    }
  }

  if (!cfg.checkpoint_path.empty()) agent.save_checkpoint(cfg.checkpoint_path);
  TrainResult result;
  result.episodes_run = cfg.episodes;
  result.final_eval_success = last_eval;
  return result;
}

// ---- checkpoint I/O -------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'G', 'D', 'E', 'X', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::istream& in) {
  double v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_params(std::ostream& out, nn::ParamSet p) {
  write_u32(out, static_cast<std::uint32_t>(p.values.size()));
  for (const nn::Mat* m : p.values) {
    write_u32(out, static_cast<std::uint32_t>(m->rows()));
    write_u32(out, static_cast<std::uint32_t>(m->cols()));
    out.write(reinterpret_cast<const char*>(m->data()),
              static_cast<std::streamsize>(m->size() * sizeof(double)));
  }
}

void read_params(std::istream& in, nn::ParamSet p) {
  const std::uint32_t count = read_u32(in);
  if (count != p.values.size())
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (nn::Mat* m : p.values) {
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    if (static_cast<Eigen::Index>(rows) != m->rows() ||
        static_cast<Eigen::Index>(cols) != m->cols())
      throw std::runtime_error("checkpoint parameter shape mismatch");
    in.read(reinterpret_cast<char*>(m->data()),
            static_cast<std::streamsize>(m->size() * sizeof(double)));
  }
}

}  // namespace

void Td3Agent::save_checkpoint(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(cfg_.hidden1));
  write_u32(out, static_cast<std::uint32_t>(cfg_.hidden2));
  write_f64(out, cfg_.gamma);
  write_f64(out, cfg_.rho);
  write_u32(out, static_cast<std::uint32_t>(cfg_.policy_delay));

  Td3Agent& self = const_cast<Td3Agent&>(*this);
  write_params(out, self.actor_.params());
  write_params(out, self.actor_target_.params());
  write_params(out, self.critic1_.params());
  write_params(out, self.critic2_.params());
  write_params(out, self.critic1_target_.params());
  write_params(out, self.critic2_target_.params());

  std::ofstream meta(path + ".meta");
  meta << "state_dim " << kStateDim << "\naction_dim " << kActionDim
       << "\nhidden1 " << cfg_.hidden1 << "\nhidden2 " << cfg_.hidden2
       << "\ngamma " << cfg_.gamma << "\nrho " << cfg_.rho
       << "\npolicy_delay " << cfg_.policy_delay << "\nlr_actor "
       << cfg_.lr_actor << "\nlr_critic " << cfg_.lr_critic << "\nbatch_size "
       << cfg_.batch_size << '\n';
}

Td3Agent Td3Agent::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  if (read_u32(in) != kVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path);

  Td3Config cfg;
  cfg.hidden1 = static_cast<int>(read_u32(in));
  cfg.hidden2 = static_cast<int>(read_u32(in));
  cfg.gamma = read_f64(in);
  cfg.rho = read_f64(in);
  cfg.policy_delay = static_cast<int>(read_u32(in));

  Td3Agent agent(cfg, 0);
  read_params(in, agent.actor_.params());
  read_params(in, agent.actor_target_.params());
  read_params(in, agent.critic1_.params());
  read_params(in, agent.critic2_.params());
  read_params(in, agent.critic1_target_.params());
  read_params(in, agent.critic2_target_.params());
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return agent;
}

}  // namespace gdex
