#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "gdex/harness.hpp"

namespace fs = std::filesystem;
using namespace gdex;

namespace {

int cmd_train(const std::string& config_path, const std::string& out_dir,
              long seed_override) {
  TrainConfig cfg = config_path.empty()
                        ? TrainConfig{}
                        : train_config_from_ini(IniFile::load(config_path));
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  fs::create_directories(out_dir);
  if (cfg.checkpoint_path.empty())
    cfg.checkpoint_path = (fs::path(out_dir) / "policy.ckpt").string();
  if (cfg.log_path.empty())
    cfg.log_path = (fs::path(out_dir) / "training_log.csv").string();

  Td3Agent agent(cfg.td3, cfg.seed);
  const TrainResult result = train(cfg, agent);
  std::cout << "trained " << result.episodes_run << " episodes, eval success "
            << result.final_eval_success << "\ncheckpoint: "
            << cfg.checkpoint_path << "\nlog: " << cfg.log_path << '\n';
  return 0;
}

int cmd_explore(const std::string& world_spec, const std::string& method,
                const std::string& checkpoint, std::uint64_t seed,
                const std::string& out_dir, int steps) {
  const WorldModel world = world_from_spec(world_spec);
  BenchmarkSpec spec;
  spec.step_budget = steps;
  std::optional<Td3Agent> agent;
  if (method == "gdae" || method == "gd_rl") {
    if (checkpoint.empty())
      throw MissingCheckpointError("--checkpoint required for " + method);
    agent = Td3Agent::load_checkpoint(checkpoint);
  }
  const RunRecord record =
      run_method(world, method, agent ? &*agent : nullptr, spec, seed);
  fs::create_directories(out_dir);
  export_run_artifacts(record, out_dir);
  std::cout << "outcome=" << outcome_name(record.outcome)
            << " distance_m=" << record.distance
            << " time_s=" << record.steps * spec.sim.timestep
            << " map_m2=" << known_area(record.grid) << "\nartifacts: "
            << out_dir << '\n';
  return 0;
}

int cmd_bench(const std::string& spec_path, const std::string& out_override) {
  BenchmarkSpec spec = BenchmarkSpec::load(spec_path);
  if (!out_override.empty()) spec.out_dir = out_override;
  const BenchmarkResult result = run_benchmark(spec);
  std::cout << "ran " << result.rows.size() << " runs\nmetrics: "
            << result.metrics_csv_path << "\naggregate: "
            << result.aggregate_csv_path << '\n';
  return 0;
}

int cmd_worldgen(const std::string& kind, std::uint64_t seed,
                 const std::string& out, int count) {
  fs::path out_path(out);
  for (int i = 0; i < count; ++i) {
    const WorldModel world =
        world_from_spec(kind + "@" + std::to_string(seed + i));
    fs::path target = out_path;
    if (count > 1) {
      fs::create_directories(out_path);
      target = out_path / (kind + "_" + std::to_string(seed + i) + ".world");
    }
    save_world(world, target.string());
    std::cout << target.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gdex: goal-driven exploration simulator, trainer, and benchmarks"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  long seed_flag = -1;

  auto* train_cmd = app.add_subcommand("train", "train the TD3 motion policy");
  train_cmd->add_option("--config", config_path, "training config (ini)");
  train_cmd->add_option("--out", out_dir, "output directory");
  train_cmd->add_option("--seed", seed_flag, "RNG seed override");

  std::string world_spec, method = "gdae", checkpoint;
  std::uint64_t seed = 0;
  int steps = 3000;
  auto* explore_cmd =
      app.add_subcommand("explore", "run one exploration episode");
  explore_cmd->add_option("--world", world_spec,
                          "world file or <kind>@<seed> generator spec")
      ->required();
  explore_cmd
      ->add_option("--method", method, "gdae | gd_rl | nf | lp_ae | pp")
      ->check(CLI::IsMember({"gdae", "gd_rl", "nf", "lp_ae", "pp"}));
  explore_cmd->add_option("--checkpoint", checkpoint, "trained policy");
  explore_cmd->add_option("--seed", seed, "RNG seed");
  explore_cmd->add_option("--out", out_dir, "artifact directory");
  explore_cmd->add_option("--steps", steps, "step budget");

  std::string spec_path, bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark sweep");
  bench_cmd->add_option("--spec", spec_path, "benchmark spec (ini)")
      ->required();
  bench_cmd->add_option("--out", bench_out, "output directory override");

  std::string run_dir, render_out = "overlay.ppm";
  auto* render_cmd =
      app.add_subcommand("render", "recompose an overlay image from a run");
  render_cmd->add_option("--run", run_dir, "run artifact directory")
      ->required();
  render_cmd->add_option("--out", render_out, "output image (ppm)");

  std::string kind = "training";
  int count = 1;
  auto* worldgen_cmd = app.add_subcommand("worldgen", "emit world files");
  worldgen_cmd
      ->add_option("--kind", kind, "training | u_trap | corridor | clutter")
      ->check(CLI::IsMember({"training", "u_trap", "corridor", "clutter"}));
  worldgen_cmd->add_option("--seed", seed, "generator seed");
  worldgen_cmd->add_option("--out", out_dir, "output file or directory")
      ->required();
  worldgen_cmd->add_option("--count", count, "number of worlds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(config_path, out_dir, seed_flag);
    if (*explore_cmd)
      return cmd_explore(world_spec, method, checkpoint, seed, out_dir, steps);
    if (*bench_cmd) return cmd_bench(spec_path, bench_out);
    if (*render_cmd) {
      render_run_dir(run_dir, render_out);
      std::cout << render_out << '\n';
      return 0;
    }
    if (*worldgen_cmd) return cmd_worldgen(kind, seed, out_dir, count);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
