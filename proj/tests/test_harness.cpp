#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <tuple>

#include "gdex/harness.hpp"

using namespace gdex;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("ini parsing") {
  const IniFile ini = IniFile::parse(
      "# comment\n"
      "[train]\n"
      "episodes = 12\n"
      "seed=5\n"
      "\n"
      "[td3]\n"
      "gamma = 0.9  # trailing comment\n"
      "hidden1 = 32\n");

  CHECK(ini.has("train", "episodes"));
  CHECK(!ini.has("train", "gamma"));
  CHECK(ini.get_long("train", "episodes", 0) == 12);
  CHECK(ini.get_long("train", "seed", 0) == 5);
  CHECK(ini.get_double("td3", "gamma", 0.0) == doctest::Approx(0.9));
  CHECK(ini.get_long("td3", "hidden1", 0) == 32);
  CHECK(ini.get("td3", "missing", "dflt") == "dflt");
  CHECK(ini.get_double("nope", "nothing", 1.5) == 1.5);
}

TEST_CASE("train config from ini overrides defaults only when present") {
  const IniFile ini = IniFile::parse(
      "[train]\nepisodes = 40\nseed = 9\n"
      "[td3]\nhidden1 = 64\nhidden2 = 48\nbatch_size = 16\n"
      "[sim]\nmax_episode_steps = 120\n"
      "[reward]\nr_goal = 50\n");
  const TrainConfig cfg = train_config_from_ini(ini);
  CHECK(cfg.episodes == 40);
  CHECK(cfg.seed == 9);
  CHECK(cfg.td3.hidden1 == 64);
  CHECK(cfg.td3.hidden2 == 48);
  CHECK(cfg.td3.batch_size == 16);
  CHECK(cfg.sim.max_episode_steps == 120);
  CHECK(cfg.reward.r_goal == 50.0);
  // untouched defaults survive
  CHECK(cfg.td3.gamma == doctest::Approx(0.99));
  CHECK(cfg.sim.v_max == doctest::Approx(0.5));
}

TEST_CASE("world specs resolve generators and files") {
  SUBCASE("generator specs are deterministic per seed") {
    const WorldModel a = world_from_spec("u_trap@42");
    const WorldModel b = world_from_spec("u_trap@42");
    const WorldModel c = world_from_spec("u_trap@43");
    CHECK(a.start_pose.position == b.start_pose.position);
    CHECK(a.global_goal == b.global_goal);
    CHECK(a.obstacles.size() == b.obstacles.size());
    CHECK((a.global_goal != c.global_goal ||
           a.start_pose.position != c.start_pose.position));
  }

  SUBCASE("all generator kinds work") {
    for (const char* kind : {"training", "u_trap", "corridor", "clutter"}) {
      const WorldModel w = world_from_spec(std::string(kind) + "@7");
      CHECK(!w.obstacles.empty());
    }
  }

  SUBCASE("file path round trip") {
    TempDir dir("gdex_world_spec_test");
    const WorldModel w = world_from_spec("clutter@3");
    const std::string path = (dir.path / "w.world").string();
    save_world(w, path);
    const WorldModel loaded = world_from_spec(path);
    CHECK(loaded.global_goal == w.global_goal);
    CHECK(loaded.obstacles.size() == w.obstacles.size());
  }

  SUBCASE("unknown generator kind throws") {
    CHECK_THROWS(world_from_spec("moebius@1"));
  }
}

TEST_CASE("benchmark sweep over baseline methods") {
  TempDir dir("gdex_bench_test");
  BenchmarkSpec spec;
  spec.methods = {"pp", "nf"};
  spec.worlds = {"training@5", "training@6"};
  spec.seeds = {1, 2};
  spec.out_dir = (dir.path / "out").string();
  spec.step_budget = 3000;
  spec.workers = 2;

  const BenchmarkResult result = run_benchmark(spec);
  CHECK(result.rows.size() == 8);

  SUBCASE("rows are sorted by method, world, seed") {
    for (std::size_t i = 1; i < result.rows.size(); ++i) {
      const auto key = [](const MetricsRow& r) {
        return std::make_tuple(r.method, r.world, r.seed);
      };
      CHECK(key(result.rows[i - 1]) <= key(result.rows[i]));
    }
  }

  SUBCASE("metrics csv has the documented schema") {
    const std::string csv = slurp(result.metrics_csv_path);
    CHECK(csv.rfind("method,world,seed,outcome,distance_m,time_s,map_m2\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  }

  SUBCASE("aggregate csv exists with the summary schema") {
    const std::string csv = slurp(result.aggregate_csv_path);
    CHECK(csv.rfind("method,world,", 0) == 0);
    CHECK(csv.find("goals") != std::string::npos);
  }

  SUBCASE("rerunning the sweep reproduces byte-identical csv outputs") {
    const std::string first = slurp(result.metrics_csv_path);
    const std::string first_agg = slurp(result.aggregate_csv_path);
    BenchmarkSpec again = spec;
    again.out_dir = (dir.path / "out2").string();
    again.workers = 4;  // a different pool must not change results
    const BenchmarkResult r2 = run_benchmark(again);
    CHECK(slurp(r2.metrics_csv_path) == first);
    CHECK(slurp(r2.aggregate_csv_path) == first_agg);
  }

  SUBCASE("per-run artifacts exist") {
    bool found_traj = false, found_overlay = false;
    for (const auto& entry : fs::recursive_directory_iterator(spec.out_dir)) {
      if (entry.path().filename() == "trajectory.csv") found_traj = true;
      if (entry.path().filename() == "overlay.ppm") found_overlay = true;
    }
    CHECK(found_traj);
    CHECK(found_overlay);
  }
}

TEST_CASE("learning methods demand a checkpoint") {
  BenchmarkSpec spec;
  spec.methods = {"gdae"};
  spec.worlds = {"training@5"};
  spec.seeds = {1};
  spec.checkpoint = "";
  CHECK_THROWS_AS(run_benchmark(spec), MissingCheckpointError);
}

TEST_CASE("outcome names") {
  CHECK(outcome_name(RunOutcome::Goal) == "goal");
  CHECK(outcome_name(RunOutcome::Collision) == "collision");
  CHECK(outcome_name(RunOutcome::Timeout) == "timeout");
}

TEST_CASE("benchmark spec loads from ini") {
  TempDir dir("gdex_spec_load_test");
  const std::string path = (dir.path / "bench.ini").string();
  {
    std::ofstream out(path);
    out << "[bench]\n"
           "methods = pp, nf\n"
           "worlds = training@1, u_trap@2\n"
           "seeds = 3, 4, 5\n"
           "step_budget = 1200\n"
           "workers = 3\n";
  }
  const BenchmarkSpec spec = BenchmarkSpec::load(path);
  CHECK(spec.methods == std::vector<std::string>{"pp", "nf"});
  CHECK(spec.worlds == std::vector<std::string>{"training@1", "u_trap@2"});
  CHECK(spec.seeds == std::vector<std::uint64_t>{3, 4, 5});
  CHECK(spec.step_budget == 1200);
  CHECK(spec.workers == 3);
}

TEST_CASE("render pipeline recomposes an overlay from artifacts") {
  TempDir dir("gdex_render_test");
  const WorldModel world = world_from_spec("training@9");
  BenchmarkSpec spec;
  spec.step_budget = 2000;
  const RunRecord rec = run_method(world, "pp", nullptr, spec, 4);
  export_run_artifacts(rec, dir.path.string());

  const std::string out = (dir.path / "replot.ppm").string();
  render_run_dir(dir.path.string(), out);
  const std::string ppm = slurp(out);
  CHECK(ppm.rfind("P6", 0) == 0);
  CHECK(ppm.size() > 100);
}
