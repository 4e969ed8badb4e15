#pragma once

#include <map>

#include "gdex/baselines.hpp"

namespace gdex {

// Flat "key = value" config text with [section] headers and '#' comments.
class IniFile {
 public:
  static IniFile load(const std::string& path);
  static IniFile parse(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  long get_long(const std::string& section, const std::string& key,
                long fallback) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

TrainConfig train_config_from_ini(const IniFile& ini);

// World spec: either a world-file path or "<kind>@<seed>" with kind one of
// training, u_trap, corridor, clutter.
WorldModel world_from_spec(const std::string& spec);

struct BenchmarkSpec {
  std::vector<std::string> methods;  // gdae, gd_rl, nf, lp_ae, pp
  std::vector<std::string> worlds;   // world specs
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "bench_out";
  std::string checkpoint;  // required when a learning method is listed
  int step_budget = 3000;
  SimConfig sim;
  IdleParams idle;
  PlannerParams planner;
  int workers = 0;  // 0 = hardware concurrency

  static BenchmarkSpec load(const std::string& path);
};

struct MissingCheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MetricsRow {
  std::string method;
  std::string world;
  std::uint64_t seed = 0;
  RunOutcome outcome = RunOutcome::Timeout;
  double distance = 0.0;
  double time_s = 0.0;
  double map_m2 = 0.0;
};

struct BenchmarkResult {
  std::vector<MetricsRow> rows;
  std::string metrics_csv_path;
  std::string aggregate_csv_path;
};

// Runs every (method, world, seed) triple over a bounded worker pool and
// writes metrics.csv, aggregate.csv, and per-run artifacts under out_dir.
// Per-run failures become outcomes; the sweep never aborts on them.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec);

// One run of a single method; used by `explore` and the benchmark sweep.
RunRecord run_method(const WorldModel& world, const std::string& method,
                     const Td3Agent* agent, const BenchmarkSpec& spec,
                     std::uint64_t seed);

std::string outcome_name(RunOutcome outcome);

// Map graymap + trajectory polyline + POI markers as a binary PPM.
void render_overlay(const RunRecord& record, const std::string& path);

// Writes trajectory.csv, poi.csv, map.pgm(+.hdr), overlay.ppm.
void export_run_artifacts(const RunRecord& record, const std::string& dir);

// Recompose overlay.ppm from previously exported run artifacts.
void render_run_dir(const std::string& run_dir, const std::string& out_path);

}  // namespace gdex
