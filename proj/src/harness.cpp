#include "gdex/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace gdex {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

IniFile IniFile::parse(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    ini.sections_[section][trim(line.substr(0, eq))] =
        trim(line.substr(eq + 1));
  }
  return ini;
}

IniFile IniFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  const std::string v = get(section, key, "");
  return v.empty() ? fallback : std::stod(v);
}

long IniFile::get_long(const std::string& section, const std::string& key,
                       long fallback) const {
  const std::string v = get(section, key, "");
  return v.empty() ? fallback : std::stol(v);
}

TrainConfig train_config_from_ini(const IniFile& ini) {
  TrainConfig cfg;
  cfg.episodes = static_cast<int>(ini.get_long("train", "episodes", 800));
  cfg.eval_interval =
      static_cast<int>(ini.get_long("train", "eval_interval", 50));
  cfg.eval_episodes =
      static_cast<int>(ini.get_long("train", "eval_episodes", 20));
  cfg.seed = static_cast<std::uint64_t>(ini.get_long("train", "seed", 1));
  cfg.checkpoint_path = ini.get("train", "checkpoint", "");
  cfg.log_path = ini.get("train", "log", "");

  Td3Config& td3 = cfg.td3;
  td3.hidden1 = static_cast<int>(ini.get_long("td3", "hidden1", td3.hidden1));
  td3.hidden2 = static_cast<int>(ini.get_long("td3", "hidden2", td3.hidden2));
  td3.gamma = ini.get_double("td3", "gamma", td3.gamma);
  td3.rho = ini.get_double("td3", "rho", td3.rho);
  td3.policy_delay =
      static_cast<int>(ini.get_long("td3", "policy_delay", td3.policy_delay));
  td3.lr_actor = ini.get_double("td3", "lr_actor", td3.lr_actor);
  td3.lr_critic = ini.get_double("td3", "lr_critic", td3.lr_critic);
  td3.batch_size = static_cast<std::size_t>(
      ini.get_long("td3", "batch_size", static_cast<long>(td3.batch_size)));
  td3.buffer_capacity = static_cast<std::size_t>(ini.get_long(
      "td3", "buffer_capacity", static_cast<long>(td3.buffer_capacity)));
  td3.explore_sigma_start =
      ini.get_double("td3", "explore_sigma_start", td3.explore_sigma_start);
  td3.explore_sigma_end =
      ini.get_double("td3", "explore_sigma_end", td3.explore_sigma_end);
  td3.smoothing_sigma =
      ini.get_double("td3", "smoothing_sigma", td3.smoothing_sigma);
  td3.smoothing_clip =
      ini.get_double("td3", "smoothing_clip", td3.smoothing_clip);
  td3.warmup_steps =
      static_cast<int>(ini.get_long("td3", "warmup_steps", td3.warmup_steps));
  td3.updates_per_step = static_cast<int>(
      ini.get_long("td3", "updates_per_step", td3.updates_per_step));
  td3.episode_level_delay =
      ini.get_long("td3", "episode_level_delay", 0) != 0;

  SimConfig& sim = cfg.sim;
  sim.v_max = ini.get_double("sim", "v_max", sim.v_max);
  sim.w_max = ini.get_double("sim", "w_max", sim.w_max);
  sim.timestep = ini.get_double("sim", "timestep", sim.timestep);
  sim.robot_radius = ini.get_double("sim", "robot_radius", sim.robot_radius);
  sim.sensor_noise_std =
      ini.get_double("sim", "sensor_noise_std", sim.sensor_noise_std);
  sim.max_episode_steps = static_cast<int>(
      ini.get_long("sim", "max_episode_steps", sim.max_episode_steps));
  sim.beam_count =
      static_cast<int>(ini.get_long("sim", "beam_count", sim.beam_count));

  RewardParams& rew = cfg.reward;
  rew.r_goal = ini.get_double("reward", "r_goal", rew.r_goal);
  rew.r_collision = ini.get_double("reward", "r_collision", rew.r_collision);
  rew.reach_distance =
      ini.get_double("reward", "reach_distance", rew.reach_distance);
  rew.delayed_steps = static_cast<int>(
      ini.get_long("reward", "delayed_steps", rew.delayed_steps));
  return cfg;
}

WorldModel world_from_spec(const std::string& spec) {
  const auto at = spec.find('@');
  if (at == std::string::npos) return load_world(spec);
  const std::string kind = spec.substr(0, at);
  const std::uint64_t seed = std::stoull(spec.substr(at + 1));
  std::mt19937_64 rng = derive_rng(seed, 41, 0);
  if (kind == "training") return generate_training_world(rng);
  return generate_trap_world(trap_kind_from_string(kind), rng);
}

BenchmarkSpec BenchmarkSpec::load(const std::string& path) {
  const IniFile ini = IniFile::load(path);
  BenchmarkSpec spec;
  spec.methods = split_list(ini.get("bench", "methods", ""));
  spec.worlds = split_list(ini.get("bench", "worlds", ""));
  for (const std::string& s : split_list(ini.get("bench", "seeds", "")))
    spec.seeds.push_back(std::stoull(s));
  spec.out_dir = ini.get("bench", "out", spec.out_dir);
  spec.checkpoint = ini.get("bench", "checkpoint", "");
  spec.step_budget =
      static_cast<int>(ini.get_long("bench", "step_budget", spec.step_budget));
  spec.workers = static_cast<int>(ini.get_long("bench", "workers", 0));
  spec.sim.sensor_noise_std =
      ini.get_double("sim", "sensor_noise_std", spec.sim.sensor_noise_std);
  if (spec.methods.empty() || spec.worlds.empty() || spec.seeds.empty())
    throw std::runtime_error(
        "bench spec needs non-empty methods, worlds, and seeds");
  return spec;
}

std::string outcome_name(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::Goal: return "goal";
    case RunOutcome::Collision: return "collision";
    case RunOutcome::Timeout: return "timeout";
  }
  return "?";
}

RunRecord run_method(const WorldModel& world, const std::string& method,
                     const Td3Agent* agent, const BenchmarkSpec& spec,
                     std::uint64_t seed) {
  if (method == "gdae" || method == "gd_rl") {
    if (!agent)
      throw MissingCheckpointError("method " + method +
                                   " needs a trained checkpoint");
    ExplorerConfig cfg;
    cfg.mode = method == "gdae" ? ExplorerMode::GDAE : ExplorerMode::GD_RL;
    cfg.params = spec.idle;
    cfg.sim = spec.sim;
    cfg.step_budget = spec.step_budget;
    cfg.agent = agent;
    cfg.seed = seed;
    return run_episode(world, cfg);
  }
  BaselineConfig cfg;
  cfg.method = baseline_from_string(method);
  cfg.sim = spec.sim;
  cfg.idle = spec.idle;
  cfg.planner = spec.planner;
  cfg.step_budget = spec.step_budget;
  cfg.seed = seed;
  return run_baseline(world, cfg);
}

namespace {

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
  return out;
}

std::string fixed6(double v) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << v;
  return out.str();
}

struct Aggregate {
  int runs = 0;
  int goals = 0;
  std::vector<double> dist, time;
  double map_sum = 0.0;
};

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkSpec& spec) {
  const bool needs_agent =
      std::any_of(spec.methods.begin(), spec.methods.end(),
                  [](const std::string& m) { return m == "gdae" || m == "gd_rl"; });
  std::optional<Td3Agent> agent;
  if (needs_agent) {
    if (spec.checkpoint.empty() || !fs::exists(spec.checkpoint))
      throw MissingCheckpointError("checkpoint not found: " + spec.checkpoint);
    agent = Td3Agent::load_checkpoint(spec.checkpoint);
  }

  struct Triple {
    std::string method, world_spec;
    std::uint64_t seed;
  };
  std::vector<Triple> triples;
  for (const std::string& m : spec.methods)
    for (const std::string& w : spec.worlds)
      for (std::uint64_t s : spec.seeds) triples.push_back({m, w, s});

  fs::create_directories(spec.out_dir);
  fs::create_directories(fs::path(spec.out_dir) / "runs");

  std::vector<MetricsRow> rows(triples.size());
  std::atomic<std::size_t> next{0};
  const unsigned pool =
      spec.workers > 0
          ? static_cast<unsigned>(spec.workers)
          : std::max(1u, std::thread::hardware_concurrency());

  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < triples.size();
         i = next.fetch_add(1)) {
      const Triple& t = triples[i];
      const WorldModel world = world_from_spec(t.world_spec);
      const RunRecord record =
          run_method(world, t.method, agent ? &*agent : nullptr, spec, t.seed);
      rows[i] = {t.method,
                 t.world_spec,
                 t.seed,
                 record.outcome,
                 record.distance,
                 record.steps * spec.sim.timestep,
                 known_area(record.grid)};
      const fs::path dir = fs::path(spec.out_dir) / "runs" /
                           (sanitize(t.method) + "_" + sanitize(t.world_spec) +
                            "_s" + std::to_string(t.seed));
      export_run_artifacts(record, dir.string());
    }
  };
  std::vector<std::thread> threads;
  for (unsigned i = 1; i < std::min<std::size_t>(pool, triples.size()); ++i)
    threads.emplace_back(worker);
  worker();
  for (std::thread& th : threads) th.join();

  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a,
                                         const MetricsRow& b) {
    return std::tie(a.method, a.world, a.seed) <
           std::tie(b.method, b.world, b.seed);
  });

  BenchmarkResult result;
  result.rows = rows;
  result.metrics_csv_path =
      (fs::path(spec.out_dir) / "metrics.csv").string();
  result.aggregate_csv_path =
      (fs::path(spec.out_dir) / "aggregate.csv").string();

  std::ofstream metrics(result.metrics_csv_path);
  metrics << "method,world,seed,outcome,distance_m,time_s,map_m2\n";
  std::map<std::pair<std::string, std::string>, Aggregate> aggs;
  for (const MetricsRow& r : rows) {
    metrics << r.method << ',' << r.world << ',' << r.seed << ','
            << outcome_name(r.outcome) << ',' << fixed6(r.distance) << ','
            << fixed6(r.time_s) << ',' << fixed6(r.map_m2) << '\n';
    Aggregate& a = aggs[{r.method, r.world}];
    ++a.runs;
    if (r.outcome == RunOutcome::Goal) {
      ++a.goals;
      a.dist.push_back(r.distance);
      a.time.push_back(r.time_s);
      a.map_sum += r.map_m2;
    }
  }

  auto stats = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= xs.size();  // population standard deviation
    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    return std::array<double, 4>{mean, lo, hi, std::sqrt(var)};
  };

  std::ofstream agg(result.aggregate_csv_path);
  agg << "method,world,av_dist_m,min_dist_m,max_dist_m,std_dist_m,"
         "av_time_s,min_time_s,max_time_s,std_time_s,av_map_m2,goals\n";
  for (const auto& [key, a] : aggs) {
    agg << key.first << ',' << key.second << ',';
    if (a.goals == 0) {
      agg << ",,,,,,,,,";  // no successful runs: aggregate fields absent
    } else {
      const auto d = stats(a.dist);
      const auto t = stats(a.time);
      agg << fixed6(d[0]) << ',' << fixed6(d[1]) << ',' << fixed6(d[2]) << ','
          << fixed6(d[3]) << ',' << fixed6(t[0]) << ',' << fixed6(t[1]) << ','
          << fixed6(t[2]) << ',' << fixed6(t[3]) << ','
          << fixed6(a.map_sum / a.goals) << ',';
    }
    agg << a.goals << '/' << a.runs << '\n';
  }
  return result;
}

// ---- rendering -------------------------------------------------------------

namespace {

struct Image {
  int w = 0, h = 0;
  std::vector<std::array<unsigned char, 3>> px;

  Image(int w_, int h_) : w(w_), h(h_), px(static_cast<std::size_t>(w_) * h_) {}

  void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    px[static_cast<std::size_t>(y) * w + x] = {r, g, b};
  }

  // Integer line traversal between pixel coordinates.
  void line(int x0, int y0, int x1, int y1, unsigned char r, unsigned char g,
            unsigned char b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void disc(int cx, int cy, int rad, unsigned char r, unsigned char g,
            unsigned char b) {
    for (int dy = -rad; dy <= rad; ++dy)
      for (int dx = -rad; dx <= rad; ++dx)
        if (dx * dx + dy * dy <= rad * rad) set(cx + dx, cy + dy, r, g, b);
  }

  void write_ppm(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write image: " + path);
    out << "P6\n" << w << ' ' << h << "\n255\n";
    for (const auto& p : px)
      out.write(reinterpret_cast<const char*>(p.data()), 3);
  }
};

struct PixelMapper {
  const OccupancyGrid* grid;
  int img_h;
  std::pair<int, int> operator()(const Vec2& p) const {
    const auto [cx, cy] = grid->cell_of(p);
    return {cx, img_h - 1 - cy};  // image row 0 = max y
  }
};

Image compose(const OccupancyGrid& grid, const std::vector<Pose>& trace,
              const std::vector<PoiCandidate>& pois) {
  Image img(grid.width(), grid.height());
  for (int cy = 0; cy < grid.height(); ++cy) {
    for (int cx = 0; cx < grid.width(); ++cx) {
      const Cell c = grid.at(cx, cy);
      const unsigned char v = c == Cell::Occupied ? 0
                              : c == Cell::Free   ? 255
                                                  : 127;
      img.set(cx, grid.height() - 1 - cy, v, v, v);
    }
  }
  const PixelMapper to_px{&grid, grid.height()};
  for (const PoiCandidate& c : pois) {
    const auto [x, y] = to_px(c.position);
    if (c.status == PoiStatus::Active)
      img.disc(x, y, 2, 40, 90, 230);  // blue, matching the POI marker style
    else
      img.disc(x, y, 1, 150, 150, 220);
  }
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto [x0, y0] = to_px(trace[i - 1].position);
    const auto [x1, y1] = to_px(trace[i].position);
    img.line(x0, y0, x1, y1, 30, 160, 60);  // green path
  }
  if (!trace.empty()) {
    const auto [x, y] = to_px(trace.front().position);
    img.disc(x, y, 3, 220, 60, 60);
  }
  return img;
}

}  // namespace

void render_overlay(const RunRecord& record, const std::string& path) {
  compose(record.grid, record.trace, record.final_candidates).write_ppm(path);
}

void export_run_artifacts(const RunRecord& record, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path base(dir);
  export_trajectory(record, (base / "trajectory.csv").string());
  export_poi_trace(record, (base / "poi.csv").string());
  export_graymap(record.grid, (base / "map.pgm").string());
  render_overlay(record, (base / "overlay.ppm").string());
}

namespace {

OccupancyGrid read_graymap(const std::string& path) {
  std::ifstream hdr(path + ".hdr");
  if (!hdr) throw std::runtime_error("missing graymap header: " + path + ".hdr");
  double resolution = 0.1, ox = 0.0, oy = 0.0;
  int w = 0, h = 0;
  std::string key;
  while (hdr >> key) {
    if (key == "resolution") hdr >> resolution;
    else if (key == "origin") hdr >> ox >> oy;
    else if (key == "width") hdr >> w;
    else if (key == "height") hdr >> h;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graymap: " + path);
  std::string magic;
  int pw, ph, maxval;
  in >> magic >> pw >> ph >> maxval;
  in.get();  // single whitespace after header
  if (magic != "P5" || pw != w || ph != h)
    throw std::runtime_error("graymap header mismatch: " + path);
  OccupancyGrid grid(resolution, {ox, oy}, w, h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const int v = in.get();
      const int cy = h - 1 - row;
      if (v == 0) grid.mark_occupied(col, cy);
      else if (v == 255) grid.mark_free(col, cy);
    }
  }
  return grid;
}

}  // namespace

void render_run_dir(const std::string& run_dir, const std::string& out_path) {
  const fs::path base(run_dir);
  RunRecord record;
  record.grid = read_graymap((base / "map.pgm").string());

  std::ifstream traj((base / "trajectory.csv").string());
  if (!traj)
    throw std::runtime_error("missing trajectory.csv in " + run_dir);
  std::string line;
  std::getline(traj, line);  // header
  while (std::getline(traj, line)) {
    std::istringstream ls(line);
    std::string field;
    Pose p;
    std::getline(ls, field, ',');
    std::getline(ls, field, ',');
    p.position.x() = std::stod(field);
    std::getline(ls, field, ',');
    p.position.y() = std::stod(field);
    std::getline(ls, field, ',');
    p.heading = std::stod(field);
    record.trace.push_back(p);
  }

  std::ifstream poi((base / "poi.csv").string());
  if (poi) {
    std::getline(poi, line);
    while (std::getline(poi, line)) {
      std::istringstream ls(line);
      std::string field;
      PoiCandidate c;
      std::getline(ls, field, ',');
      std::getline(ls, field, ',');
      c.position.x() = std::stod(field);
      std::getline(ls, field, ',');
      c.position.y() = std::stod(field);
      std::getline(ls, field, ',');
      c.source = field == "gap" ? PoiSource::Gap : PoiSource::OutOfRange;
      std::getline(ls, field, ',');
      c.status = field == "active" ? PoiStatus::Active : PoiStatus::Deleted;
      record.final_candidates.push_back(c);
    }
  }
  render_overlay(record, out_path);
}

}  // namespace gdex
