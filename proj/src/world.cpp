#include "gdex/world.hpp"

#include <fstream>
#include <queue>
#include <sstream>

namespace gdex {

std::vector<Segment> WorldModel::all_segments() const {
  std::vector<Segment> segs = box_edges(bounds);
  for (const Obstacle& obs : obstacles) {
    std::vector<Segment> edges = std::holds_alternative<Box>(obs)
                                     ? box_edges(std::get<Box>(obs))
                                     : polygon_edges(std::get<ConvexPolygon>(obs));
    segs.insert(segs.end(), edges.begin(), edges.end());
  }
  return segs;
}

bool WorldModel::disk_collides(const Vec2& p, double radius) const {
  const Vec2 lo = bounds.min();
  const Vec2 hi = bounds.max();
  if (p.x() - radius < lo.x() || p.x() + radius > hi.x() ||
      p.y() - radius < lo.y() || p.y() + radius > hi.y())
    return true;
  for (const Obstacle& obs : obstacles) {
    if (std::holds_alternative<Box>(obs)) {
      const Box& b = std::get<Box>(obs);
      if (b.contains(p)) return true;
      for (const Segment& e : box_edges(b))
        if (point_segment_distance(p, e) < radius) return true;
    } else {
      const ConvexPolygon& poly = std::get<ConvexPolygon>(obs);
      if (poly.contains(p)) return true;
      for (const Segment& e : polygon_edges(poly))
        if (point_segment_distance(p, e) < radius) return true;
    }
  }
  return false;
}

namespace {

constexpr double kRasterResolution = 0.1;
constexpr double kClearance = 0.3;  // sampling clearance for poses
constexpr int kMaxAttempts = 1000;

// Flood-fill reachability on a rasterized world, treating a cell as blocked
// when a robot disk at its center would collide.
bool start_goal_connected(const WorldModel& world, double radius) {
  const Vec2 lo = world.bounds.min();
  const Vec2 hi = world.bounds.max();
  const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / kRasterResolution));
  const int ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / kRasterResolution));
  auto cell_of = [&](const Vec2& p) {
    int cx = std::clamp(static_cast<int>((p.x() - lo.x()) / kRasterResolution), 0, nx - 1);
    int cy = std::clamp(static_cast<int>((p.y() - lo.y()) / kRasterResolution), 0, ny - 1);
    return std::pair<int, int>{cx, cy};
  };
  auto center_of = [&](int cx, int cy) {
    return Vec2{lo.x() + (cx + 0.5) * kRasterResolution,
                lo.y() + (cy + 0.5) * kRasterResolution};
  };

  std::vector<char> blocked(static_cast<size_t>(nx) * ny);
  for (int cy = 0; cy < ny; ++cy)
    for (int cx = 0; cx < nx; ++cx)
      blocked[static_cast<size_t>(cy) * nx + cx] =
          world.disk_collides(center_of(cx, cy), radius) ? 1 : 0;

  const auto [sx, sy] = cell_of(world.start_pose.position);
  const auto [gx, gy] = cell_of(world.global_goal);
  if (blocked[static_cast<size_t>(sy) * nx + sx] ||
      blocked[static_cast<size_t>(gy) * nx + gx])
    return false;

  std::vector<char> seen(blocked.size(), 0);
  std::queue<std::pair<int, int>> frontier;
  frontier.push({sx, sy});
  seen[static_cast<size_t>(sy) * nx + sx] = 1;
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  while (!frontier.empty()) {
    auto [cx, cy] = frontier.front();
    frontier.pop();
    if (cx == gx && cy == gy) return true;
    for (int k = 0; k < 4; ++k) {
      const int mx = cx + dx[k];
      const int my = cy + dy[k];
      if (mx < 0 || my < 0 || mx >= nx || my >= ny) continue;
      const size_t idx = static_cast<size_t>(my) * nx + mx;
      if (seen[idx] || blocked[idx]) continue;
      seen[idx] = 1;
      frontier.push({mx, my});
    }
  }
  return false;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec2 sample_free_point(const WorldModel& world, std::mt19937_64& rng,
                       double clearance) {
  const Vec2 lo = world.bounds.min();
  const Vec2 hi = world.bounds.max();
  for (int i = 0; i < kMaxAttempts; ++i) {
    Vec2 p{uniform(rng, lo.x() + clearance, hi.x() - clearance),
           uniform(rng, lo.y() + clearance, hi.y() - clearance)};
    if (!world.disk_collides(p, clearance)) return p;
  }
  throw WorldGenError("could not sample a collision-free point");
}

Box thin_wall(const Vec2& a, const Vec2& b, double half_thickness) {
  // Axis-aligned wall between two axis-aligned points.
  Vec2 center = 0.5 * (a + b);
  Vec2 half{0.5 * std::abs(b.x() - a.x()) + half_thickness,
            0.5 * std::abs(b.y() - a.y()) + half_thickness};
  return Box{center, half};
}

}  // namespace

WorldModel generate_training_world(std::mt19937_64& rng) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    WorldModel world;
    world.bounds = Box{{0.0, 0.0}, {5.0, 5.0}};
    for (int i = 0; i < 4; ++i) {
      const double hx = uniform(rng, 0.4, 0.8);
      const double hy = uniform(rng, 0.4, 0.8);
      const Vec2 c{uniform(rng, -4.0 + hx, 4.0 - hx),
                   uniform(rng, -4.0 + hy, 4.0 - hy)};
      world.obstacles.push_back(Box{c, {hx, hy}});
    }
    try {
      world.start_pose.position = sample_free_point(world, rng, kClearance);
      world.start_pose.heading = uniform(rng, -kPi, kPi);
      world.global_goal = sample_free_point(world, rng, kClearance);
    } catch (const WorldGenError&) {
      continue;
    }
    if ((world.global_goal - world.start_pose.position).norm() < 1.0) continue;
    if (!start_goal_connected(world, 0.25)) continue;
    return world;
  }
  throw WorldGenError("training world generation exhausted attempts");
}

namespace {

WorldModel make_u_trap(std::mt19937_64& rng) {
  // The U encloses the start with its mouth facing away from the goal, and
  // the goal sits beyond the waypoint layer's goal-switch distance, so
  // escaping demands the POI machinery rather than greedy goal-seeking.
  WorldModel world;
  world.bounds = Box{{0.0, 0.0}, {8.0, 8.0}};
  const double depth = uniform(rng, 5.8, 6.4);
  const double halfwidth = uniform(rng, 2.8, 3.2);
  const double xb = uniform(rng, -0.3, 0.3);  // back wall, start side of goal
  const double xa = xb - depth;               // open mouth, faces -x
  const double yc = uniform(rng, -0.8, 0.8);
  const double t = 0.1;  // wall half thickness

  world.obstacles.push_back(
      thin_wall({xa, yc + halfwidth}, {xb, yc + halfwidth}, t));
  world.obstacles.push_back(
      thin_wall({xa, yc - halfwidth}, {xb, yc - halfwidth}, t));
  world.obstacles.push_back(
      thin_wall({xb, yc - halfwidth}, {xb, yc + halfwidth}, t));

  world.start_pose.position = {xa + uniform(rng, 1.8, 2.2),
                               yc + uniform(rng, -0.2, 0.2)};
  world.global_goal = {xb + uniform(rng, 6.6, 7.0),
                       yc + uniform(rng, -0.2, 0.2)};
  const Vec2 to_goal = world.global_goal - world.start_pose.position;
  world.start_pose.heading = std::atan2(to_goal.y(), to_goal.x());
  return world;
}

WorldModel make_corridor(std::mt19937_64& rng) {
  WorldModel world;
  world.bounds = Box{{0.0, 0.0}, {5.0, 5.0}};
  const double length = uniform(rng, 2.5, 3.2);
  const double halfwidth = uniform(rng, 0.9, 1.2);
  const double x0 = uniform(rng, -3.0, 0.0);
  const double yc = uniform(rng, -1.5, 1.5);
  const double t = 0.1;

  // Dead-end corridor open toward -x; cap sits between robot and goal.
  world.obstacles.push_back(
      thin_wall({x0, yc + halfwidth}, {x0 + length, yc + halfwidth}, t));
  world.obstacles.push_back(
      thin_wall({x0, yc - halfwidth}, {x0 + length, yc - halfwidth}, t));
  world.obstacles.push_back(
      thin_wall({x0 + length, yc - halfwidth}, {x0 + length, yc + halfwidth}, t));

  world.start_pose.position = {x0 + 0.5, yc};
  world.start_pose.heading = 0.0;  // facing the dead end
  world.global_goal = {x0 + length + 1.3, yc + uniform(rng, -0.3, 0.3)};
  return world;
}

bool segment_blocked(const WorldModel& world, const Vec2& a, const Vec2& b,
                     double radius) {
  const int samples = static_cast<int>((b - a).norm() / 0.05) + 2;
  for (int i = 0; i <= samples; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / samples);
    if (world.disk_collides(p, radius)) return true;
  }
  return false;
}

WorldModel make_clutter(std::mt19937_64& rng) {
  WorldModel world;
  world.bounds = Box{{0.0, 0.0}, {5.0, 5.0}};
  world.start_pose.position = {uniform(rng, -4.2, -3.6), uniform(rng, -1.0, 1.0)};
  world.global_goal = {uniform(rng, 3.6, 4.2), uniform(rng, -1.0, 1.0)};
  const Vec2 to_goal = world.global_goal - world.start_pose.position;
  world.start_pose.heading = std::atan2(to_goal.y(), to_goal.x());

  const int boxes = 14;
  for (int i = 0; i < boxes; ++i) {
    for (int tries = 0; tries < kMaxAttempts; ++tries) {
      const double hx = uniform(rng, 0.25, 0.45);
      const double hy = uniform(rng, 0.25, 0.45);
      const Vec2 c{uniform(rng, -2.8, 2.8), uniform(rng, -3.5, 3.5)};
      const Box candidate{c, {hx, hy}};
      if ((c - world.start_pose.position).norm() < 1.2) continue;
      if ((c - world.global_goal).norm() < 1.2) continue;
      world.obstacles.push_back(candidate);
      break;
    }
  }
  return world;
}

}  // namespace

WorldModel generate_trap_world(TrapKind kind, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    WorldModel world;
    switch (kind) {
      case TrapKind::UTrap: world = make_u_trap(rng); break;
      case TrapKind::Corridor: world = make_corridor(rng); break;
      case TrapKind::Clutter: world = make_clutter(rng); break;
    }
    if (world.disk_collides(world.start_pose.position, 0.25)) continue;
    if (world.disk_collides(world.global_goal, 0.25)) continue;
    if (!segment_blocked(world, world.start_pose.position, world.global_goal,
                         0.2))
      continue;
    if (!start_goal_connected(world, 0.25)) continue;
    return world;
  }
  throw WorldGenError("trap world generation exhausted attempts");
}

TrapKind trap_kind_from_string(const std::string& name) {
  if (name == "u_trap") return TrapKind::UTrap;
  if (name == "corridor") return TrapKind::Corridor;
  if (name == "clutter") return TrapKind::Clutter;
  throw std::invalid_argument("unknown trap kind: " + name);
}

WorldModel parse_world(const std::string& text) {
  WorldModel world;
  bool have_bounds = false, have_start = false, have_goal = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    auto fail = [&](const std::string& msg) {
      throw std::runtime_error("world file line " + std::to_string(line_no) +
                               ": " + msg);
    };
    if (tag == "bounds") {
      double x0, y0, x1, y1;
      if (!(ls >> x0 >> y0 >> x1 >> y1)) fail("bounds needs 4 numbers");
      if (x1 <= x0 || y1 <= y0) fail("degenerate bounds");
      world.bounds = Box{{0.5 * (x0 + x1), 0.5 * (y0 + y1)},
                         {0.5 * (x1 - x0), 0.5 * (y1 - y0)}};
      have_bounds = true;
    } else if (tag == "start") {
      double x, y, h;
      if (!(ls >> x >> y >> h)) fail("start needs 3 numbers");
      world.start_pose = Pose{{x, y}, wrap_angle(h)};
      have_start = true;
    } else if (tag == "goal") {
      double x, y;
      if (!(ls >> x >> y)) fail("goal needs 2 numbers");
      world.global_goal = {x, y};
      have_goal = true;
    } else if (tag == "box") {
      double cx, cy, hx, hy;
      if (!(ls >> cx >> cy >> hx >> hy)) fail("box needs 4 numbers");
      if (hx <= 0 || hy <= 0) fail("box half extents must be positive");
      world.obstacles.push_back(Box{{cx, cy}, {hx, hy}});
    } else if (tag == "poly") {
      ConvexPolygon poly;
      double x, y;
      while (ls >> x >> y) poly.vertices.push_back({x, y});
      if (poly.vertices.size() < 3) fail("poly needs >= 3 vertices");
      world.obstacles.push_back(poly);
    } else {
      fail("unknown directive '" + tag + "'");
    }
  }
  if (!have_bounds || !have_start || !have_goal)
    throw std::runtime_error("world file missing bounds/start/goal");
  if (world.disk_collides(world.start_pose.position, 0.2))
    throw std::runtime_error("start pose collides or leaves bounds");
  if (world.disk_collides(world.global_goal, 0.2))
    throw std::runtime_error("goal collides or leaves bounds");
  return world;
}

std::string world_to_text(const WorldModel& world) {
  std::ostringstream out;
  out.precision(17);
  const Vec2 lo = world.bounds.min();
  const Vec2 hi = world.bounds.max();
  out << "bounds " << lo.x() << ' ' << lo.y() << ' ' << hi.x() << ' ' << hi.y()
      << '\n';
  out << "start " << world.start_pose.position.x() << ' '
      << world.start_pose.position.y() << ' ' << world.start_pose.heading
      << '\n';
  out << "goal " << world.global_goal.x() << ' ' << world.global_goal.y()
      << '\n';
  for (const Obstacle& obs : world.obstacles) {
    if (std::holds_alternative<Box>(obs)) {
      const Box& b = std::get<Box>(obs);
      out << "box " << b.center.x() << ' ' << b.center.y() << ' '
          << b.half.x() << ' ' << b.half.y() << '\n';
    } else {
      out << "poly";
      for (const Vec2& v : std::get<ConvexPolygon>(obs).vertices)
        out << ' ' << v.x() << ' ' << v.y();
      out << '\n';
    }
  }
  return out.str();
}

WorldModel load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open world file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_world(buf.str());
}

void save_world(const WorldModel& world, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write world file: " + path);
  out << world_to_text(world);
}

}  // namespace gdex
