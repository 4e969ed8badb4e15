#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace gdex {

using Vec2 = Eigen::Vector2d;

constexpr double kPi = 3.14159265358979323846;

struct Pose {
  Vec2 position{0.0, 0.0};
  double heading = 0.0;  // rad, normalized to (-pi, pi]
};

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Distance from point p to segment s.
inline double point_segment_distance(const Vec2& p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = d.squaredNorm();
  if (len2 <= 0.0) return (p - s.a).norm();
  const double t = std::clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

// Ray (origin, unit dir) vs segment. Returns hit distance >= 0 if any.
inline std::optional<double> ray_segment_intersection(const Vec2& origin,
                                                      const Vec2& dir,
                                                      const Segment& s) {
  const Vec2 v1 = origin - s.a;
  const Vec2 v2 = s.b - s.a;
  const Vec2 v3{-dir.y(), dir.x()};
  const double denom = v2.dot(v3);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t1 = (v2.x() * v1.y() - v2.y() * v1.x()) / denom;
  const double t2 = v1.dot(v3) / denom;
  if (t1 >= 0.0 && t2 >= 0.0 && t2 <= 1.0) return t1;
  return std::nullopt;
}

// Axis-aligned box given by center and half extents.
struct Box {
  Vec2 center;
  Vec2 half;

  Vec2 min() const { return center - half; }
  Vec2 max() const { return center + half; }

  bool contains(const Vec2& p) const {
    return p.x() >= min().x() && p.x() <= max().x() && p.y() >= min().y() &&
           p.y() <= max().y();
  }
};

// Convex polygon, counter-clockwise vertex order.
struct ConvexPolygon {
  std::vector<Vec2> vertices;

  bool contains(const Vec2& p) const {
    const size_t n = vertices.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec2& a = vertices[i];
      const Vec2& b = vertices[(i + 1) % n];
      const Vec2 e = b - a;
      if (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x()) < 0.0) return false;
    }
    return true;
  }
};

inline std::vector<Segment> box_edges(const Box& b) {
  const Vec2 lo = b.min();
  const Vec2 hi = b.max();
  return {{{lo.x(), lo.y()}, {hi.x(), lo.y()}},
          {{hi.x(), lo.y()}, {hi.x(), hi.y()}},
          {{hi.x(), hi.y()}, {lo.x(), hi.y()}},
          {{lo.x(), hi.y()}, {lo.x(), lo.y()}}};
}

inline std::vector<Segment> polygon_edges(const ConvexPolygon& p) {
  std::vector<Segment> edges;
  const size_t n = p.vertices.size();
  edges.reserve(n);
  for (size_t i = 0; i < n; ++i)
    edges.push_back({p.vertices[i], p.vertices[(i + 1) % n]});
  return edges;
}

}  // namespace gdex
