#pragma once

#include <cmath>
#include <limits>

#include "navrl/common.hpp"

namespace navrl::sim {

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

struct Segment {
  Vec2 a, b;
};

struct Circle {
  Vec2 c;
  double r = 0.0;
};

struct Rect {
  double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
  bool contains(Vec2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  double area() const { return (xmax - xmin) * (ymax - ymin); }
};

struct Pose {
  double x = 0.0, y = 0.0, theta = 0.0;
  Vec2 pos() const { return {x, y}; }
};

inline constexpr double kNoHit = std::numeric_limits<double>::infinity();

inline double dist_point_segment(Vec2 p, const Segment& s) {
  Vec2 d = s.b - s.a;
  double len2 = d.dot(d);
  if (len2 == 0.0) return (p - s.a).norm();
  double t = clamp((p - s.a).dot(d) / len2, 0.0, 1.0);
  return (p - (s.a + d * t)).norm();
}

// Distance along a unit-direction ray to the segment, kNoHit on miss.
inline double ray_segment(Vec2 origin, Vec2 dir, const Segment& s) {
  Vec2 e = s.b - s.a;
  Vec2 f = s.a - origin;
  double denom = dir.cross(e);
  if (denom == 0.0) return kNoHit;  // parallel (collinear treated as miss)
  double t = f.cross(e) / denom;
  double u = f.cross(dir) / denom;
  if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
  return kNoHit;
}

// Distance along a unit-direction ray to the circle boundary, kNoHit on miss.
// A ray starting inside returns the exit distance.
inline double ray_circle(Vec2 origin, Vec2 dir, const Circle& c) {
  Vec2 oc = origin - c.c;
  double b = dir.dot(oc);
  double q = oc.dot(oc) - c.r * c.r;
  double disc = b * b - q;
  if (disc < 0.0) return kNoHit;
  double sq = std::sqrt(disc);
  double t1 = -b - sq;
  if (t1 >= 0.0) return t1;
  double t2 = -b + sq;
  if (t2 >= 0.0) return t2;
  return kNoHit;
}

}  // namespace navrl::sim
