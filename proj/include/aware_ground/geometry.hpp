#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aware_ground/error.hpp"

namespace aware_ground {

// Displacements and velocities. Points and vectors are kept apart so that
// adding two positions does not compile.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a * s; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a * s; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator+(Point2 p, Vec2 v) { return {p.x + v.x, p.y + v.y}; }
  friend constexpr Point2 operator-(Point2 p, Vec2 v) { return {p.x - v.x, p.y - v.y}; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

// z is height above the ground plane.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Point2 xy() const { return {x, y}; }

  friend constexpr Vec3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Point3 operator+(Point3 p, Vec3 v) { return {p.x + v.x, p.y + v.y, p.z + v.z}; }
  friend constexpr bool operator==(Point3, Point3) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
// z-component of the 3D cross product; positive when b is counter-clockwise from a.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::sqrt(dot(v, v)); }
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }
constexpr Vec2 left_normal(Vec2 v) { return {-v.y, v.x}; }

inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }
inline bool is_finite(Point3 p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}
inline bool is_finite(Vec3 v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

/// Euclidean distance in the ground plane.
inline double distance(Point2 p, Point2 q) {
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double distance(Point3 p, Point3 q) { return norm(q - p); }

/// Side lengths of a triangle, named relative to the angle being queried:
/// `x` is opposite the angle, `y` and `z` are the two sides meeting at it.
struct TriangleSides {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Slack allowed on the arccos argument before a triangle is called invalid.
inline constexpr double kCosineClampTolerance = 1e-12;

/// Interior angle between sides y and z (opposite x), in radians, from the
/// law of cosines x^2 = y^2 + z^2 - 2yz cos(theta).
inline double angle_at_vertex(const TriangleSides& sides) {
  const auto [x, y, z] = sides;
  if (!(x > 0.0 && y > 0.0 && z > 0.0) || !std::isfinite(x) || !std::isfinite(y) ||
      !std::isfinite(z)) {
    throw Error(Errc::kDegenerateTriangle, "triangle sides must be positive and finite");
  }
  double cosine = (y * y + z * z - x * x) / (2.0 * y * z);
  if (cosine > 1.0 + kCosineClampTolerance || cosine < -1.0 - kCosineClampTolerance) {
    throw Error(Errc::kDegenerateTriangle, "side lengths violate the triangle inequality");
  }
  cosine = std::clamp(cosine, -1.0, 1.0);
  return std::acos(cosine);
}

/// Circular-arc geometry: an arc of radius R drops Yd below its apex tangent
/// over a horizontal run D, with R^2 = D^2 + (R - Yd)^2.
struct ArcGeometry {
  double radius = 0.0;
  double horizontal = 0.0;
  double drop = 0.0;
};

/// Vertical drop Yd = R - sqrt(R^2 - D^2). Evaluated as D^2 / (R + sqrt(R^2 - D^2)),
/// which is the same quantity without cancellation for small D.
inline double arc_drop(double radius, double horizontal) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(Errc::kOutOfDomain, "arc radius must be positive", "R");
  }
  if (!(horizontal >= 0.0) || horizontal > radius) {
    throw Error(Errc::kOutOfDomain, "horizontal distance must lie in [0, R]", "D");
  }
  const double root = std::sqrt((radius - horizontal) * (radius + horizontal));
  return horizontal * horizontal / (radius + root);
}

inline ArcGeometry make_arc(double radius, double horizontal) {
  return {radius, horizontal, arc_drop(radius, horizontal)};
}

/// A directed line. `direction` must be a unit vector.
struct OrientedLine2 {
  Point2 origin;
  Vec2 direction{1.0, 0.0};

  OrientedLine2 reversed() const { return {origin, -direction}; }
};

inline constexpr double kUnitTolerance = 1e-12;

inline bool is_unit(Vec2 v) { return std::abs(norm(v) - 1.0) <= kUnitTolerance; }

inline OrientedLine2 make_line(Point2 origin, Vec2 direction) {
  const double len = norm(direction);
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw Error(Errc::kInvalidArgument, "line direction must be non-zero", "direction");
  }
  return {origin, direction * (1.0 / len)};
}

/// Perpendicular distance from the line; positive to the left of `direction`.
inline double signed_distance(const OrientedLine2& line, Point2 p) {
  return cross(line.direction, p - line.origin);
}

/// Capsule: every point within `radius` of the segment [focus_a, focus_b].
/// focus_a == focus_b gives a plain circle.
struct StadiumShape {
  Point2 focus_a;
  Point2 focus_b;
  double radius = 0.0;

  friend bool operator==(const StadiumShape&, const StadiumShape&) = default;
};

inline double squared_distance_to_segment(Point2 a, Point2 b, Point2 p) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) {
    const Vec2 d = p - a;
    return dot(d, d);
  }
  const double t = dot(p - a, ab) / len2;
  if (t <= 0.0) {
    const Vec2 d = p - a;
    return dot(d, d);
  }
  if (t >= 1.0) {
    const Vec2 d = p - b;
    return dot(d, d);
  }
  const Vec2 d = p - (a + ab * t);
  return dot(d, d);
}

/// Closed-set membership: points exactly on the rim are inside.
inline bool stadium_contains(const StadiumShape& ring, Point2 p) {
  return squared_distance_to_segment(ring.focus_a, ring.focus_b, p) <= ring.radius * ring.radius;
}

inline constexpr double radians_to_degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace aware_ground
