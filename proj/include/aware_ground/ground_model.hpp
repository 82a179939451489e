#pragma once

// Dimensional model of the instrumented ground.
//
// Coordinate convention used everywhere in the library and in logs:
//   origin at the pitch center, +x toward the striker's end for deliveries
//   bowled from the north end, +y to the bowler's left, +z up. The north end
//   is the stump line at x = -pitch_length/2.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "aware_ground/config_text.hpp"
#include "aware_ground/error.hpp"
#include "aware_ground/geometry.hpp"

namespace aware_ground {

struct AccessPoint {
  std::string id;
  Point2 pos;

  friend bool operator==(const AccessPoint&, const AccessPoint&) = default;
};

struct GroundLayout {
  double pitch_length = 20.12;
  double popping_crease_offset = 1.22;
  double stump_zone_width = 0.2286;
  double stump_zone_height = 0.711;
  double ball_radius = 0.036;
  StadiumShape ring{{-10.06, 0.0}, {10.06, 0.0}, 27.43};
  double boundary_radius = 70.0;
  std::vector<AccessPoint> access_points{
      {"ne", {70.0, 70.0}}, {"nw", {-70.0, 70.0}}, {"sw", {-70.0, -70.0}}, {"se", {70.0, -70.0}}};

  const AccessPoint* find_access_point(std::string_view id) const {
    for (const auto& ap : access_points) {
      if (ap.id == id) return &ap;
    }
    return nullptr;
  }

  friend bool operator==(const GroundLayout&, const GroundLayout&) = default;
};

enum class BowlingEnd { kNorth, kSouth };

/// The no-ball sensor triangle's fixed corners at one end.
struct CreaseFrame {
  OrientedLine2 crease_line;  // striker's side is positive
  Point2 anchor_a;            // on the popping crease, pitch centerline
  Point2 anchor_b;            // on the stump line, behind anchor_a
};

/// Stump target widened by the ball radius, at the striker's end.
struct StumpZone {
  double plane_x = 0.0;
  double center_y = 0.0;
  double half_width = 0.0;
  double top_z = 0.0;
};

inline GroundLayout default_layout() { return GroundLayout{}; }

// Largest distance of any point from the line through the farthest-apart pair.
// Zero for fewer than three points.
inline double collinear_spread(const std::vector<Point2>& pts) {
  if (pts.size() < 3) return 0.0;
  std::size_t ia = 0, ib = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = distance(pts[i], pts[j]);
      if (d > best) {
        best = d;
        ia = i;
        ib = j;
      }
    }
  }
  if (!(best > 0.0)) return 0.0;
  const Vec2 dir = (pts[ib] - pts[ia]) * (1.0 / best);
  double spread = 0.0;
  for (const auto& p : pts) spread = std::max(spread, std::abs(cross(dir, p - pts[ia])));
  return spread;
}

inline constexpr double kMinAccessPointSeparation = 1.0;

inline void validate_layout(const GroundLayout& g) {
  const auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw Error(Errc::kInvalidLayout, std::string(field) + " " + what, field);
  };
  const auto positive = [&](double v, const char* field) {
    require(std::isfinite(v) && v > 0.0, field, "must be a positive length");
  };
  positive(g.pitch_length, "pitch_length");
  positive(g.popping_crease_offset, "popping_crease_offset");
  positive(g.stump_zone_width, "stump_zone_width");
  positive(g.stump_zone_height, "stump_zone_height");
  positive(g.ball_radius, "ball_radius");
  positive(g.ring.radius, "ring.radius");
  positive(g.boundary_radius, "boundary_radius");
  require(g.popping_crease_offset < g.pitch_length / 2.0, "popping_crease_offset",
          "must be less than half the pitch length");
  require(is_finite(g.ring.focus_a), "ring.focus_a", "must be finite");
  require(is_finite(g.ring.focus_b), "ring.focus_b", "must be finite");

  require(g.access_points.size() >= 3, "access_points", "needs at least three entries");
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < g.access_points.size(); ++i) {
    const auto& ap = g.access_points[i];
    require(!ap.id.empty(), "access_points", "ids must be non-empty");
    require(is_finite(ap.pos), "access_points", "positions must be finite");
    for (std::size_t j = 0; j < i; ++j) {
      require(g.access_points[j].id != ap.id, "access_points", "ids must be distinct");
      require(distance(g.access_points[j].pos, ap.pos) > kMinAccessPointSeparation,
              "access_points", "must be more than 1 m apart");
    }
    pts.push_back(ap.pos);
  }
  require(collinear_spread(pts) > kMinAccessPointSeparation, "access_points",
          "must not be collinear");
}

inline StadiumShape default_ring(double pitch_length, double radius) {
  return {{-pitch_length / 2.0, 0.0}, {pitch_length / 2.0, 0.0}, radius};
}

/// Layout from a `key = value` document. Keys are the GroundLayout field names;
/// the ring uses `ring.radius`, `ring.focus_a = x,y`, `ring.focus_b = x,y` and
/// access points are `ap.<id> = x,y`. Any `ap.*` entry replaces the default
/// access-point set. Ring foci left unset follow the stump-line centers of the
/// effective pitch length.
inline GroundLayout load_layout(std::string_view text) {
  GroundLayout g = default_layout();
  bool has_focus_a = false;
  bool has_focus_b = false;
  std::vector<AccessPoint> aps;
  for (const auto& e : config::parse_document(text)) {
    if (e.key == "pitch_length") {
      g.pitch_length = config::number(e);
    } else if (e.key == "popping_crease_offset") {
      g.popping_crease_offset = config::number(e);
    } else if (e.key == "stump_zone_width") {
      g.stump_zone_width = config::number(e);
    } else if (e.key == "stump_zone_height") {
      g.stump_zone_height = config::number(e);
    } else if (e.key == "ball_radius") {
      g.ball_radius = config::number(e);
    } else if (e.key == "boundary_radius") {
      g.boundary_radius = config::number(e);
    } else if (e.key == "ring.radius") {
      g.ring.radius = config::number(e);
    } else if (e.key == "ring.focus_a") {
      const auto v = config::numbers<2>(e);
      g.ring.focus_a = {v[0], v[1]};
      has_focus_a = true;
    } else if (e.key == "ring.focus_b") {
      const auto v = config::numbers<2>(e);
      g.ring.focus_b = {v[0], v[1]};
      has_focus_b = true;
    } else if (e.key.starts_with("ap.") && e.key.size() > 3 &&
               e.key.find('.', 3) == std::string::npos) {
      const auto v = config::numbers<2>(e);
      aps.push_back({e.key.substr(3), {v[0], v[1]}});
    } else {
      throw config::parse_error(e.line, "unknown key '" + e.key + "'");
    }
  }
  const auto ring = default_ring(g.pitch_length, g.ring.radius);
  if (!has_focus_a) g.ring.focus_a = ring.focus_a;
  if (!has_focus_b) g.ring.focus_b = ring.focus_b;
  if (!aps.empty()) g.access_points = std::move(aps);
  validate_layout(g);
  return g;
}

/// Canonical document for `g`; load_layout(serialize_layout(g)) == g.
inline std::string serialize_layout(const GroundLayout& g) {
  std::string out;
  const auto line = [&](std::string_view key, std::initializer_list<double> values) {
    out.append(key);
    out.append(" = ");
    bool first = true;
    for (double v : values) {
      if (!first) out.push_back(',');
      config::append_double(out, v);
      first = false;
    }
    out.push_back('\n');
  };
  line("pitch_length", {g.pitch_length});
  line("popping_crease_offset", {g.popping_crease_offset});
  line("stump_zone_width", {g.stump_zone_width});
  line("stump_zone_height", {g.stump_zone_height});
  line("ball_radius", {g.ball_radius});
  line("ring.radius", {g.ring.radius});
  line("ring.focus_a", {g.ring.focus_a.x, g.ring.focus_a.y});
  line("ring.focus_b", {g.ring.focus_b.x, g.ring.focus_b.y});
  line("boundary_radius", {g.boundary_radius});
  for (const auto& ap : g.access_points) line("ap." + ap.id, {ap.pos.x, ap.pos.y});
  return out;
}

/// FNV-1a over the canonical document, as 16 lowercase hex digits.
inline std::string layout_hash(const GroundLayout& g) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize_layout(g)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// +1 when the ball travels toward +x from this end, -1 otherwise.
inline constexpr double delivery_direction(BowlingEnd end) {
  return end == BowlingEnd::kNorth ? 1.0 : -1.0;
}

inline CreaseFrame crease_frame(const GroundLayout& g, BowlingEnd end) {
  const double dir = delivery_direction(end);
  const double stump_x = -dir * g.pitch_length / 2.0;
  const Point2 b{stump_x, 0.0};
  const Point2 a{stump_x + dir * g.popping_crease_offset, 0.0};
  // Left of the direction vector points toward the striker.
  const OrientedLine2 line{a, {0.0, -dir}};
  return {line, a, b};
}

inline StumpZone stump_zone(const GroundLayout& g, BowlingEnd end) {
  return {delivery_direction(end) * g.pitch_length / 2.0, 0.0,
          g.stump_zone_width / 2.0 + g.ball_radius, g.stump_zone_height + g.ball_radius};
}

}  // namespace aware_ground
