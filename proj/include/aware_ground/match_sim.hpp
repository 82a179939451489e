#pragma once

// Scripted delivery and fielding scenarios with closed-form ground truth.
//
// The ball is a point mass under constant gravity with no drag. A bounce
// happens when the ball center comes down to one ball radius above the ground;
// it reverses and scales the vertical velocity by the restitution coefficient
// and, on the first bounce only, adds the optional lateral spin kick to v_y.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "aware_ground/config_text.hpp"
#include "aware_ground/error.hpp"
#include "aware_ground/geometry.hpp"
#include "aware_ground/ground_model.hpp"
#include "aware_ground/positioning.hpp"

namespace aware_ground {

inline constexpr double kGravity = 9.81;
inline constexpr double kDefaultRestitution = 0.7;
inline constexpr double kDefaultSampleHz = 100.0;
// Post-bounce vertical speed below which the ball is treated as rolling to rest.
inline constexpr double kRestSpeed = 0.5;
inline constexpr double kMaxFlightTime = 5.0;
inline constexpr double kMaxPostContactTime = 2.0;

struct BatContact {
  double t = 0.0;  // seconds after release
  Vec3 new_vel;

  friend bool operator==(const BatContact&, const BatContact&) = default;
};

struct DeliverySpec {
  Point3 release_pos;
  Vec3 release_vel;
  double restitution = kDefaultRestitution;
  std::optional<BatContact> bat_contact;
  Point2 foot_landing;
  std::optional<double> spin_deviation;
  // Along-pitch coordinate where the batter's pad intercepts the ball. Without
  // it the ball samples run up to the stump plane.
  std::optional<double> pad_x;
  BowlingEnd end = BowlingEnd::kNorth;
  std::string ball_id = "ball";
  std::string foot_id = "bowler_foot";

  friend bool operator==(const DeliverySpec&, const DeliverySpec&) = default;
};

enum class PlayerRole { kFielder, kBowler, kKeeper };

struct Placement {
  std::string player_id;
  Point2 pos;
  PlayerRole role = PlayerRole::kFielder;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct FieldingSpec {
  std::vector<Placement> placements;
  int over_number = 1;

  friend bool operator==(const FieldingSpec&, const FieldingSpec&) = default;
};

struct BallisticSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  Point3 p0;
  Vec3 v0;

  Point3 at(double t) const {
    const double dt = t - t0;
    return {p0.x + v0.x * dt, p0.y + v0.y * dt, p0.z + v0.z * dt - 0.5 * kGravity * dt * dt};
  }
  Vec3 velocity_at(double t) const { return {v0.x, v0.y, v0.z - kGravity * (t - t0)}; }
};

enum class FlightEnd { kStumpPlane, kPad, kBatLanding, kRest, kTimeLimit };

struct ScenarioTruth {
  std::vector<BallisticSegment> segments;
  std::vector<double> bounce_times;
  std::vector<Point3> bounce_points;
  FlightEnd end_reason = FlightEnd::kTimeLimit;
  double end_time = 0.0;
  // Where the final segment, continued as a free parabola, crosses the stump
  // plane. Absent after bat contact or when the ball is not moving toward the stumps.
  std::optional<Point3> stump_intercept;
  std::optional<double> stump_intercept_t;
  std::optional<bool> hitting;
  Point2 foot;
  double foot_t = 0.0;

  const BallisticSegment& segment_at(double t) const {
    for (const auto& s : segments) {
      if (t < s.t1) return s;
    }
    return segments.back();
  }
  Point3 position_at(double t) const { return segment_at(t).at(t); }
};

struct SimOptions {
  double sample_hz = kDefaultSampleHz;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  double t0 = 0.0;  // wall-clock time of release
};

struct SimulatedDelivery {
  ScenarioTruth truth;
  std::vector<SensorSample> samples;  // foot sample first, then ball samples in time order
};

/// Zero-mean unit normals by Box-Muller over mt19937_64, so sample logs are the
/// same on every standard library.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(phi);
    return r * std::cos(phi);
  }

 private:
  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

inline void validate_delivery(const GroundLayout& layout, const DeliverySpec& spec) {
  const auto invalid = [](const char* field, const std::string& what) {
    return Error(Errc::kInvalidSpec, std::string(field) + " " + what, field);
  };
  if (!is_finite(spec.release_pos)) throw invalid("release_pos", "must be finite");
  if (!(spec.release_pos.z > layout.ball_radius)) {
    throw invalid("release_pos", "height must exceed the ball radius");
  }
  if (!is_finite(spec.release_vel) || !(norm(spec.release_vel) > 1.0)) {
    throw invalid("release_vel", "speed must exceed 1 m/s");
  }
  if (!(spec.restitution > 0.0 && spec.restitution <= 1.0)) {
    throw invalid("restitution", "must lie in (0, 1]");
  }
  if (!is_finite(spec.foot_landing)) throw invalid("foot_landing", "must be finite");
  if (spec.spin_deviation && !std::isfinite(*spec.spin_deviation)) {
    throw invalid("spin_deviation", "must be finite");
  }
  if (spec.pad_x) {
    const auto zone = stump_zone(layout, spec.end);
    if (!std::isfinite(*spec.pad_x) ||
        (zone.plane_x - *spec.pad_x) * delivery_direction(spec.end) < 0.0) {
      throw invalid("pad_x", "must be finite and in front of the striker's stumps");
    }
  }
  if (spec.bat_contact) {
    if (!(spec.bat_contact->t > 0.0) || !std::isfinite(spec.bat_contact->t)) {
      throw invalid("bat_contact", "time must be positive");
    }
    if (!is_finite(spec.bat_contact->new_vel)) throw invalid("bat_contact", "velocity must be finite");
  }
  if (spec.ball_id.empty() || spec.foot_id.empty() || spec.ball_id == spec.foot_id) {
    throw invalid("sensor_ids", "ball and foot ids must be distinct and non-empty");
  }
}

/// Ground truth flight for `spec`, times relative to release at `t0`.
inline ScenarioTruth simulate_truth(const GroundLayout& layout, const DeliverySpec& spec,
                                    double t0 = 0.0) {
  validate_delivery(layout, spec);
  const double dir = delivery_direction(spec.end);
  const double stump_x = stump_zone(layout, spec.end).plane_x;
  const double end_x = spec.pad_x.value_or(stump_x);
  const double contact_z = layout.ball_radius;
  const double cap = t0 + kMaxFlightTime;
  const double inf = std::numeric_limits<double>::infinity();

  ScenarioTruth truth;
  truth.foot = spec.foot_landing;
  truth.foot_t = t0;

  double t = t0;
  Point3 p = spec.release_pos;
  Vec3 v = spec.release_vel;
  bool batted = false;
  std::optional<double> bat_t;
  if (spec.bat_contact) bat_t = t0 + spec.bat_contact->t;
  double post_contact_cap = inf;

  for (;;) {
    const BallisticSegment seg{t, inf, p, v};

    double t_ground = inf;
    const double disc = v.z * v.z + 2.0 * kGravity * (p.z - contact_z);
    if (disc >= 0.0) {
      const double tau = (v.z + std::sqrt(disc)) / kGravity;
      if (tau > 1e-12) t_ground = t + tau;
    }
    double t_plane = inf;
    if (!batted && v.x * dir > 0.0) {
      const double tau = (end_x - p.x) / v.x;
      t_plane = tau > 0.0 ? t + tau : t;
    }
    const double t_bat = (!batted && bat_t && *bat_t > t) ? *bat_t : inf;
    const double t_cap = std::min(cap, post_contact_cap);

    const double t_next = std::min({t_ground, t_plane, t_bat, t_cap});
    truth.segments.push_back({seg.t0, t_next, seg.p0, seg.v0});
    const Point3 p_next = seg.at(t_next);
    const Vec3 v_next = seg.velocity_at(t_next);

    if (t_next == t_plane) {
      truth.end_reason = spec.pad_x ? FlightEnd::kPad : FlightEnd::kStumpPlane;
      break;
    }
    if (t_next == t_cap) {
      truth.end_reason = FlightEnd::kTimeLimit;
      break;
    }
    if (t_next == t_bat) {
      batted = true;
      post_contact_cap = t_next + kMaxPostContactTime;
      t = t_next;
      p = p_next;
      v = spec.bat_contact->new_vel;
      continue;
    }
    // Ground contact.
    if (batted) {
      truth.end_reason = FlightEnd::kBatLanding;
      break;
    }
    truth.bounce_times.push_back(t_next);
    truth.bounce_points.push_back({p_next.x, p_next.y, contact_z});
    Vec3 bounced{v_next.x, v_next.y, -spec.restitution * v_next.z};
    if (truth.bounce_times.size() == 1 && spec.spin_deviation) bounced.y += *spec.spin_deviation;
    if (bounced.z < kRestSpeed) {
      truth.end_reason = FlightEnd::kRest;
      break;
    }
    t = t_next;
    p = {p_next.x, p_next.y, contact_z};
    v = bounced;
  }
  truth.end_time = truth.segments.back().t1;

  const auto& last = truth.segments.back();
  if (!batted && (truth.end_reason == FlightEnd::kStumpPlane || truth.end_reason == FlightEnd::kPad)) {
    const double t_hit = last.t0 + (stump_x - last.p0.x) / last.v0.x;
    Point3 hit = last.at(t_hit);
    hit.x = stump_x;
    truth.stump_intercept = hit;
    truth.stump_intercept_t = t_hit;
    const auto zone = stump_zone(layout, spec.end);
    truth.hitting = std::abs(hit.y - zone.center_y) <= zone.half_width && hit.z >= 0.0 &&
                    hit.z <= zone.top_z;
  }
  return truth;
}

/// Truth plus sampled sensor readings at k / sample_hz after release, each
/// axis perturbed by N(0, noise_sigma^2). Heights are clamped at zero.
inline SimulatedDelivery simulate_delivery(const GroundLayout& layout, const DeliverySpec& spec,
                                           const SimOptions& opt = {}) {
  if (!(opt.sample_hz >= 10.0 && opt.sample_hz <= 1000.0)) {
    throw Error(Errc::kInvalidSpec, "sample_hz must lie in [10, 1000]", "sample_hz");
  }
  if (!(opt.noise_sigma >= 0.0) || !std::isfinite(opt.noise_sigma)) {
    throw Error(Errc::kInvalidSpec, "noise_sigma must be non-negative", "noise_sigma");
  }
  if (!(opt.t0 >= 0.0) || !std::isfinite(opt.t0)) {
    throw Error(Errc::kInvalidSpec, "t0 must be non-negative", "t0");
  }

  SimulatedDelivery out;
  out.truth = simulate_truth(layout, spec, opt.t0);
  out.samples.push_back({opt.t0, spec.foot_id, SensorKind::kBowlerFoot,
                         {spec.foot_landing.x, spec.foot_landing.y, 0.0}});

  NormalSource noise(opt.seed);
  const double sigma = opt.noise_sigma;
  for (std::int64_t k = 0;; ++k) {
    const double t = opt.t0 + static_cast<double>(k) / opt.sample_hz;
    if (!(t < out.truth.end_time)) break;
    Point3 pos = out.truth.position_at(t);
    if (sigma > 0.0) {
      pos.x += sigma * noise.next();
      pos.y += sigma * noise.next();
      pos.z += sigma * noise.next();
    }
    pos.z = std::max(pos.z, 0.0);
    out.samples.push_back({t, spec.ball_id, SensorKind::kBall, pos});
  }
  return out;
}

inline void validate_fielding(const FieldingSpec& spec) {
  if (spec.over_number < 1) {
    throw Error(Errc::kInvalidSpec, "over_number must be positive", "over_number");
  }
  int fielders = 0, bowlers = 0, keepers = 0;
  for (std::size_t i = 0; i < spec.placements.size(); ++i) {
    const auto& pl = spec.placements[i];
    if (pl.player_id.empty() || !is_finite(pl.pos)) {
      throw Error(Errc::kInvalidSpec, "placement needs an id and finite position", "placements");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.placements[j].player_id == pl.player_id) {
        throw Error(Errc::kInvalidSpec, "duplicate player id " + pl.player_id, "placements");
      }
    }
    switch (pl.role) {
      case PlayerRole::kFielder: ++fielders; break;
      case PlayerRole::kBowler: ++bowlers; break;
      case PlayerRole::kKeeper: ++keepers; break;
    }
  }
  if (fielders > 9 || bowlers > 1 || keepers > 1) {
    throw Error(Errc::kInvalidSpec, "at most 9 fielders, 1 bowler and 1 keeper", "placements");
  }
}

/// Static snapshot: one noiseless player sample per placement at time t.
inline std::vector<SensorSample> simulate_fielding(const GroundLayout&, const FieldingSpec& spec,
                                                   double t) {
  validate_fielding(spec);
  std::vector<SensorSample> out;
  out.reserve(spec.placements.size());
  for (const auto& pl : spec.placements) {
    out.push_back({t, pl.player_id, SensorKind::kPlayer, {pl.pos.x, pl.pos.y, 0.0}});
  }
  return out;
}

// Optional scoring note attached to a delivery; feeds batting analytics.
struct ScoreNote {
  std::string batter;
  int runs = 0;

  friend bool operator==(const ScoreNote&, const ScoreNote&) = default;
};

struct Scenario {
  DeliverySpec delivery;
  FieldingSpec fielding;
  double sample_hz = kDefaultSampleHz;
  std::optional<ScoreNote> score;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses a scenario document (same grammar as layout documents).
///
///   release.pos = x,y,z        required
///   release.vel = x,y,z        required
///   restitution = 0.7          sample_hz = 100
///   foot = x,y                 defaults to the release point's ground projection
///   spin_deviation = v_y       pad_x = x
///   bat_contact.t = t          bat_contact.vel = x,y,z   (both or neither)
///   end = north|south          over = n                  (default 1)
///   fielder.<id> = x,y         bowler.<id> = x,y         keeper.<id> = x,y
///   batter = id                runs = n                  (both or neither)
inline Scenario scenario_from_config(std::string_view text) {
  Scenario sc;
  std::optional<Point3> release_pos;
  std::optional<Vec3> release_vel;
  std::optional<Point2> foot;
  std::optional<double> bat_t;
  std::optional<Vec3> bat_v;
  std::optional<std::string> batter;
  std::optional<int> runs;
  const auto word = [](const config::Entry& e) { return std::string(config::trim(e.value)); };

  for (const auto& e : config::parse_document(text)) {
    const auto role_prefix = [&](std::string_view prefix) {
      return e.key.starts_with(prefix) && e.key.size() > prefix.size() &&
             e.key.find('.', prefix.size()) == std::string::npos;
    };
    if (e.key == "release.pos") {
      const auto v = config::numbers<3>(e);
      release_pos = Point3{v[0], v[1], v[2]};
    } else if (e.key == "release.vel") {
      const auto v = config::numbers<3>(e);
      release_vel = Vec3{v[0], v[1], v[2]};
    } else if (e.key == "restitution") {
      sc.delivery.restitution = config::number(e);
    } else if (e.key == "sample_hz") {
      sc.sample_hz = config::number(e);
    } else if (e.key == "foot") {
      const auto v = config::numbers<2>(e);
      foot = Point2{v[0], v[1]};
    } else if (e.key == "spin_deviation") {
      sc.delivery.spin_deviation = config::number(e);
    } else if (e.key == "pad_x") {
      sc.delivery.pad_x = config::number(e);
    } else if (e.key == "bat_contact.t") {
      bat_t = config::number(e);
    } else if (e.key == "bat_contact.vel") {
      const auto v = config::numbers<3>(e);
      bat_v = Vec3{v[0], v[1], v[2]};
    } else if (e.key == "end") {
      const auto w = word(e);
      if (w == "north") {
        sc.delivery.end = BowlingEnd::kNorth;
      } else if (w == "south") {
        sc.delivery.end = BowlingEnd::kSouth;
      } else {
        throw config::parse_error(e.line, "end must be 'north' or 'south'");
      }
    } else if (e.key == "over") {
      sc.fielding.over_number = static_cast<int>(config::integer(e));
    } else if (e.key == "ball_id") {
      sc.delivery.ball_id = word(e);
    } else if (e.key == "foot_id") {
      sc.delivery.foot_id = word(e);
    } else if (e.key == "batter") {
      batter = word(e);
    } else if (e.key == "runs") {
      runs = static_cast<int>(config::integer(e));
    } else if (role_prefix("fielder.") || role_prefix("bowler.") || role_prefix("keeper.")) {
      const auto dot = e.key.find('.');
      const auto role_name = e.key.substr(0, dot);
      const PlayerRole role = role_name == "fielder"  ? PlayerRole::kFielder
                              : role_name == "bowler" ? PlayerRole::kBowler
                                                      : PlayerRole::kKeeper;
      const auto v = config::numbers<2>(e);
      sc.fielding.placements.push_back({e.key.substr(dot + 1), {v[0], v[1]}, role});
    } else {
      throw config::parse_error(e.line, "unknown key '" + e.key + "'");
    }
  }

  if (!release_pos) throw Error(Errc::kInvalidSpec, "release.pos is required", "release_pos");
  if (!release_vel) throw Error(Errc::kInvalidSpec, "release.vel is required", "release_vel");
  sc.delivery.release_pos = *release_pos;
  sc.delivery.release_vel = *release_vel;
  sc.delivery.foot_landing = foot.value_or(release_pos->xy());
  if (bat_t.has_value() != bat_v.has_value()) {
    throw Error(Errc::kInvalidSpec, "bat_contact.t and bat_contact.vel go together", "bat_contact");
  }
  if (bat_t) sc.delivery.bat_contact = BatContact{*bat_t, *bat_v};
  if (batter.has_value() != runs.has_value()) {
    throw Error(Errc::kInvalidSpec, "batter and runs go together", "score");
  }
  if (batter) {
    if (*runs < 0) throw Error(Errc::kInvalidSpec, "runs must be non-negative", "runs");
    sc.score = ScoreNote{*batter, *runs};
  }
  if (!(sc.sample_hz >= 10.0 && sc.sample_hz <= 1000.0)) {
    throw Error(Errc::kInvalidSpec, "sample_hz must lie in [10, 1000]", "sample_hz");
  }
  validate_delivery(default_layout(), sc.delivery);
  validate_fielding(sc.fielding);
  return sc;
}

inline std::string serialize_scenario(const Scenario& sc) {
  std::string out;
  const auto nums = [&](std::string_view key, std::initializer_list<double> values) {
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
  const auto text = [&](std::string_view key, std::string_view value) {
    out.append(key);
    out.append(" = ");
    out.append(value);
    out.push_back('\n');
  };
  const auto& d = sc.delivery;
  nums("release.pos", {d.release_pos.x, d.release_pos.y, d.release_pos.z});
  nums("release.vel", {d.release_vel.x, d.release_vel.y, d.release_vel.z});
  nums("restitution", {d.restitution});
  nums("sample_hz", {sc.sample_hz});
  nums("foot", {d.foot_landing.x, d.foot_landing.y});
  if (d.spin_deviation) nums("spin_deviation", {*d.spin_deviation});
  if (d.pad_x) nums("pad_x", {*d.pad_x});
  if (d.bat_contact) {
    nums("bat_contact.t", {d.bat_contact->t});
    const auto& v = d.bat_contact->new_vel;
    nums("bat_contact.vel", {v.x, v.y, v.z});
  }
  text("end", d.end == BowlingEnd::kNorth ? "north" : "south");
  text("ball_id", d.ball_id);
  text("foot_id", d.foot_id);
  text("over", std::to_string(sc.fielding.over_number));
  for (const auto& pl : sc.fielding.placements) {
    const char* role = pl.role == PlayerRole::kFielder  ? "fielder."
                       : pl.role == PlayerRole::kBowler ? "bowler."
                                                        : "keeper.";
    nums(role + pl.player_id, {pl.pos.x, pl.pos.y});
  }
  if (sc.score) {
    text("batter", sc.score->batter);
    text("runs", std::to_string(sc.score->runs));
  }
  return out;
}

}  // namespace aware_ground
