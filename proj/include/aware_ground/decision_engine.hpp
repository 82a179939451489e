#pragma once

// Umpiring decisions: front-foot no-ball, fielding restriction and LBW
// trajectory projection.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aware_ground/error.hpp"
#include "aware_ground/geometry.hpp"
#include "aware_ground/ground_model.hpp"
#include "aware_ground/least_squares.hpp"
#include "aware_ground/positioning.hpp"

namespace aware_ground {

enum class DecisionKind { kNoBall, kFieldingViolation, kLbwProjection };

inline constexpr std::string_view decision_kind_name(DecisionKind k) {
  switch (k) {
    case DecisionKind::kNoBall: return "no_ball";
    case DecisionKind::kFieldingViolation: return "fielding_violation";
    case DecisionKind::kLbwProjection: return "lbw_projection";
  }
  return "?";
}

inline std::optional<DecisionKind> parse_decision_kind(std::string_view s) {
  if (s == "no_ball") return DecisionKind::kNoBall;
  if (s == "fielding_violation") return DecisionKind::kFieldingViolation;
  if (s == "lbw_projection") return DecisionKind::kLbwProjection;
  return std::nullopt;
}

enum class Verdict { kLegal, kNoBall, kCompliant, kViolation, kHitting, kMissing };

inline constexpr std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kLegal: return "legal";
    case Verdict::kNoBall: return "no_ball";
    case Verdict::kCompliant: return "compliant";
    case Verdict::kViolation: return "violation";
    case Verdict::kHitting: return "hitting";
    case Verdict::kMissing: return "missing";
  }
  return "?";
}

inline std::optional<Verdict> parse_verdict(std::string_view s) {
  for (auto v : {Verdict::kLegal, Verdict::kNoBall, Verdict::kCompliant, Verdict::kViolation,
                 Verdict::kHitting, Verdict::kMissing}) {
    if (verdict_name(v) == s) return v;
  }
  return std::nullopt;
}

struct Measurement {
  std::string name;
  double value = 0.0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct DecisionEvent {
  double t = 0.0;
  DecisionKind kind = DecisionKind::kNoBall;
  Verdict verdict = Verdict::kLegal;
  std::vector<Measurement> measurements;
  // Filled by the presentation stage; not part of the stored record.
  std::vector<std::string> sinks_notified;

  std::optional<double> measurement(std::string_view name) const {
    for (const auto& m : measurements) {
      if (m.name == name) return m.value;
    }
    return std::nullopt;
  }

  /// Equality over the persisted fields (everything but sinks_notified).
  bool same_record(const DecisionEvent& o) const {
    return t == o.t && kind == o.kind && verdict == o.verdict && measurements == o.measurements;
  }
};

// ---------------------------------------------------------------------------
// No-ball

// Half-width of the band around 90 degrees that counts as "on the line". The
// foot must be strictly beyond the crease to be called.
inline constexpr double kRightAngleTieTolerance = 1e-9;
inline constexpr double kAnchorCoincidenceTolerance = 1e-9;

/// Shortcut from the sensor triangle: with x = |B S| and z = |A B|, x < z
/// means the foot is nearer the stump-line sensor than the crease sensor is,
/// so the delivery is legal without evaluating the angle.
inline bool quick_reject(const TriangleSides& sides) { return sides.x < sides.z; }

/// Front-foot no-ball from the triangle (crease sensor A, stump-line sensor B,
/// foot S). Side lengths come from the distance formula, the angle at A from
/// the law of cosines; the foot is over the crease iff that angle exceeds 90
/// degrees. A foot exactly on the line is legal.
inline DecisionEvent detect_no_ball(const CreaseFrame& frame, const SensorSample& foot) {
  if (foot.kind != SensorKind::kBowlerFoot) {
    throw Error(Errc::kInvalidArgument, "no-ball check needs a bowler_foot sample", foot.sensor_id);
  }
  const Point2 s = foot.pos.xy();
  if (distance(s, frame.anchor_a) <= kAnchorCoincidenceTolerance ||
      distance(s, frame.anchor_b) <= kAnchorCoincidenceTolerance) {
    throw Error(Errc::kDegenerateTriangle, "foot sensor coincides with a crease anchor",
                foot.sensor_id);
  }
  const TriangleSides sides{distance(frame.anchor_b, s), distance(frame.anchor_a, s),
                            distance(frame.anchor_a, frame.anchor_b)};

  DecisionEvent ev;
  ev.t = foot.t;
  ev.kind = DecisionKind::kNoBall;
  ev.measurements = {{"x", sides.x}, {"y", sides.y}, {"z", sides.z}};
  if (quick_reject(sides)) {
    ev.verdict = Verdict::kLegal;
    ev.measurements.push_back({"quick_reject", 1.0});
    return ev;
  }
  const double theta = angle_at_vertex(sides);
  ev.verdict = theta > std::numbers::pi / 2.0 + kRightAngleTieTolerance ? Verdict::kNoBall
                                                                         : Verdict::kLegal;
  ev.measurements.push_back({"quick_reject", 0.0});
  ev.measurements.push_back({"theta", theta});
  return ev;
}

// ---------------------------------------------------------------------------
// Fielding restriction

struct FieldingRule {
  int first_over = 1;
  int last_over = 15;
  int max_outside = 2;

  bool active(int over) const { return over >= first_over && over <= last_over; }

  friend bool operator==(const FieldingRule&, const FieldingRule&) = default;
};

inline void validate_rule(const FieldingRule& rule) {
  if (rule.first_over < 1 || rule.last_over < rule.first_over) {
    throw Error(Errc::kInvalidArgument, "active overs must be a non-empty range", "rule-overs");
  }
  if (rule.max_outside < 0) {
    throw Error(Errc::kInvalidArgument, "max_outside must be non-negative", "rule-max-outside");
  }
}

/// Counts players outside the fielding ring at time t. Outside the active
/// overs the count is still reported but the verdict is always compliant.
inline DecisionEvent check_fielding(const GroundLayout& layout, const FieldingRule& rule,
                                    std::span<const SensorSample> players, int over, double t) {
  validate_rule(rule);
  int inside = 0;
  int outside = 0;
  std::vector<Measurement> per_player;
  per_player.reserve(players.size());
  for (const auto& p : players) {
    if (p.kind != SensorKind::kPlayer) {
      throw Error(Errc::kInvalidArgument, "fielding check needs player samples", p.sensor_id);
    }
    const bool in = stadium_contains(layout.ring, p.pos.xy());
    (in ? inside : outside) += 1;
    per_player.push_back({"inside." + p.sensor_id, in ? 1.0 : 0.0});
  }
  const bool active = rule.active(over);

  DecisionEvent ev;
  ev.t = t;
  ev.kind = DecisionKind::kFieldingViolation;
  ev.verdict = active && outside > rule.max_outside ? Verdict::kViolation : Verdict::kCompliant;
  ev.measurements = {{"count_inside", static_cast<double>(inside)},
                     {"count_outside", static_cast<double>(outside)},
                     {"over", static_cast<double>(over)},
                     {"rule_active", active ? 1.0 : 0.0},
                     {"max_outside", static_cast<double>(rule.max_outside)}};
  ev.measurements.insert(ev.measurements.end(), per_player.begin(), per_player.end());
  return ev;
}

// ---------------------------------------------------------------------------
// Trajectory fitting and LBW projection

struct TimeWindow {
  double t_start = 0.0;
  double t_end = 0.0;

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Post-bounce flight model in the vertical plane through the ball's path:
/// height z(s) = a + b s + c s^2 and cross-plane drift lat(s) = p + q s, where
/// s is horizontal distance along `direction` from `origin` and lat is
/// positive to the left of `direction`.
struct TrajectoryFit {
  Point2 origin;
  Vec2 direction;
  std::array<double, 3> height{};   // a, b, c
  std::array<double, 2> lateral{};  // p, q
  TimeWindow window;
  std::size_t n_samples = 0;
  double s_end = 0.0;             // s of the last windowed sample
  double rms_residual = 0.0;      // vertical, meters
  double lateral_rms = 0.0;

  double z_at(double s) const { return height[0] + height[1] * s + height[2] * s * s; }
  double lateral_at(double s) const { return lateral[0] + lateral[1] * s; }
  Point2 ground_point(double s) const {
    return origin + direction * s + left_normal(direction) * lateral_at(s);
  }
};

inline constexpr double kMinHorizontalSpread = 0.05;

/// Dominant horizontal direction of a point cloud (unit eigenvector of the
/// scatter matrix for its larger eigenvalue).
inline Vec2 principal_direction(std::span<const SensorSample> samples) {
  double mx = 0.0, my = 0.0;
  for (const auto& s : samples) {
    mx += s.pos.x;
    my += s.pos.y;
  }
  mx /= static_cast<double>(samples.size());
  my /= static_cast<double>(samples.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& s : samples) {
    const double dx = s.pos.x - mx;
    const double dy = s.pos.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double half_gap = 0.5 * (sxx - syy);
  const double lambda = 0.5 * (sxx + syy) + std::sqrt(half_gap * half_gap + sxy * sxy);
  // Two algebraically equivalent eigenvectors; take the better-conditioned one.
  const Vec2 u{lambda - syy, sxy};
  const Vec2 w{sxy, lambda - sxx};
  Vec2 dir = dot(u, u) >= dot(w, w) ? u : w;
  const double len = norm(dir);
  if (!(len > 0.0)) return {1.0, 0.0};
  return dir * (1.0 / len);
}

inline TrajectoryFit fit_trajectory(const Track& track, const TimeWindow& window) {
  const auto samples = track.window(window.t_start, window.t_end);
  if (samples.size() < 3) {
    throw Error(Errc::kInsufficientSamples,
                "trajectory fit needs at least 3 samples, got " + std::to_string(samples.size()),
                track.sensor_id());
  }
  TrajectoryFit fit;
  fit.direction = principal_direction(samples);
  if (dot(samples.back().pos.xy() - samples.front().pos.xy(), fit.direction) < 0.0) {
    fit.direction = -fit.direction;
  }
  fit.origin = samples.front().pos.xy();
  fit.window = {samples.front().t, samples.back().t};
  fit.n_samples = samples.size();

  std::vector<std::array<double, 3>> quad_rows;
  std::vector<std::array<double, 2>> line_rows;
  std::vector<double> heights, lats;
  quad_rows.reserve(samples.size());
  line_rows.reserve(samples.size());
  double s_min = 0.0, s_max = 0.0;
  for (const auto& smp : samples) {
    const Vec2 d = smp.pos.xy() - fit.origin;
    const double s = dot(d, fit.direction);
    s_min = std::min(s_min, s);
    s_max = std::max(s_max, s);
    quad_rows.push_back({1.0, s, s * s});
    line_rows.push_back({1.0, s});
    heights.push_back(smp.pos.z);
    lats.push_back(cross(fit.direction, d));
  }
  if (s_max - s_min < kMinHorizontalSpread) {
    throw Error(Errc::kIllConditioned, "horizontal spread of fit window below 0.05 m",
                track.sensor_id());
  }
  fit.s_end = quad_rows.back()[1];
  fit.height = solve_least_squares<3>(quad_rows, heights);
  fit.lateral = solve_least_squares<2>(line_rows, lats);

  double ss_z = 0.0, ss_l = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double s = quad_rows[i][1];
    const double rz = heights[i] - fit.z_at(s);
    const double rl = lats[i] - fit.lateral_at(s);
    ss_z += rz * rz;
    ss_l += rl * rl;
  }
  const auto n = static_cast<double>(samples.size());
  fit.rms_residual = std::sqrt(ss_z / n);
  fit.lateral_rms = std::sqrt(ss_l / n);
  return fit;
}

/// Maximal bounce-free windows. A bounce is a sample that is a local minimum
/// of height where the central-difference vertical velocity turns from
/// negative (sample before) to positive (sample after), and whose height is
/// below two ball radii plus the vertical travel in one sample period (the
/// sample nearest a steep pitch can be that far off the ground). The bounce
/// sample itself belongs to neither window, since it may be on either side
/// of the contact.
inline std::vector<TimeWindow> bounce_split(const Track& track, double ball_radius) {
  const auto& s = track.samples();
  const std::size_t n = s.size();
  if (n < 4) {
    throw Error(Errc::kInsufficientSamples, "bounce detection needs at least 4 samples",
                track.sensor_id());
  }
  const auto vz = [&](std::size_t i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? i : i + 1;
    return (s[hi].pos.z - s[lo].pos.z) / (s[hi].t - s[lo].t);
  };

  std::vector<TimeWindow> windows;
  std::size_t start = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double z = s[i].pos.z;
    const bool minimum = z <= s[i - 1].pos.z && z <= s[i + 1].pos.z &&
                         (z < s[i - 1].pos.z || z < s[i + 1].pos.z);
    if (!minimum) continue;
    const double v_in = vz(i - 1);
    const double v_out = vz(i + 1);
    if (!(v_in < 0.0 && v_out > 0.0)) continue;
    const double dt = std::max(s[i].t - s[i - 1].t, s[i + 1].t - s[i].t);
    if (!(z < 2.0 * ball_radius + std::max(-v_in, v_out) * dt)) continue;
    if (i == start) continue;  // back-to-back minima: keep the window non-empty
    windows.push_back({s[start].t, s[i - 1].t});
    start = i + 1;
  }
  windows.push_back({s[start].t, s[n - 1].t});
  return windows;
}

/// Index of an abrupt horizontal velocity change (bat or pad contact), from
/// velocities averaged over `span` samples either side. Returns the sample
/// nearest the contact; samples before it and after it are each clean.
inline constexpr double kContactSpeedChange = 5.0;

inline std::optional<std::size_t> find_contact(const Track& track, std::size_t span = 3) {
  const auto& s = track.samples();
  if (s.size() < 2 * span + 1) return std::nullopt;
  std::optional<std::size_t> best;
  double best_change = kContactSpeedChange;
  for (std::size_t i = span; i + span < s.size(); ++i) {
    const Vec2 before = (s[i].pos.xy() - s[i - span].pos.xy()) * (1.0 / (s[i].t - s[i - span].t));
    const Vec2 after = (s[i + span].pos.xy() - s[i].pos.xy()) * (1.0 / (s[i + span].t - s[i].t));
    const double change = norm(after - before);
    if (change > best_change) {
      best_change = change;
      best = i;
    } else if (best) {
      // Past the peak of the first contact.
      if (change < kContactSpeedChange) break;
    }
  }
  return best;
}

inline constexpr double kMinPlaneApproach = 1e-9;

/// Extends the fitted flight to the stump plane x = zone.plane_x and calls
/// hitting when the ball center is within the widened zone there. A negative
/// height at the plane means the ball would have pitched again first, which
/// is reported as missing with the `second_bounce` flag. The circular-arc drop
/// from the osculating circle at the window end is recorded for comparison
/// only.
inline DecisionEvent project_to_stumps(const TrajectoryFit& fit, const StumpZone& zone) {
  const Vec2 nrm = left_normal(fit.direction);
  // x(s) = origin.x + direction.x s + nrm.x (p + q s)
  const double x0 = fit.origin.x + nrm.x * fit.lateral[0];
  const double dxds = fit.direction.x + nrm.x * fit.lateral[1];
  if (!(std::abs(dxds) > kMinPlaneApproach)) {
    throw Error(Errc::kNeverReaches, "flight runs parallel to the stump plane");
  }
  const double s_star = (zone.plane_x - x0) / dxds;
  if (!(s_star > 0.0)) {
    throw Error(Errc::kNeverReaches, "stump plane is behind the fitted flight");
  }
  const double c = fit.height[2];
  const double z = fit.z_at(s_star);
  if (c >= 0.0 && z < 0.0) {
    throw Error(Errc::kNeverReaches, "fitted flight is not ballistic and meets the ground");
  }
  const Point2 ground = fit.ground_point(s_star);

  const bool second_bounce = z < 0.0;
  const bool within = std::abs(ground.y - zone.center_y) <= zone.half_width && z >= 0.0 &&
                      z <= zone.top_z;

  DecisionEvent ev;
  ev.t = fit.window.t_end;
  ev.kind = DecisionKind::kLbwProjection;
  ev.verdict = within ? Verdict::kHitting : Verdict::kMissing;
  ev.measurements = {
      {"intercept_x", zone.plane_x},
      {"intercept_y", ground.y},
      {"intercept_z", z},
      {"s_star", s_star},
      {"second_bounce", second_bounce ? 1.0 : 0.0},
      {"zone_center_y", zone.center_y},
      {"zone_half_width", zone.half_width},
      {"zone_top_z", zone.top_z},
      {"a", fit.height[0]},
      {"b", fit.height[1]},
      {"c", fit.height[2]},
      {"p", fit.lateral[0]},
      {"q", fit.lateral[1]},
      {"origin_x", fit.origin.x},
      {"origin_y", fit.origin.y},
      {"dir_x", fit.direction.x},
      {"dir_y", fit.direction.y},
      {"window_start", fit.window.t_start},
      {"window_end", fit.window.t_end},
      {"n_samples", static_cast<double>(fit.n_samples)},
      {"rms_residual", fit.rms_residual},
      {"lateral_rms", fit.lateral_rms},
  };
  if (c != 0.0) {
    const double slope = fit.height[1] + 2.0 * c * fit.s_end;
    const double radius = std::pow(1.0 + slope * slope, 1.5) / std::abs(2.0 * c);
    const double run = s_star - fit.s_end;
    if (std::isfinite(radius) && run >= 0.0 && run <= radius) {
      ev.measurements.push_back({"arc_radius", radius});
      ev.measurements.push_back({"arc_horizontal", run});
      ev.measurements.push_back({"arc_drop", arc_drop(radius, run)});
    }
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Whole-delivery orchestration

/// The samples belonging to one delivery.
struct DeliveryLog {
  int over = 1;
  BowlingEnd end = BowlingEnd::kNorth;
  double start_t = 0.0;
  std::optional<SensorSample> foot;
  std::vector<const Track*> players;
  Track ball;
};

struct DecisionFailure {
  DecisionKind kind = DecisionKind::kNoBall;
  Errc code = Errc::kInvalidArgument;
  std::string message;
  double t = 0.0;

  friend bool operator==(const DecisionFailure&, const DecisionFailure&) = default;
};

struct DeliveryDecisions {
  std::vector<DecisionEvent> events;     // ordered by t, then kind
  std::vector<DecisionFailure> failures;
};

/// Player positions at `t`: the sample at t when there is one, interpolated
/// when t falls inside the track, otherwise the nearest end sample.
inline std::vector<SensorSample> players_at(std::span<const Track* const> tracks, double t) {
  std::vector<SensorSample> out;
  for (const Track* tr : tracks) {
    if (tr == nullptr || tr->empty()) continue;
    Point3 pos;
    if (tr->size() >= 2 && t >= tr->front().t && t <= tr->back().t) {
      pos = position_at(*tr, t);
    } else {
      pos = t < tr->front().t ? tr->front().pos : tr->back().pos;
    }
    out.push_back({t, tr->sensor_id(), SensorKind::kPlayer, pos});
  }
  return out;
}

inline DeliveryDecisions decide_delivery(const GroundLayout& layout, const FieldingRule& rule,
                                         const DeliveryLog& log) {
  DeliveryDecisions out;
  const auto fail = [&](DecisionKind kind, const Error& e, double t) {
    out.failures.push_back({kind, e.code(), e.what(), t});
  };

  const double t_foot = log.foot ? log.foot->t : log.start_t;
  if (log.foot) {
    try {
      out.events.push_back(detect_no_ball(crease_frame(layout, log.end), *log.foot));
    } catch (const Error& e) {
      fail(DecisionKind::kNoBall, e, t_foot);
    }
  } else {
    fail(DecisionKind::kNoBall, Error(Errc::kMissingInput, "delivery has no bowler_foot sample"),
         t_foot);
  }

  try {
    const auto players = players_at(log.players, t_foot);
    out.events.push_back(check_fielding(layout, rule, players, log.over, t_foot));
  } catch (const Error& e) {
    fail(DecisionKind::kFieldingViolation, e, t_foot);
  }

  const double t_ball = log.ball.empty() ? t_foot : log.ball.back().t;
  try {
    if (log.ball.size() < 4) {
      throw Error(Errc::kInsufficientSamples, "delivery has fewer than 4 ball samples",
                  log.ball.sensor_id());
    }
    // Flight after a bat or pad contact is not part of the projected path.
    Track flight(log.ball.sensor_id());
    const auto contact = find_contact(log.ball);
    const std::size_t keep = contact ? *contact : log.ball.size();
    for (std::size_t i = 0; i < keep; ++i) flight.ingest(log.ball.samples()[i]);

    const auto windows = bounce_split(flight, layout.ball_radius);
    const auto fit = fit_trajectory(flight, windows.back());
    out.events.push_back(project_to_stumps(fit, stump_zone(layout, log.end)));
  } catch (const Error& e) {
    fail(DecisionKind::kLbwProjection, e, t_ball);
  }

  std::stable_sort(out.events.begin(), out.events.end(), [](const auto& a, const auto& b) {
    if (a.t != b.t) return a.t < b.t;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return out;
}

}  // namespace aware_ground
