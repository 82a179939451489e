#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aware_ground/error.hpp"
#include "aware_ground/geometry.hpp"
#include "aware_ground/ground_model.hpp"

namespace aware_ground {

enum class SensorKind { kBall, kBowlerFoot, kPlayer };

inline constexpr std::string_view sensor_kind_name(SensorKind k) {
  switch (k) {
    case SensorKind::kBall: return "ball";
    case SensorKind::kBowlerFoot: return "bowler_foot";
    case SensorKind::kPlayer: return "player";
  }
  return "?";
}

inline std::optional<SensorKind> parse_sensor_kind(std::string_view s) {
  if (s == "ball") return SensorKind::kBall;
  if (s == "bowler_foot") return SensorKind::kBowlerFoot;
  if (s == "player") return SensorKind::kPlayer;
  return std::nullopt;
}

struct SensorSample {
  double t = 0.0;
  std::string sensor_id;
  SensorKind kind = SensorKind::kBall;
  Point3 pos;

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

struct RangeMeasurement {
  std::string access_point_id;
  double range = 0.0;
};

struct RangeSet {
  double t = 0.0;
  std::string sensor_id;
  std::vector<RangeMeasurement> ranges;
};

struct PositionFix {
  Point2 pos;
  double residual = 0.0;  // RMS range residual, meters
  int iterations = 0;
};

namespace detail {

struct Anchor {
  Point2 pos;
  double range;
};

inline double range_cost(std::span<const Anchor> anchors, Point2 p) {
  double sum = 0.0;
  for (const auto& a : anchors) {
    const double r = distance(p, a.pos) - a.range;
    sum += r * r;
  }
  return sum;
}

}  // namespace detail

inline constexpr int kTrilaterationMaxIterations = 100;
inline constexpr double kTrilaterationStepTolerance = 1e-9;
inline constexpr double kCollinearAnchorTolerance = 1e-6;

/// Least-squares position from ranges to known access points.
///
/// Damped Gauss-Newton on sum_i (|p - ap_i| - range_i)^2. Ranges are first put
/// in access-point id order, so the result does not depend on input order.
/// Starts at the anchor centroid; each step is halved until the cost does not
/// increase; stops once the accepted step is below 1e-9 m. Hitting the
/// iteration cap is an error rather than a returned estimate.
inline PositionFix trilaterate(const GroundLayout& layout, const RangeSet& rs) {
  if (rs.ranges.size() < 3) {
    throw Error(Errc::kInsufficientAnchors,
                "need at least 3 ranges, got " + std::to_string(rs.ranges.size()), rs.sensor_id);
  }
  std::vector<const RangeMeasurement*> sorted;
  sorted.reserve(rs.ranges.size());
  for (const auto& m : rs.ranges) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return a->access_point_id < b->access_point_id;
  });

  std::vector<detail::Anchor> anchors;
  std::vector<Point2> anchor_pos;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& m = *sorted[i];
    if (i > 0 && sorted[i - 1]->access_point_id == m.access_point_id) {
      throw Error(Errc::kInvalidArgument, "duplicate access point " + m.access_point_id,
                  m.access_point_id);
    }
    const auto* ap = layout.find_access_point(m.access_point_id);
    if (ap == nullptr) {
      throw Error(Errc::kInvalidArgument, "unknown access point " + m.access_point_id,
                  m.access_point_id);
    }
    if (!(m.range > 0.0) || !std::isfinite(m.range)) {
      throw Error(Errc::kInvalidArgument, "ranges must be positive and finite",
                  m.access_point_id);
    }
    anchors.push_back({ap->pos, m.range});
    anchor_pos.push_back(ap->pos);
  }
  if (collinear_spread(anchor_pos) < kCollinearAnchorTolerance) {
    throw Error(Errc::kDegenerateGeometry, "access points are collinear", rs.sensor_id);
  }

  Point2 p{0.0, 0.0};
  for (const auto& a : anchors) {
    p.x += a.pos.x;
    p.y += a.pos.y;
  }
  p.x /= static_cast<double>(anchors.size());
  p.y /= static_cast<double>(anchors.size());

  double cost = detail::range_cost(anchors, p);
  for (int iter = 1; iter <= kTrilaterationMaxIterations; ++iter) {
    // Normal equations of the linearized problem, J^T J dp = -J^T r.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
    for (const auto& a : anchors) {
      const Vec2 d = p - a.pos;
      const double len = norm(d);
      if (len == 0.0) continue;
      const Vec2 j = d * (1.0 / len);
      const double r = len - a.range;
      a11 += j.x * j.x;
      a12 += j.x * j.y;
      a22 += j.y * j.y;
      g1 += j.x * r;
      g2 += j.y * r;
    }
    const double det = a11 * a22 - a12 * a12;
    if (!(std::abs(det) > 1e-300)) {
      throw Error(Errc::kDegenerateGeometry, "singular normal equations", rs.sensor_id);
    }
    const Vec2 step{-(a22 * g1 - a12 * g2) / det, -(a11 * g2 - a12 * g1) / det};

    double scale = 1.0;
    Point2 next = p + step;
    double next_cost = detail::range_cost(anchors, next);
    while (next_cost > cost && scale > 1e-12) {
      scale *= 0.5;
      next = p + step * scale;
      next_cost = detail::range_cost(anchors, next);
    }
    if (next_cost > cost) {
      // No descent along the Gauss-Newton direction: p is stationary.
      return {p, std::sqrt(cost / static_cast<double>(anchors.size())), iter};
    }
    const double moved = norm(step * scale);
    p = next;
    cost = next_cost;
    if (moved < kTrilaterationStepTolerance) {
      return {p, std::sqrt(cost / static_cast<double>(anchors.size())), iter};
    }
  }
  throw Error(Errc::kNoConvergence, "trilateration did not converge in 100 iterations",
              rs.sensor_id);
}

/// Time-ordered samples of one sensor.
class Track {
 public:
  Track() = default;
  explicit Track(std::string sensor_id) : sensor_id_(std::move(sensor_id)) {}

  const std::string& sensor_id() const noexcept { return sensor_id_; }
  const std::vector<SensorSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const SensorSample& front() const { return samples_.front(); }
  const SensorSample& back() const { return samples_.back(); }

  /// Appends `s` iff its timestamp is strictly after the last one.
  void ingest(SensorSample s) {
    if (s.sensor_id != sensor_id_) {
      throw Error(Errc::kInvalidArgument,
                  "sample for " + s.sensor_id + " offered to track " + sensor_id_, s.sensor_id);
    }
    if (!std::isfinite(s.t) || s.t < 0.0 || !is_finite(s.pos)) {
      throw Error(Errc::kInvalidArgument, "sample has non-finite or negative fields", s.sensor_id);
    }
    if (!samples_.empty() && !(s.t > samples_.back().t)) {
      throw Error(Errc::kOutOfOrder, "sample at t=" + config::format_double(s.t) +
                                         " does not follow t=" + config::format_double(samples_.back().t),
                  s.sensor_id);
    }
    samples_.push_back(std::move(s));
  }

  /// Samples with t in [t_start, t_end].
  std::span<const SensorSample> window(double t_start, double t_end) const {
    const auto lo = std::lower_bound(samples_.begin(), samples_.end(), t_start,
                                     [](const SensorSample& s, double t) { return s.t < t; });
    const auto hi = std::upper_bound(lo, samples_.end(), t_end,
                                     [](double t, const SensorSample& s) { return t < s.t; });
    return {lo, hi};
  }

 private:
  std::string sensor_id_;
  std::vector<SensorSample> samples_;
};

inline Track ingest_sample(Track track, SensorSample s) {
  track.ingest(std::move(s));
  return track;
}

/// Linear interpolation between the bracketing samples. Never extrapolates.
inline Point3 position_at(const Track& track, double t) {
  const auto& s = track.samples();
  if (s.size() < 2) {
    throw Error(Errc::kInsufficientSamples, "interpolation needs at least 2 samples",
                track.sensor_id());
  }
  if (!(t >= s.front().t && t <= s.back().t)) {
    throw Error(Errc::kOutOfRange, "t=" + config::format_double(t) + " outside track span",
                track.sensor_id());
  }
  const auto hi = std::lower_bound(s.begin(), s.end(), t,
                                   [](const SensorSample& x, double v) { return x.t < v; });
  if (hi->t == t) return hi->pos;
  const auto lo = hi - 1;
  const double u = (t - lo->t) / (hi->t - lo->t);
  // Clamped per axis so that rounding never overshoots a knot.
  const auto lerp = [u](double a, double b) {
    return std::clamp(a + (b - a) * u, std::min(a, b), std::max(a, b));
  };
  return {lerp(lo->pos.x, hi->pos.x), lerp(lo->pos.y, hi->pos.y), lerp(lo->pos.z, hi->pos.z)};
}

}  // namespace aware_ground
