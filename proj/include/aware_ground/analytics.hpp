#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aware_ground/error.hpp"
#include "aware_ground/geometry.hpp"
#include "aware_ground/positioning.hpp"

namespace aware_ground {

struct BattingRecord {
  std::string player_id;
  long long runs = 0;
  long long balls_faced = 0;
};

inline constexpr double kMetersPerSecondToKmh = 3.6;

/// Mean speed over the samples inside the window: summed 3D displacement over
/// the time between the first and last of them.
inline double ball_speed(const Track& track, double t_start, double t_end) {
  const auto s = track.window(t_start, t_end);
  if (s.size() < 2) {
    throw Error(Errc::kInsufficientSamples, "speed needs at least 2 samples in the window",
                track.sensor_id());
  }
  double path = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) path += distance(s[i - 1].pos, s[i].pos);
  return path / (s.back().t - s.front().t);
}

/// Runs per 100 balls.
inline double strike_rate(const BattingRecord& rec) {
  if (rec.balls_faced <= 0) {
    throw Error(Errc::kNoBallsFaced, "strike rate is undefined with no balls faced", rec.player_id);
  }
  return static_cast<double>(rec.runs) / static_cast<double>(rec.balls_faced) * 100.0;
}

inline constexpr double kStrikePowerWindow = 0.05;

/// Off-the-bat speed: mean ball speed over the 50 ms after contact.
inline double strike_power(const Track& track, double bat_contact_t) {
  return ball_speed(track, bat_contact_t, bat_contact_t + kStrikePowerWindow);
}

/// Occupancy seconds on a square lattice aligned to multiples of cell_size.
class CoverageGrid {
 public:
  CoverageGrid() = default;
  explicit CoverageGrid(double cell_size) : cell_size_(cell_size) {}

  double cell_size() const noexcept { return cell_size_; }
  bool empty() const noexcept { return cells_.empty(); }
  /// Lower-left corner of the lowest occupied cell.
  Point2 origin() const {
    if (cells_.empty()) return {};
    long long min_ix = cells_.begin()->first.first, min_iy = cells_.begin()->first.second;
    for (const auto& [key, _] : cells_) {
      min_ix = std::min(min_ix, key.first);
      min_iy = std::min(min_iy, key.second);
    }
    return {static_cast<double>(min_ix) * cell_size_, static_cast<double>(min_iy) * cell_size_};
  }

  void add(Point2 p, double seconds) {
    const auto ix = static_cast<long long>(std::floor(p.x / cell_size_));
    const auto iy = static_cast<long long>(std::floor(p.y / cell_size_));
    cells_[{ix, iy}] += seconds;
  }

  double occupancy(long long ix, long long iy) const {
    const auto it = cells_.find({ix, iy});
    return it == cells_.end() ? 0.0 : it->second;
  }

  double total() const {
    double sum = 0.0;
    for (const auto& [_, v] : cells_) sum += v;
    return sum;
  }

  /// Occupied cells keyed by global lattice index (floor(x / cell), floor(y / cell)).
  const std::map<std::pair<long long, long long>, double>& cells() const noexcept { return cells_; }

 private:
  double cell_size_ = 1.0;
  std::map<std::pair<long long, long long>, double> cells_;
};

struct PlayerCoverage {
  std::string player_id;
  double distance_covered = 0.0;
  CoverageGrid grid;
};

inline constexpr double kCoverageResampleHz = 10.0;

/// Distance run and time spent per grid cell for each player track. Positions
/// are resampled at 10 Hz from the first sample; each resample is charged
/// with the time until the next one, capped at the end of the track.
inline std::vector<PlayerCoverage> fielder_coverage(std::span<const Track> tracks, double cell_size) {
  if (!(cell_size >= 0.5 && cell_size <= 10.0)) {
    throw Error(Errc::kInvalidArgument, "cell_size must lie in [0.5, 10] m", "cell_size");
  }
  std::vector<PlayerCoverage> out;
  out.reserve(tracks.size());
  const double step = 1.0 / kCoverageResampleHz;
  for (const auto& tr : tracks) {
    PlayerCoverage pc{tr.sensor_id(), 0.0, CoverageGrid(cell_size)};
    const auto& s = tr.samples();
    for (std::size_t i = 1; i < s.size(); ++i) {
      pc.distance_covered += distance(s[i - 1].pos.xy(), s[i].pos.xy());
    }
    if (s.size() == 1) {
      pc.grid.add(s.front().pos.xy(), 0.0);
    } else if (s.size() >= 2) {
      const double t0 = s.front().t;
      const double t1 = s.back().t;
      for (long long k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * step;
        if (t > t1) break;
        const double charge = std::min(step, t1 - t);
        pc.grid.add(position_at(tr, t).xy(), charge);
      }
    }
    out.push_back(std::move(pc));
  }
  return out;
}

}  // namespace aware_ground
