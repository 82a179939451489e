#pragma once

// Simulated matches shared by the pipeline, command-line and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include "aware_ground.hpp"
#include "support/oracles.hpp"

namespace fixture {

using namespace aware_ground;

/// Nine fielders inside the ring plus a keeper, at fixed spots.
inline FieldingSpec standard_field(int over) {
  FieldingSpec f;
  f.over_number = over;
  const Point2 spots[] = {{-20, 15}, {-5, 22}, {12, 18}, {25, 5},  {20, -14},
                          {3, -25},  {-15, -20}, {-26, -3}, {0, 10}};
  for (int i = 0; i < 9; ++i) f.placements.push_back({"f" + std::to_string(i + 1), spots[i]});
  f.placements.push_back({"keeper", {12.5, 0.3}, PlayerRole::kKeeper});
  return f;
}

inline Scenario random_scenario(const GroundLayout& g, std::mt19937_64& rng, int over) {
  Scenario sc;
  sc.delivery = oracle::random_lbw_delivery(g, rng);
  sc.fielding = standard_field(over);
  if (over % 2 == 0) sc.score = ScoreNote{"bat" + std::to_string(over % 3), over % 7};
  return sc;
}

/// `deliveries` consecutive simulated deliveries in log order, spaced the
/// way the simulate command spaces them.
inline std::vector<Record> simulated_match(const GroundLayout& g, int deliveries, std::uint64_t seed,
                                           double noise = 0.005) {
  std::mt19937_64 rng(seed);
  std::vector<Record> out;
  double next_free = 0.0;
  for (int d = 1; d <= deliveries; ++d) {
    SimOptions opt{100.0, seed + static_cast<std::uint64_t>(d), noise,
                   std::max((d - 1) * cli::kDeliverySpacing, next_free)};
    const auto recs = cli::delivery_records(g, random_scenario(g, rng, 1 + (d - 1) / 6), d, opt);
    out.insert(out.end(), recs.begin(), recs.end());
    next_free = record_time(recs.back()) + 1.0;
  }
  return out;
}

inline std::string serialize_all(const std::vector<Record>& records) {
  std::string s;
  for (const auto& r : records) {
    s += serialize_record(r);
    s.push_back('\n');
  }
  return s;
}

}  // namespace fixture
