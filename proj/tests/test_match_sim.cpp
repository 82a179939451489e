#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aware_ground/match_sim.hpp"
#include "support/oracles.hpp"

using namespace aware_ground;

namespace {

DeliverySpec full_toss() {
  DeliverySpec d;
  d.release_pos = {-9.0, 0.0, 2.2};
  d.release_vel = {30.0, 0.0, 1.5};
  d.foot_landing = {-8.9, 0.1};
  return d;
}

DeliverySpec good_length() {
  DeliverySpec d;
  d.release_pos = {-9.0, 0.1, 2.1};
  d.release_vel = {32.0, -0.05, -3.2};
  d.foot_landing = {-8.95, 0.1};
  return d;
}

std::vector<SensorSample> ball_samples(const SimulatedDelivery& sim) {
  std::vector<SensorSample> out;
  for (const auto& s : sim.samples) {
    if (s.kind == SensorKind::kBall) out.push_back(s);
  }
  return out;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::kInvalidArgument;
}

}  // namespace

TEST(SimulateDelivery, FullTossSamplesAreBallistic) {
  const auto g = default_layout();
  const auto spec = full_toss();
  const auto sim = simulate_delivery(g, spec, {100, 0, 0.0, 0.0});
  EXPECT_TRUE(sim.truth.bounce_times.empty());
  EXPECT_EQ(sim.truth.end_reason, FlightEnd::kStumpPlane);
  const auto balls = ball_samples(sim);
  ASSERT_GT(balls.size(), 50u);
  for (const auto& s : balls) {
    const double t = s.t;
    EXPECT_NEAR(s.pos.x, spec.release_pos.x + spec.release_vel.x * t, 1e-9);
    EXPECT_NEAR(s.pos.y, spec.release_pos.y + spec.release_vel.y * t, 1e-9);
    EXPECT_NEAR(s.pos.z, spec.release_pos.z + spec.release_vel.z * t - 0.5 * 9.81 * t * t, 1e-9);
  }
  EXPECT_LT(balls.back().pos.x, stump_zone(g, BowlingEnd::kNorth).plane_x);
}

TEST(SimulateDelivery, FootSampleFirstAtRelease) {
  const auto sim = simulate_delivery(default_layout(), good_length(), {100, 0, 0.0, 3.0});
  ASSERT_FALSE(sim.samples.empty());
  const auto& foot = sim.samples.front();
  EXPECT_EQ(foot.kind, SensorKind::kBowlerFoot);
  EXPECT_EQ(foot.t, 3.0);
  EXPECT_EQ(foot.pos, (Point3{-8.95, 0.1, 0.0}));
  EXPECT_EQ(sim.samples[1].t, 3.0);
}

TEST(SimulateDelivery, DeterministicAndSeedIsolated) {
  const auto g = default_layout();
  const auto a = simulate_delivery(g, good_length(), {100, 7, 0.005, 0});
  const auto b = simulate_delivery(g, good_length(), {100, 7, 0.005, 0});
  const auto c = simulate_delivery(g, good_length(), {100, 8, 0.005, 0});
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  const auto z1 = simulate_delivery(g, good_length(), {100, 1, 0.0, 0});
  const auto z2 = simulate_delivery(g, good_length(), {100, 2, 0.0, 0});
  EXPECT_EQ(z1.samples, z2.samples);
}

TEST(SimulateDelivery, InvalidSpecs) {
  const auto g = default_layout();
  auto d = good_length();
  d.release_vel = {0, 0, 0};
  try {
    simulate_delivery(g, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidSpec);
    EXPECT_EQ(e.subject(), "release_vel");
  }
  d = good_length();
  d.restitution = 1.5;
  EXPECT_EQ(code_of([&] { simulate_delivery(g, d); }), Errc::kInvalidSpec);
  d = good_length();
  d.release_pos.z = 0.0;
  EXPECT_EQ(code_of([&] { simulate_delivery(g, d); }), Errc::kInvalidSpec);
  d = good_length();
  d.pad_x = 12.0;
  EXPECT_EQ(code_of([&] { simulate_delivery(g, d); }), Errc::kInvalidSpec);
  EXPECT_EQ(code_of([&] { simulate_delivery(g, good_length(), {5, 0, 0, 0}); }), Errc::kInvalidSpec);
  EXPECT_EQ(code_of([&] { simulate_delivery(g, good_length(), {2000, 0, 0, 0}); }),
            Errc::kInvalidSpec);
  EXPECT_EQ(code_of([&] { simulate_delivery(g, good_length(), {100, 0, -1, 0}); }),
            Errc::kInvalidSpec);
}

TEST(SimulateDelivery, HorizontalVelocityConstantBetweenBounces) {
  const auto g = default_layout();
  auto spec = good_length();
  spec.spin_deviation = 0.4;
  const auto sim = simulate_delivery(g, spec, {100, 0, 0.0, 0});
  ASSERT_EQ(sim.truth.bounce_times.size(), 1u);
  const auto balls = ball_samples(sim);
  const double tb = sim.truth.bounce_times[0];
  for (std::size_t i = 2; i < balls.size(); ++i) {
    const auto& a = balls[i - 2];
    const auto& b = balls[i - 1];
    const auto& c = balls[i];
    if ((a.t < tb) != (c.t < tb)) continue;  // pair straddles the bounce
    const double dt1 = b.t - a.t, dt2 = c.t - b.t;
    ASSERT_NEAR((b.pos.x - a.pos.x) / dt1, (c.pos.x - b.pos.x) / dt2, 1e-9);
    ASSERT_NEAR((b.pos.y - a.pos.y) / dt1, (c.pos.y - b.pos.y) / dt2, 1e-9);
  }
}

TEST(SimulateDelivery, RestitutionAtBounce) {
  const auto g = default_layout();
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto spec = oracle::random_lbw_delivery(g, rng);
    const auto truth = simulate_truth(g, spec);
    ASSERT_GE(truth.segments.size(), 2u);
    const auto& before = truth.segments[0];
    const auto& after = truth.segments[1];
    EXPECT_EQ(before.t1, after.t0);
    const double vin = before.velocity_at(before.t1).z;
    EXPECT_NEAR(after.v0.z, -spec.restitution * vin, 1e-9);
    EXPECT_NEAR(after.v0.x, before.v0.x, 1e-12);
    EXPECT_NEAR(after.v0.y, before.v0.y + spec.spin_deviation.value_or(0.0), 1e-12);
    EXPECT_NEAR(before.at(before.t1).z, g.ball_radius, 1e-9);
  }
}

TEST(SimulateDelivery, SegmentsAreContiguousAndBallistic) {
  const auto g = default_layout();
  auto spec = good_length();
  spec.bat_contact = BatContact{0.7, {-20, 10, 8}};
  spec.release_vel = {25, 0, -2};
  const auto truth = simulate_truth(g, spec);
  ASSERT_GE(truth.segments.size(), 3u);
  for (std::size_t i = 1; i < truth.segments.size(); ++i) {
    EXPECT_EQ(truth.segments[i - 1].t1, truth.segments[i].t0);
    const auto end = truth.segments[i - 1].at(truth.segments[i - 1].t1);
    EXPECT_NEAR(distance(end, truth.segments[i].p0), 0.0, 1e-9);
  }
  EXPECT_FALSE(truth.stump_intercept.has_value());
  EXPECT_LE(truth.end_time, 0.7 + kMaxPostContactTime + 1e-12);
}

TEST(SimulateDelivery, NoiseStatistics) {
  const auto g = default_layout();
  const double sigma = 0.005;
  std::array<double, 3> sum{}, sum2{};
  std::size_t n = 0;
  for (std::uint64_t seed = 1; n < 10000; ++seed) {
    const auto clean = ball_samples(simulate_delivery(g, full_toss(), {100, seed, 0.0, 0}));
    const auto noisy = ball_samples(simulate_delivery(g, full_toss(), {100, seed, sigma, 0}));
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const double e[3] = {noisy[i].pos.x - clean[i].pos.x, noisy[i].pos.y - clean[i].pos.y,
                           noisy[i].pos.z - clean[i].pos.z};
      for (int k = 0; k < 3; ++k) {
        sum[k] += e[k];
        sum2[k] += e[k] * e[k];
      }
      ++n;
    }
  }
  for (int k = 0; k < 3; ++k) {
    const double mean = sum[k] / n;
    const double sd = std::sqrt(sum2[k] / n - mean * mean);
    EXPECT_GE(sd, 0.9 * sigma) << k;
    EXPECT_LE(sd, 1.1 * sigma) << k;
  }
}

TEST(SimulateDelivery, EndsAtPad) {
  const auto g = default_layout();
  auto spec = good_length();
  spec.pad_x = 8.0;
  const auto sim = simulate_delivery(g, spec, {100, 0, 0.0, 0});
  EXPECT_EQ(sim.truth.end_reason, FlightEnd::kPad);
  EXPECT_LT(ball_samples(sim).back().pos.x, 8.0);
  ASSERT_TRUE(sim.truth.stump_intercept.has_value());
  EXPECT_EQ(sim.truth.stump_intercept->x, 10.06);
}

TEST(SimulateFielding, PassThroughAndErrors) {
  const auto g = default_layout();
  FieldingSpec f;
  for (int i = 0; i < 9; ++i) f.placements.push_back({"f" + std::to_string(i), {i * 3.0, -i * 2.0}});
  const auto s = simulate_fielding(g, f, 4.5);
  ASSERT_EQ(s.size(), 9u);
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(s[i].sensor_id, "f" + std::to_string(i));
    EXPECT_EQ(s[i].pos, (Point3{i * 3.0, -i * 2.0, 0.0}));
    EXPECT_EQ(s[i].kind, SensorKind::kPlayer);
    EXPECT_EQ(s[i].t, 4.5);
  }
  EXPECT_TRUE(simulate_fielding(g, FieldingSpec{}, 0).empty());
  f.placements.push_back({"f3", {0, 0}, PlayerRole::kKeeper});
  EXPECT_EQ(code_of([&] { simulate_fielding(g, f, 0); }), Errc::kInvalidSpec);
  f.placements.back().player_id = "k";
  EXPECT_NO_THROW(simulate_fielding(g, f, 0));
  f.placements.push_back({"f9", {0, 0}});
  EXPECT_EQ(code_of([&] { simulate_fielding(g, f, 0); }), Errc::kInvalidSpec);
}

TEST(ScenarioConfig, MinimalDocumentDefaults) {
  const auto sc = scenario_from_config("release.pos = -9, 0, 2.1\nrelease.vel = 30, 0, -3\n");
  EXPECT_EQ(sc.delivery.restitution, 0.7);
  EXPECT_EQ(sc.sample_hz, 100.0);
  EXPECT_EQ(sc.delivery.foot_landing, (Point2{-9, 0}));
  EXPECT_EQ(sc.delivery.end, BowlingEnd::kNorth);
  EXPECT_EQ(sc.fielding.over_number, 1);
  EXPECT_FALSE(sc.delivery.bat_contact.has_value());
  EXPECT_FALSE(sc.score.has_value());
}

TEST(ScenarioConfig, Errors) {
  const std::string base = "release.pos = -9, 0, 2.1\nrelease.vel = 30, 0, -3\n";
  try {
    scenario_from_config(base + "restitution = 1.5\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidSpec);
    EXPECT_EQ(e.subject(), "restitution");
  }
  try {
    scenario_from_config(base + "\nbogus = 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kParseError);
    EXPECT_EQ(e.subject(), "line 4");
  }
  EXPECT_EQ(code_of([] { scenario_from_config("release.pos = 1,2,3\n"); }), Errc::kInvalidSpec);
  EXPECT_EQ(code_of([&] { scenario_from_config(base + "end = east\n"); }), Errc::kParseError);
  EXPECT_EQ(code_of([&] { scenario_from_config(base + "bat_contact.t = 0.5\n"); }),
            Errc::kInvalidSpec);
  EXPECT_EQ(code_of([&] { scenario_from_config(base + "fielder.a = 1,1\nfielder.a = 2,2\n"); }),
            Errc::kParseError);
  EXPECT_EQ(code_of([&] { scenario_from_config(base + "fielder.a = 1,1\nkeeper.a = 2,2\n"); }),
            Errc::kInvalidSpec);
}

TEST(ScenarioConfig, RoundTrip) {
  Scenario sc;
  sc.delivery = good_length();
  sc.delivery.spin_deviation = -0.25;
  sc.delivery.pad_x = 8.5;
  sc.delivery.bat_contact = BatContact{0.61, {-12.5, 3.25, 6.0}};
  sc.delivery.end = BowlingEnd::kNorth;
  sc.delivery.ball_id = "ball7";
  sc.sample_hz = 250;
  sc.fielding.over_number = 12;
  sc.fielding.placements = {{"slip", {12.1, 2.2}}, {"bowl", {-9.5, 0.4}, PlayerRole::kBowler},
                            {"wk", {11.5, 0}, PlayerRole::kKeeper}};
  sc.score = ScoreNote{"opener", 4};
  const auto text = serialize_scenario(sc);
  EXPECT_EQ(scenario_from_config(text), sc);
  EXPECT_EQ(serialize_scenario(scenario_from_config(text)), text);
}
