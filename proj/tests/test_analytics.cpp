#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "aware_ground/analytics.hpp"
#include "aware_ground/decision_engine.hpp"
#include "aware_ground/match_sim.hpp"

using namespace aware_ground;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::kInvalidArgument;
}

Track ball_track(const std::vector<SensorSample>& samples) {
  Track tr("ball");
  for (const auto& s : samples) {
    if (s.kind == SensorKind::kBall) tr.ingest(s);
  }
  return tr;
}

Track linear_track(std::string id, Point3 p0, Vec3 v, double t0, double t1, double hz) {
  Track tr(id);
  for (int k = 0;; ++k) {
    const double t = t0 + k / hz;
    if (t > t1 + 1e-12) break;
    const double dt = t - t0;
    tr.ingest({t, id, SensorKind::kPlayer, {p0.x + v.x * dt, p0.y + v.y * dt, p0.z + v.z * dt}});
  }
  return tr;
}

double truth_chord_mean(const ScenarioTruth& truth, std::span<const SensorSample> s) {
  double path = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    path += distance(truth.position_at(s[i - 1].t), truth.position_at(s[i].t));
  }
  return path / (s.back().t - s.front().t);
}

}  // namespace

TEST(BallSpeed, UniformAndStationary) {
  const auto moving = linear_track("b", {0, 0, 1}, {20, 0, 0}, 0.0, 1.0, 100);
  EXPECT_NEAR(ball_speed(moving, 0.0, 1.0), 20.0, 1e-12);
  const auto still = linear_track("b", {3, 4, 0}, {0, 0, 0}, 0.0, 1.0, 100);
  EXPECT_EQ(ball_speed(still, 0.0, 1.0), 0.0);
}

TEST(BallSpeed, NeedsTwoSamples) {
  const auto tr = linear_track("b", {0, 0, 1}, {20, 0, 0}, 0.0, 1.0, 100);
  EXPECT_EQ(code_of([&] { ball_speed(tr, 0.5, 0.505); }), Errc::kInsufficientSamples);
  EXPECT_EQ(code_of([&] { ball_speed(tr, 2.0, 3.0); }), Errc::kInsufficientSamples);
}

TEST(BallSpeed, SimulatedReleaseWithinToleranceOfTruth) {
  const auto g = default_layout();
  DeliverySpec d;
  d.release_pos = {-9.0, 0.1, 2.1};
  // 38.9 m/s (140 km/h) at release, pitching around 5 m from the striker's stumps.
  const double vz = -2.4;
  d.release_vel = {std::sqrt(38.9 * 38.9 - vz * vz), 0.0, vz};
  d.foot_landing = {-8.9, 0.0};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto sim = simulate_delivery(g, d, {100, seed, 0.005, 0.0});
    const double tb = sim.truth.bounce_times.at(0);
    const auto tr = ball_track(sim.samples);
    const double measured = ball_speed(tr, 0.0, tb);
    const double truth = truth_chord_mean(sim.truth, tr.window(0.0, tb));
    ASSERT_NEAR(measured, truth, 0.6) << seed;
    ASSERT_NEAR(truth, 38.9, 0.6);
  }
}

TEST(BallSpeed, RigidMotionAndTimeShiftInvariant) {
  std::mt19937_64 rng(51);
  // Coordinates on a 2^-20 m lattice, so that translation and the
  // quarter-turn below keep every coordinate difference exact. Sample times
  // are dyadic for the same reason.
  std::uniform_int_distribution<int> u(-(1 << 20), 1 << 20);
  const auto q = [&] { return std::ldexp(u(rng), -20); };
  Track tr("b");
  for (int i = 0; i < 50; ++i) tr.ingest({i / 128.0, "b", SensorKind::kBall, {q(), q(), q() + 1}});
  const double base = ball_speed(tr, 0.0, 1.0);
  Track moved("b");
  Track shifted("b");
  for (const auto& s : tr.samples()) {
    moved.ingest({s.t, "b", SensorKind::kBall, {-s.pos.y + 64.0, s.pos.x - 32.0, s.pos.z}});
    shifted.ingest({s.t + 1024.0, "b", SensorKind::kBall, s.pos});
  }
  EXPECT_EQ(ball_speed(moved, 0.0, 1.0), base);
  EXPECT_EQ(ball_speed(shifted, 1024.0, 1025.0), base);
}

TEST(StrikeRate, Examples) {
  EXPECT_EQ(strike_rate({"a", 50, 40}), 125.0);
  EXPECT_EQ(strike_rate({"a", 0, 10}), 0.0);
  EXPECT_EQ(code_of([] { strike_rate({"a", 5, 0}); }), Errc::kNoBallsFaced);
}

TEST(StrikeRate, Scaling) {
  std::mt19937_64 rng(52);
  std::uniform_int_distribution<long long> runs(0, 400), balls(1, 300);
  for (int i = 0; i < 1000; ++i) {
    const BattingRecord r{"a", runs(rng), balls(rng)};
    EXPECT_EQ(strike_rate({"a", 2 * r.runs, r.balls_faced}), 2 * strike_rate(r));
    EXPECT_EQ(strike_rate({"a", r.runs, 2 * r.balls_faced}), strike_rate(r) / 2);
  }
}

TEST(StrikePower, OffTheBatSpeed) {
  const auto g = default_layout();
  DeliverySpec d;
  d.release_pos = {-9.0, 0.0, 2.1};
  d.release_vel = {30.0, 0.0, -3.0};
  d.foot_landing = {-8.9, 0.0};
  d.bat_contact = BatContact{0.55, {-20.0, 15.0, 0.0}};
  const auto sim = simulate_delivery(g, d);
  const auto tr = ball_track(sim.samples);
  const double power = strike_power(tr, 0.55);
  EXPECT_NEAR(power, truth_chord_mean(sim.truth, tr.window(0.55, 0.6)), 1e-9);
  EXPECT_NEAR(power, 25.0, 0.02);
}

TEST(StrikePower, NoSamplesAfterContact) {
  const auto tr = linear_track("b", {0, 0, 1}, {20, 0, 0}, 0.0, 1.0, 100);
  EXPECT_EQ(code_of([&] { strike_power(tr, 1.0); }), Errc::kInsufficientSamples);
  EXPECT_EQ(code_of([&] { strike_power(tr, 5.0); }), Errc::kInsufficientSamples);
}

TEST(StrikePower, UnchangedVelocityMatchesIncomingSpeed) {
  const auto g = default_layout();
  DeliverySpec d;
  d.release_pos = {-9.0, 0.0, 2.1};
  d.release_vel = {30.0, 0.0, -3.0};
  d.foot_landing = {-8.9, 0.0};
  auto plain = simulate_truth(g, d);
  const double tc = 0.55;
  d.bat_contact = BatContact{tc, plain.segment_at(tc).velocity_at(tc)};
  const auto tr = ball_track(simulate_delivery(g, d).samples);
  EXPECT_NEAR(strike_power(tr, tc), ball_speed(tr, tc, tc + kStrikePowerWindow), 1e-12);
  EXPECT_NEAR(strike_power(tr, tc), truth_chord_mean(plain, tr.window(tc, tc + kStrikePowerWindow)), 1e-9);
}

TEST(Coverage, StationaryPlayer) {
  const std::vector<Track> tracks{linear_track("p", {12.3, -4.5, 0}, {0, 0, 0}, 0.0, 10.0, 10)};
  const auto cov = fielder_coverage(tracks, 2.0);
  ASSERT_EQ(cov.size(), 1u);
  EXPECT_EQ(cov[0].player_id, "p");
  EXPECT_EQ(cov[0].distance_covered, 0.0);
  ASSERT_EQ(cov[0].grid.cells().size(), 1u);
  EXPECT_NEAR(cov[0].grid.occupancy(6, -3), 10.0, 1e-9);
  EXPECT_EQ(cov[0].grid.origin(), (Point2{12.0, -6.0}));
}

TEST(Coverage, StraightRun) {
  const std::vector<Track> tracks{linear_track("p", {-50, 10, 0}, {5, 0, 0}, 3.0, 23.0, 10)};
  const auto cov = fielder_coverage(tracks, 5.0);
  EXPECT_NEAR(cov[0].distance_covered, 100.0, 1e-6);
  EXPECT_EQ(cov[0].grid.cells().size(), 21u);
  EXPECT_NEAR(cov[0].grid.total(), 20.0, 1e-9);
}

TEST(Coverage, DisjointPlayersHaveDisjointGrids) {
  const std::vector<Track> tracks{linear_track("a", {-40, -40, 0}, {2, 0, 0}, 0.0, 10.0, 10),
                                  linear_track("b", {-40, 40, 0}, {2, 0, 0}, 0.0, 10.0, 10)};
  const auto cov = fielder_coverage(tracks, 1.0);
  ASSERT_EQ(cov.size(), 2u);
  for (const auto& [key, _] : cov[0].grid.cells()) EXPECT_EQ(cov[1].grid.cells().count(key), 0u);
}

TEST(Coverage, EmptyTrackAndBadCellSize) {
  const std::vector<Track> tracks{Track("empty")};
  const auto cov = fielder_coverage(tracks, 1.0);
  EXPECT_EQ(cov[0].distance_covered, 0.0);
  EXPECT_TRUE(cov[0].grid.empty());
  EXPECT_EQ(code_of([&] { fielder_coverage(tracks, 0.4); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([&] { fielder_coverage(tracks, 10.5); }), Errc::kInvalidArgument);
  EXPECT_NO_THROW(fielder_coverage(tracks, 0.5));
  EXPECT_NO_THROW(fielder_coverage(tracks, 10.0));
}

TEST(Coverage, RandomWalksObeyInvariants) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> step(-0.5, 0.5), dt(0.02, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    Track tr("p");
    double t = step(rng) + 1.0;
    Point3 p{step(rng) * 50, step(rng) * 50, 0};
    const int n = 2 + trial % 60;
    for (int i = 0; i < n; ++i) {
      tr.ingest({t, "p", SensorKind::kPlayer, p});
      t += dt(rng);
      p.x += step(rng);
      p.y += step(rng);
    }
    const std::vector<Track> one{tr};
    const auto cov = fielder_coverage(one, 1.0);
    const double duration = tr.back().t - tr.front().t;
    EXPECT_NEAR(cov[0].grid.total(), duration, 1e-9);
    EXPECT_LE(cov[0].grid.total(), duration + 1e-9);
    for (const auto& [_, v] : cov[0].grid.cells()) EXPECT_GE(v, 0.0);

    // Splitting at a sample boundary and summing the parts gives the whole.
    const auto& s = tr.samples();
    const std::size_t cut = s.size() / 2;
    Track head("p"), tail("p");
    for (std::size_t i = 0; i <= cut; ++i) head.ingest(s[i]);
    for (std::size_t i = cut; i < s.size(); ++i) tail.ingest(s[i]);
    const std::vector<Track> parts{head, tail};
    const auto split = fielder_coverage(parts, 1.0);
    EXPECT_NEAR(split[0].distance_covered + split[1].distance_covered, cov[0].distance_covered, 1e-9);
  }
}
