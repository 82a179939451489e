#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "aware_ground/geometry.hpp"
#include "support/oracles.hpp"

using namespace aware_ground;
using std::numbers::pi;

TEST(Distance, ThreeFourFive) {
  EXPECT_EQ(distance(Point2{0, 0}, Point2{3, 4}), 5.0);
  EXPECT_EQ(distance(Point2{7, -2}, Point2{7, -2}), 0.0);
  EXPECT_EQ(distance(Point2{1, 2}, Point2{4, 6}), 5.0);
}

TEST(Distance, MetricPropertiesOnRandomTriples) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 10000; ++i) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    ASSERT_EQ(distance(a, b), distance(b, a));
    ASSERT_GE(distance(a, b), 0.0);
    ASSERT_LE(distance(a, c), distance(a, b) + distance(b, c) + 1e-12);
  }
}

TEST(AngleAtVertex, KnownTriangles) {
  EXPECT_NEAR(angle_at_vertex({1, 1, 1}), pi / 3, 1e-15);
  EXPECT_NEAR(angle_at_vertex({5, 3, 4}), pi / 2, 1e-15);
  EXPECT_NEAR(angle_at_vertex({2, 1, 1}), pi, 1e-15);
  EXPECT_NEAR(angle_at_vertex({0.0 + 1e-300, 1, 1}), 0.0, 1e-12);
}

TEST(AngleAtVertex, RejectsImpossibleTriangles) {
  EXPECT_THROW(angle_at_vertex({3, 1, 1}), Error);
  EXPECT_THROW(angle_at_vertex({0, 1, 1}), Error);
  EXPECT_THROW(angle_at_vertex({1, -1, 1}), Error);
  EXPECT_THROW(angle_at_vertex({1, 1, std::nan("")}), Error);
  try {
    angle_at_vertex({3, 1, 1});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDegenerateTriangle);
  }
}

TEST(AngleAtVertex, ClampsWithinTolerance) {
  // Collinear within rounding: 2 + tiny excess is clamped to pi.
  EXPECT_NEAR(angle_at_vertex({2.0 * (1 + 1e-14), 1, 1}), pi, 1e-6);
  EXPECT_THROW(angle_at_vertex({2.0 * (1 + 1e-9), 1, 1}), Error);
}

TEST(AngleAtVertex, AgreesWithDotProductOnRandomTriangles) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-50, 50);
  int checked = 0;
  while (checked < 10000) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, s{u(rng), u(rng)};
    const double area = std::abs(cross(b - a, s - a)) / 2;
    if (area < 1.0) continue;
    const TriangleSides sides{distance(b, s), distance(a, s), distance(a, b)};
    ASSERT_NEAR(angle_at_vertex(sides), oracle::angle_by_dot(a, b, s), 1e-9);
    ++checked;
  }
}

TEST(ArcDrop, KnownValues) {
  EXPECT_DOUBLE_EQ(arc_drop(5, 3), 1.0);
  EXPECT_EQ(arc_drop(100, 0), 0.0);
  EXPECT_DOUBLE_EQ(arc_drop(1, 1), 1.0);
  const auto arc = make_arc(5, 3);
  EXPECT_EQ(arc.radius, 5.0);
  EXPECT_EQ(arc.horizontal, 3.0);
  EXPECT_DOUBLE_EQ(arc.drop, 1.0);
}

TEST(ArcDrop, DomainErrors) {
  EXPECT_THROW(arc_drop(1, 1.5), Error);
  EXPECT_THROW(arc_drop(0, 0), Error);
  EXPECT_THROW(arc_drop(-1, 0), Error);
  EXPECT_THROW(arc_drop(1, -0.1), Error);
  try {
    arc_drop(1, 2);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kOutOfDomain);
    EXPECT_EQ(e.subject(), "D");
  }
}

TEST(ArcDrop, IdentityAndMonotonicity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 10000; ++i) {
    const double r = std::exp(u(rng) * 12 - 4);
    const double d = r * u(rng);
    const double yd = arc_drop(r, d);
    ASSERT_GE(yd, 0.0);
    ASSERT_LE(yd, r);
    ASSERT_NEAR(r * r, d * d + (r - yd) * (r - yd), 1e-12 * r * r);
    const double d2 = std::min(r, d + r * 0.01 * u(rng));
    ASSERT_GE(arc_drop(r, d2), yd);
  }
}

TEST(SignedDistance, LeftPositiveRightNegative) {
  const auto line = make_line({0, 0}, {1, 0});
  EXPECT_EQ(signed_distance(line, {5, 1}), 1.0);
  EXPECT_EQ(signed_distance(line, {-3, 0}), 0.0);
  EXPECT_EQ(signed_distance(line, {2, -2}), -2.0);
}

TEST(SignedDistance, ReversalFlipsSignExactly) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 10000; ++i) {
    const double ang = u(rng);
    const auto line = make_line({u(rng), u(rng)}, {std::cos(ang), std::sin(ang)});
    const Point2 p{u(rng), u(rng)};
    ASSERT_EQ(signed_distance(line.reversed(), p), -signed_distance(line, p));
  }
}

TEST(SignedDistance, LineDirectionIsNormalized) {
  EXPECT_TRUE(is_unit(make_line({0, 0}, {3, 4}).direction));
  EXPECT_THROW(make_line({0, 0}, {0, 0}), Error);
}

TEST(Stadium, ContainsCenterNotFarPointBoundaryClosed) {
  const StadiumShape ring{{0, -10}, {0, 10}, 27.43};
  EXPECT_TRUE(stadium_contains(ring, {0, 0}));
  EXPECT_FALSE(stadium_contains(ring, {100, 0}));
  EXPECT_TRUE(stadium_contains(ring, {27.43, 0}));
  EXPECT_TRUE(stadium_contains(ring, {0, 37.43}));
  EXPECT_FALSE(stadium_contains(ring, {0, 37.44}));
}

TEST(Stadium, PlainCircleWhenFociCoincide) {
  const StadiumShape c{{1, 1}, {1, 1}, 2};
  EXPECT_TRUE(stadium_contains(c, {3, 1}));
  EXPECT_FALSE(stadium_contains(c, {3, 1.1}));
}

TEST(Stadium, InvariantUnderRigidMotion) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const StadiumShape ring{{-10.06, 0}, {10.06, 0}, 27.43};
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point2 p{u(rng) * 60, u(rng) * 60};
    // Keep clear of the outline so rounding in the transform cannot move a
    // point across it.
    const double d = std::sqrt(squared_distance_to_segment(ring.focus_a, ring.focus_b, p));
    if (std::abs(d - ring.radius) < 1e-9) continue;
    const double ang = u(rng) * pi;
    const Vec2 shift{u(rng) * 1000, u(rng) * 1000};
    const auto move = [&](Point2 q) {
      return Point2{std::cos(ang) * q.x - std::sin(ang) * q.y + shift.x,
                    std::sin(ang) * q.x + std::cos(ang) * q.y + shift.y};
    };
    const StadiumShape moved{move(ring.focus_a), move(ring.focus_b), ring.radius};
    mismatches += stadium_contains(ring, p) != stadium_contains(moved, move(p));
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Units, RadiansToDegrees) {
  EXPECT_DOUBLE_EQ(radians_to_degrees(pi / 2), 90.0);
}
