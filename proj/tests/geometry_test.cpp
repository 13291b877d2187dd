#include "rlds/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"

namespace {

using rlds::Corridor;
using rlds::Point2;
using rlds::RoadSegmentSpec;

constexpr double kPi = std::numbers::pi;

Corridor straight(double width = 4.0) {
  return Corridor({RoadSegmentSpec{"r", width, {Point2(0, 0), Point2(100, 0)}}});
}

TEST(Clearance, StraightRoadExamples) {
  const auto c = straight();
  EXPECT_DOUBLE_EQ(c.clearance({50, 0}), 2.0);
  EXPECT_DOUBLE_EQ(c.clearance({50, 2.0}), 0.0);
  EXPECT_DOUBLE_EQ(c.clearance({50, 3.0}), -1.0);
  EXPECT_TRUE(c.contains({50, 2.0}));
  EXPECT_FALSE(c.contains({50, 2.0001}));
}

TEST(Clearance, FarAwayPointUsesFallback) {
  const auto c = straight();
  EXPECT_NEAR(c.clearance({50, 500}), 2.0 - 500.0, 1e-12);
  EXPECT_NEAR(c.clearance({-30, 40}), 2.0 - 50.0, 1e-12);
}

TEST(Clearance, UnionTakesBestRoad) {
  Corridor c({RoadSegmentSpec{"a", 4.0, {Point2(0, 0), Point2(100, 0)}},
              RoadSegmentSpec{"b", 6.0, {Point2(50, -50), Point2(50, 50)}}});
  EXPECT_DOUBLE_EQ(c.clearance({50, 0}), 3.0);
  EXPECT_DOUBLE_EQ(c.clearance({50, 10}), 3.0);
  EXPECT_DOUBLE_EQ(c.clearance({10, 0}), 2.0);
}

TEST(Raycast, StraightRoadExamples) {
  const auto c = straight();
  EXPECT_NEAR(c.raycast({50, 0}, kPi / 2, 12.0), 2.0, 1e-3);
  EXPECT_DOUBLE_EQ(c.raycast({50, 0}, 0.0, 12.0), 12.0);
  EXPECT_NEAR(c.raycast({50, 0}, kPi / 4, 12.0), 2.0 / std::sin(kPi / 4), 2e-3);
}

TEST(Raycast, OutsideOriginThrows) {
  const auto c = straight();
  try {
    c.raycast({50, 3}, 0.0, 12.0);
    FAIL() << "expected an exception";
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "ray from outside corridor");
  }
}

TEST(Raycast, MatchesStripOracleOnRotatedRoads) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double axis = 2 * kPi * unit(rng);
    const double w = 3.0 + 5.0 * unit(rng);
    const Point2 a(-20 + 40 * unit(rng), -20 + 40 * unit(rng));
    const Point2 dir(std::cos(axis), std::sin(axis));
    const Point2 b = a + 1000.0 * dir;
    Corridor c({RoadSegmentSpec{"r", w, {a, b}}});
    const Point2 normal(-dir.y(), dir.x());
    const Point2 o = a + (400 + 200 * unit(rng)) * dir + (unit(rng) - 0.5) * w * 0.999 * normal;
    const double theta = 2 * kPi * unit(rng) - kPi;
    const double expect = oracle::ray_strip(o.x(), o.y(), a.x(), a.y(), axis, w, theta, 12.0);
    EXPECT_NEAR(c.raycast(o, theta, 12.0), expect, 2e-3) << "case " << i;
  }
}

TEST(Raycast, MonotoneInMaxDist) {
  const auto c = straight(5.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point2 o(10 + 80 * unit(rng), (unit(rng) - 0.5) * 4.9);
    const double theta = 2 * kPi * unit(rng);
    const double full = c.raycast(o, theta, 30.0);
    for (double m : {0.05, 0.5, 1.0, 2.0, 5.0, 12.0, 29.0}) {
      const double cut = c.raycast(o, theta, m);
      EXPECT_GE(cut, 0.0);
      EXPECT_LE(cut, m);
      EXPECT_EQ(cut, full < m ? full : m);
    }
  }
}

TEST(Raycast, ClearanceBoundsEveryRay) {
  Corridor c({rlds::make_stadium_loop(24.5, 40.0, 5.0)});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const auto [p, t] = c.point_at(unit(rng) * c.total_length());
    const Point2 q = p + (unit(rng) - 0.5) * 4.8 * Point2(-t.y(), t.x());
    const double cl = c.clearance(q);
    ASSERT_GE(cl, 0.0);
    for (int k = 0; k < 16; ++k)
      EXPECT_GE(c.raycast(q, k * kPi / 8, 1000.0) + 1e-3, cl);
  }
}

TEST(Raycast, JunctionUnion) {
  // Cross junction: a ray along the second road passes through the overlap.
  Corridor c({RoadSegmentSpec{"a", 4.0, {Point2(0, 0), Point2(100, 0)}},
              RoadSegmentSpec{"b", 4.0, {Point2(50, -50), Point2(50, 50)}}});
  EXPECT_DOUBLE_EQ(c.raycast({50, 0}, kPi / 2, 12.0), 12.0);
  EXPECT_NEAR(c.raycast({45, 0}, kPi / 2, 12.0), 2.0, 1e-3);
}

TEST(SampleSpawns, SingleStraightRoad) {
  const auto c = straight();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto poses = rlds::sample_spawns(c, 1, seed);
    ASSERT_EQ(poses.size(), 1u);
    EXPECT_NEAR(poses[0].position.y(), 0.0, 1e-12);
    EXPECT_TRUE(poses[0].heading == 0.0 || std::abs(poses[0].heading - kPi) < 1e-12);
  }
}

TEST(SampleSpawns, InsideAndDeterministic) {
  Corridor c({rlds::make_stadium_loop(24.5, 40.0, 5.0)});
  const auto a = rlds::sample_spawns(c, 64, 42);
  const auto b = rlds::sample_spawns(c, 64, 42);
  ASSERT_EQ(a.size(), 64u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_GE(c.clearance(a[i].position), 0.0);
    EXPECT_EQ(a[i].position, b[i].position);
    EXPECT_EQ(a[i].heading, b[i].heading);
    EXPECT_GT(a[i].heading, -kPi);
    EXPECT_LE(a[i].heading, kPi);
  }
}

TEST(SampleSpawns, FilterRejects) {
  const auto c = straight();
  const auto poses = rlds::sample_spawns(c, 32, 1, [](const rlds::Pose& p, const Corridor&) {
    return p.position.x() > 50.0;
  });
  for (const auto& p : poses) EXPECT_GT(p.position.x(), 50.0);
}

TEST(NormalizeAngle, Range) {
  EXPECT_DOUBLE_EQ(rlds::normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(rlds::normalize_angle(-kPi), kPi);
  EXPECT_NEAR(rlds::normalize_angle(3 * kPi / 2), -kPi / 2, 1e-12);
  EXPECT_NEAR(rlds::normalize_angle(-5 * kPi / 2), -kPi / 2, 1e-12);
}

TEST(StadiumLoop, Shape) {
  const auto road = rlds::make_stadium_loop(24.5, 40.0, 5.0);
  Corridor c({road});
  EXPECT_NEAR(c.total_length(), 2 * 24.5 + 2 * kPi * 40.0, 1.0);
  EXPECT_EQ(road.centerline.front(), road.centerline.back());
  EXPECT_DOUBLE_EQ(road.width, 5.0);
}

TEST(RoadNetworkFile, RoundTrip) {
  Corridor c({rlds::make_stadium_loop(24.5, 40.0, 5.0)});
  const auto poses = rlds::sample_spawns(c, 8, 5);
  const std::string doc = rlds::serialize_road_network(c.roads(), poses);
  const auto net = rlds::parse_road_network(doc);
  ASSERT_EQ(net.spawns().size(), 8u);
  EXPECT_EQ(rlds::serialize_road_network(net.roads(), net.spawns()), doc);
}

TEST(RoadNetworkFile, GeneratesSpawnsWhenAbsent) {
  const auto net = rlds::parse_road_network(
      R"({"roads":[{"id":"a","width_m":4,"centerline":[[0,0],[100,0]]}]})", 64, 9);
  EXPECT_EQ(net.spawns().size(), 64u);
}

TEST(RoadNetworkFile, RejectsBadInput) {
  EXPECT_THROW(rlds::parse_road_network(R"({"roads":[]})"), std::invalid_argument);
  EXPECT_THROW(rlds::parse_road_network(
                   R"({"roads":[{"id":"a","width_m":-1,"centerline":[[0,0],[1,0]]}]})"),
               std::invalid_argument);
  EXPECT_THROW(rlds::parse_road_network(
                   R"({"roads":[{"id":"a","width_m":4,"centerline":[[0,0],[1,0]]}],"spawns":[[0,50,0]]})"),
               std::invalid_argument);
}

}  // namespace
