#include "krasno/oracle.hpp"

#include <cmath>

#include "gtest/gtest.h"

namespace krasno {
namespace {

TEST(BisectRootTest, LinearRootAtZero) {
  const double r = bisect_root([](double x) { return x; }, -1.0, 2.0, 1e-12);
  EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(BisectRootTest, DottieNumber) {
  auto f = [](double x) { return std::cos(x) - x; };
  const double r = bisect_root(f, 0.0, 1.0, 1e-12);
  EXPECT_LE(std::abs(f(r)), 1e-11);
  // 30-digit reference value of the fixed point of cos.
  EXPECT_NEAR(r, 0.739085133215160641655, 1e-12);
}

TEST(BisectRootTest, SquareRootOfTwo) {
  const double r = bisect_root([](double x) { return x * x - 2; }, 1.0, 2.0, 1e-12);
  EXPECT_NEAR(r * r, 2.0, 1e-11);
}

TEST(BisectRootTest, HalvingCountMatchesLog2) {
  for (double tol : {1e-3, 1e-6, 1e-9, 1e-12}) {
    std::size_t steps = 0;
    // Root at an irrational point so no midpoint hits it exactly.
    bisect_root([](double x) { return x * x - 2; }, 0.0, 4.0, tol, &steps);
    EXPECT_EQ(steps, static_cast<std::size_t>(std::ceil(std::log2(4.0 / tol)))) << tol;
  }
}

TEST(BisectRootTest, EndpointRootsAreReturnedDirectly) {
  EXPECT_EQ(bisect_root([](double x) { return x - 1; }, 1.0, 3.0, 1e-12), 1.0);
  EXPECT_EQ(bisect_root([](double x) { return x - 3; }, 1.0, 3.0, 1e-12), 3.0);
}

TEST(BisectRootTest, SameSignIsBracketError) {
  EXPECT_THROW(bisect_root([](double x) { return x * x + 1; }, -1.0, 1.0, 1e-9), BracketError);
  EXPECT_THROW(bisect_root([](double x) { return x; }, 1.0, -1.0, 1e-9), PreconditionError);
}

TEST(BisectRootTest, StepFunctionBracketWidthIsTheContract) {
  // |f| stays 1 at the answer; only the bracket shrinks.
  auto f = [](double x) { return x < 0.3 ? -1.0 : 1.0; };
  const double r = bisect_root(f, 0.0, 1.0, 1e-10);
  EXPECT_NEAR(r, 0.3, 1e-10);
  EXPECT_EQ(std::abs(f(r)), 1.0);
}

TEST(FindFixedPointsTest, CosineHasOneFixedPoint) {
  const RealFunction h([](double x) { return std::cos(x); });
  const auto set = find_fixed_points(h, Interval(0, 1));
  ASSERT_EQ(set.points.size(), 1u);
  EXPECT_NEAR(set.points[0], 0.739085133215160641655, 1e-13);
  EXPECT_DOUBLE_EQ(set.grid_resolution, 1.0 / 4095.0);
}

TEST(FindFixedPointsTest, ShiftHasNone) {
  const RealFunction h([](double x) { return x + 1; });
  EXPECT_TRUE(find_fixed_points(h, Interval(0, 1)).points.empty());
}

TEST(FindFixedPointsTest, IdentityReportsEveryGridPoint) {
  const RealFunction h([](double x) { return x; });
  const auto set = find_fixed_points(h, Interval(0, 1), 17);
  ASSERT_EQ(set.points.size(), 17u);
  EXPECT_EQ(set.points.front(), 0.0);
  EXPECT_EQ(set.points.back(), 1.0);
}

TEST(FindFixedPointsTest, CubeHasThreeSeparatedFixedPoints) {
  // x^3 = x at -1, 0, 1.
  const RealFunction h([](double x) { return x * x * x; });
  const auto set = find_fixed_points(h, Interval(-2, 2));
  ASSERT_EQ(set.points.size(), 3u);
  EXPECT_NEAR(set.points[0], -1.0, 1e-13);
  EXPECT_NEAR(set.points[1], 0.0, 1e-13);
  EXPECT_NEAR(set.points[2], 1.0, 1e-13);
}

TEST(FindFixedPointsTest, TangentialFixedPointIsMissed) {
  // h(x) - x = (x - 0.5)^2 touches zero without a sign change.
  const RealFunction h([](double x) { return x + (x - 0.5) * (x - 0.5) + 1e-9; });
  EXPECT_TRUE(find_fixed_points(h, Interval(0, 1)).points.empty());
}

TEST(FindFixedPointsTest, SortedStrictlyIncreasing) {
  const RealFunction h([](double x) { return 0.5 + 0.45 * std::sin(25 * x); });
  const auto set = find_fixed_points(h, Interval(0, 1));
  ASSERT_GT(set.points.size(), 3u);
  for (std::size_t i = 1; i < set.points.size(); ++i) EXPECT_LT(set.points[i - 1], set.points[i]);
  for (double p : set.points) EXPECT_LE(std::abs(h(p) - p), 1e-12);
}

TEST(NearestFixedPointTest, Examples) {
  const RealFunction h([](double x) { return std::cos(x); });
  const Interval unit(0, 1);
  const auto up = nearest_fixed_point(h, unit, 0.0, SearchDirection::up);
  ASSERT_TRUE(up.has_value());
  EXPECT_NEAR(*up, 0.7390851332, 1e-10);
  EXPECT_FALSE(nearest_fixed_point(h, unit, 0.9, SearchDirection::up).has_value());
  const auto down = nearest_fixed_point(h, unit, 0.9, SearchDirection::down);
  ASSERT_TRUE(down.has_value());
  EXPECT_NEAR(*down, 0.7390851332, 1e-10);
  EXPECT_THROW(nearest_fixed_point(h, unit, 2.0, SearchDirection::up), DomainError);
}

TEST(NearestFixedPointTest, PicksClosestInDirection) {
  const RealFunction h([](double x) { return x * x * x; });
  const Interval iv(-2, 2);
  EXPECT_NEAR(*nearest_fixed_point(h, iv, -0.5, SearchDirection::up), 0.0, 1e-13);
  EXPECT_NEAR(*nearest_fixed_point(h, iv, -0.5, SearchDirection::down), -1.0, 1e-13);
  EXPECT_NEAR(*nearest_fixed_point(h, iv, 0.5, SearchDirection::up), 1.0, 1e-13);
}

}  // namespace
}  // namespace krasno
