#include <gtest/gtest.h>

#include "msent/error.hpp"
#include "msent/schedule.hpp"

namespace msent {
namespace {

TEST(TemperatureSchedule, TiltingIndices) {
  const TemperatureSchedule s(2.0, {1.0, 3.0, 0.0});
  EXPECT_DOUBLE_EQ(s.partial_sum(2), 4.0);
  EXPECT_DOUBLE_EQ(s.tilting_index(2), 0.25);
  EXPECT_EQ(s.tilting_index(3), 1.0);
  const auto t = s.temperature_vector();
  EXPECT_DOUBLE_EQ(t[0], 2.0);
  EXPECT_DOUBLE_EQ(t[1], 6.0);
}

TEST(TemperatureSchedule, RejectsInvalid) {
  EXPECT_THROW(TemperatureSchedule(0.0, {1.0}), Error);
  EXPECT_THROW(TemperatureSchedule(1.0, {0.0, 1.0}), Error);
  EXPECT_THROW(TemperatureSchedule(1.0, {1.0, -0.5}), Error);
  EXPECT_THROW(TemperatureSchedule(1.0, {}), Error);
}

TEST(AlphaSchedule, ZeroIsSingleScale) {
  const auto s = alpha_schedule(0.0, 0.3, 4);
  EXPECT_EQ(s.sigma(1), 0.3);
  for (std::size_t i = 2; i <= 4; ++i) {
    EXPECT_EQ(s.sigma(i), 0.0);
    EXPECT_EQ(s.tilting_index(i), 1.0);
  }
}

TEST(AlphaSchedule, HalfOnThreeLevels) {
  // sigma_i = alpha * (sigma_1 + ... + sigma_i) gives sigma_i = alpha/(1-alpha) * partial_{i-1}.
  const auto s = alpha_schedule(0.5, 1.0, 3);
  EXPECT_DOUBLE_EQ(s.sigma(1), 1.0);
  EXPECT_DOUBLE_EQ(s.sigma(2), 1.0);
  EXPECT_DOUBLE_EQ(s.sigma(3), 2.0);
  for (std::size_t i = 2; i <= 3; ++i) {
    EXPECT_DOUBLE_EQ(s.sigma(i) / s.partial_sum(i), 0.5);
  }
}

TEST(AlphaSchedule, RatioHoldsForEveryAlpha) {
  for (double alpha : {0.05, 0.3, 0.75, 0.999}) {
    const auto s = alpha_schedule(alpha, 1e-4, 6);
    for (std::size_t i = 2; i <= 6; ++i) {
      EXPECT_NEAR(s.sigma(i) / s.partial_sum(i), alpha, 1e-12);
      EXPECT_NEAR(s.tilting_index(i), 1.0 - alpha, 1e-12);
    }
  }
}

TEST(AlphaSchedule, DepthOne) {
  const auto s = alpha_schedule(0.4, 2.0, 1);
  EXPECT_EQ(s.levels(), 1u);
  EXPECT_EQ(s.sigma(1), 2.0);
}

TEST(AlphaSchedule, RejectsOutOfRange) {
  EXPECT_THROW(alpha_schedule(1.0, 1.0, 3), Error);
  EXPECT_THROW(alpha_schedule(-0.1, 1.0, 3), Error);
  EXPECT_THROW(alpha_schedule(0.5, 0.0, 3), Error);
  EXPECT_THROW(alpha_schedule(0.5, 1.0, 0), Error);
}

}  // namespace
}  // namespace msent
