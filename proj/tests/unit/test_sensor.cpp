#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "airtwin/error.hpp"
#include "airtwin/game/payload.hpp"
#include "airtwin/sensor/virtual_sensor.hpp"

using namespace airtwin;
using namespace airtwin::sensor;

namespace {

VirtualSensor make(SensorSpec spec = {}, std::uint64_t seed = 0, double initial = 400.0) {
  return VirtualSensor("wrist-1", spec, {1, 1, 1}, 0.0, initial, 400.0, seed);
}

}  // namespace

TEST(SensorLag, FixedPoint) {
  auto s = make({}, 0, 800.0);
  s.tick(800.0, 5.0);
  EXPECT_EQ(s.lagged_ppm(), 800.0);
}

TEST(SensorLag, OneTau) {
  auto s = make();
  s.tick(1400.0, 10.0);
  EXPECT_NEAR(s.lagged_ppm(), 400.0 + 1000.0 * (1.0 - std::exp(-1.0)), 1e-9);
  EXPECT_NEAR(s.lagged_ppm(), 1032.1, 0.05);
}

TEST(SensorLag, ThirtySeconds) {
  auto s = make();
  s.tick(1400.0, 30.0);
  EXPECT_NEAR(s.lagged_ppm(), 1350.2, 0.05);
  auto stepped = make();
  for (int i = 0; i < 60; ++i) stepped.tick(1400.0, 0.5);
  EXPECT_NEAR(stepped.lagged_ppm(), s.lagged_ppm(), 1e-9);
}

TEST(SensorRead, WarmingDuringPreheat) {
  auto s = make();
  for (double t = 0.0; t < 60.0; t += 0.5) {
    const auto r = s.read(t);
    ASSERT_EQ(r.status, ReadingStatus::warming);
    ASSERT_FALSE(r.co2_ppm.has_value());
  }
  EXPECT_EQ(s.read(30.0).status, ReadingStatus::warming);
  EXPECT_EQ(s.read(60.0).status, ReadingStatus::ok);
}

TEST(SensorRead, CachedWithinPollInterval) {
  auto s = make();
  const auto a = s.read(100.0);
  s.tick(3000.0, 2.0);
  const auto b = s.read(102.0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(game::serialize_reading(a), game::serialize_reading(b));
  const auto c = s.read(105.0);
  EXPECT_NE(c.t, a.t);
}

TEST(SensorRead, Statistics) {
  SensorSpec spec;
  spec.drift_enabled = false;
  auto s = make(spec, 0, 1000.0);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) {
    const auto r = s.read(60.0 + 5.0 * i);
    ASSERT_EQ(r.status, ReadingStatus::ok);
    xs.push_back(*r.co2_ppm);
  }
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (xs.size() - 1));
  EXPECT_LE(std::abs(mean - 1000.0), 40.0 + 0.05 * 1000.0);
  EXPECT_GE(sd, 8.0);
  EXPECT_LE(sd, 12.0);
}

TEST(SensorRead, BiasWithinAccuracyForManySeeds) {
  SensorSpec spec;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = make(spec, seed, 1000.0);
    EXPECT_LE(std::abs(s.bias_ppm()), spec.accuracy_bound(400.0));
  }
}

TEST(SensorRead, ClampAndOutOfRange) {
  SensorSpec spec;
  spec.bias_enabled = false;
  spec.noise_enabled = false;
  auto low = make(spec, 1, 300.0);
  EXPECT_EQ(*low.read(60.0).co2_ppm, 400.0);
  auto high = make(spec, 1, 6000.0);
  const auto r = high.read(60.0);
  EXPECT_EQ(r.status, ReadingStatus::out_of_range);
  EXPECT_FALSE(r.co2_ppm.has_value());
}

TEST(SensorRead, NoiseOffBiasOffIsTruth) {
  SensorSpec spec;
  spec.bias_enabled = false;
  spec.noise_enabled = false;
  auto s = make(spec, 1, 1234.5);
  EXPECT_EQ(*s.read(61.0).co2_ppm, 1234.5);
}

TEST(SensorPosition, MoveAndRelax) {
  sim::RoomGeometry room({3, 3, 3}, 0.5);
  auto s = make();
  s.set_position(room, {2, 2, 1});
  EXPECT_EQ(s.position(), (Vec3{2, 2, 1}));
  EXPECT_EQ(s.lagged_ppm(), 400.0);
  s.tick(900.0, 5.0);
  EXPECT_GT(s.lagged_ppm(), 400.0);
  EXPECT_LT(s.lagged_ppm(), 900.0);
  const double before = s.lagged_ppm();
  s.set_position(room, s.position());
  EXPECT_EQ(s.lagged_ppm(), before);
  EXPECT_THROW(s.set_position(room, {-1, 0, 0}), OutOfRoom);
}

TEST(SensorDeterminism, SameSeedSameSequence) {
  auto a = make({}, 42, 500.0);
  auto b = make({}, 42, 500.0);
  for (int i = 0; i < 500; ++i) {
    const double truth = 500.0 + 3.0 * i;
    a.tick(truth, 0.5);
    b.tick(truth, 0.5);
    ASSERT_EQ(game::serialize_reading(a.read(0.5 * i)), game::serialize_reading(b.read(0.5 * i)));
  }
  auto c = make({}, 43, 500.0);
  EXPECT_NE(c.bias_ppm(), make({}, 42, 500.0).bias_ppm());
}

TEST(SensorSpec, Validation) {
  SensorSpec spec;
  spec.preheat_s = 0.0;
  EXPECT_THROW(validate(spec), InvalidArgument);
  spec = {};
  spec.range_max_ppm = 300.0;
  EXPECT_THROW(validate(spec), InvalidArgument);
  EXPECT_THROW(make().tick(400.0, 0.0), InvalidArgument);
}
