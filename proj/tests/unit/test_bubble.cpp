#include <gtest/gtest.h>

#include <random>

#include "airtwin/bubble/bubble.hpp"
#include "airtwin/error.hpp"

using namespace airtwin;
using namespace airtwin::bubble;

namespace {

sensor::Reading ok_reading(double ppm, double t = 0.0) {
  sensor::Reading r;
  r.device_id = "wrist-1";
  r.t = t;
  r.co2_ppm = ppm;
  r.status = sensor::ReadingStatus::ok;
  return r;
}

Bubble at(int id, Vec3 p, double ppm, double t) {
  Bubble b;
  b.id = id;
  b.position = p;
  b.last_ppm = ppm;
  b.placed_t = t;
  b.updated_t = t;
  b.style = bubble_visual(ppm);
  return b;
}

}  // namespace

TEST(BubbleVisual, Endpoints) {
  const auto low = bubble_visual(400.0);
  EXPECT_EQ(low.hue_deg, 120.0);
  EXPECT_EQ(low.diameter_m, 0.2);
  EXPECT_EQ(low.opacity, 1.0);
  const auto high = bubble_visual(3000.0);
  EXPECT_EQ(high.hue_deg, 0.0);
  EXPECT_EQ(high.diameter_m, 1.5);
}

TEST(BubbleVisual, Midpoint) {
  const auto mid = bubble_visual(1700.0);
  EXPECT_NEAR(mid.diameter_m, 0.85, 1e-15);
  EXPECT_EQ(mid.hue_deg, 60.0);
}

TEST(BubbleVisual, Clamped) {
  EXPECT_EQ(bubble_visual(350.0), bubble_visual(400.0));
  EXPECT_EQ(bubble_visual(0.0), bubble_visual(400.0));
  EXPECT_EQ(bubble_visual(9000.0), bubble_visual(3000.0));
}

TEST(BubbleVisual, MonotoneProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ppm(0.0, 6000.0);
  for (int i = 0; i < 20000; ++i) {
    double a = ppm(rng), b = ppm(rng);
    if (a > b) std::swap(a, b);
    const auto sa = bubble_visual(a), sb = bubble_visual(b);
    ASSERT_LE(sa.diameter_m, sb.diameter_m);
    ASSERT_GE(sa.hue_deg, sb.hue_deg);
    ASSERT_GE(sa.diameter_m, 0.2);
    ASSERT_LE(sb.diameter_m, 1.5);
  }
}

TEST(BubbleUpdate, ProximityRule) {
  std::vector<Bubble> bubbles{at(1, {0.5, 0, 0}, 1200.0, 0.0), at(2, {2.0, 0, 0}, 1200.0, 0.0)};
  const auto ids = update_bubbles(bubbles, {0, 0, 0}, ok_reading(600.0, 10.0), 10.0);
  ASSERT_EQ(ids, std::vector<int>{1});
  EXPECT_EQ(bubbles[0].last_ppm, 600.0);
  EXPECT_EQ(bubbles[0].style, bubble_visual(600.0));
  EXPECT_EQ(bubbles[0].updated_t, 10.0);
  EXPECT_EQ(bubbles[1].last_ppm, 1200.0);
  EXPECT_EQ(bubbles[1].updated_t, 0.0);
}

TEST(BubbleUpdate, OnlyOkReadingsRefresh) {
  std::vector<Bubble> bubbles{at(1, {0.2, 0, 0}, 1200.0, 0.0)};
  sensor::Reading warming;
  warming.status = sensor::ReadingStatus::warming;
  EXPECT_TRUE(update_bubbles(bubbles, {0, 0, 0}, warming, 5.0).empty());
  sensor::Reading over;
  over.status = sensor::ReadingStatus::out_of_range;
  EXPECT_TRUE(update_bubbles(bubbles, {0, 0, 0}, over, 5.0).empty());
  EXPECT_EQ(bubbles[0].last_ppm, 1200.0);
}

TEST(BubbleStaleness, HalfLife) {
  EXPECT_DOUBLE_EQ(staleness_opacity(600.0), 0.25);
  EXPECT_EQ(staleness_opacity(0.0), 1.0);
  EXPECT_EQ(staleness_opacity(1e6), 0.15);
  std::vector<Bubble> bubbles{at(1, {5, 5, 0}, 900.0, 0.0)};
  fade_bubbles(bubbles, 600.0);
  EXPECT_DOUBLE_EQ(bubbles[0].style.opacity, 0.25);
  EXPECT_EQ(bubbles[0].last_ppm, 900.0);
}

TEST(BubbleMerge, CloseBubblesCollapse) {
  std::vector<Bubble> in{at(1, {1.0, 1.0, 0}, 900.0, 0.0), at(2, {1.1, 1.0, 0}, 700.0, 5.0)};
  const auto out = merge_bubbles(in, 0.3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, 1);
  EXPECT_NEAR(out[0].position.x, 1.05, 1e-12);
  EXPECT_EQ(out[0].last_ppm, 700.0);
  EXPECT_EQ(out[0].updated_t, 5.0);
}

TEST(BubbleMerge, FarAndEmpty) {
  std::vector<Bubble> in{at(1, {0, 0, 0}, 900.0, 0.0), at(2, {5, 0, 0}, 700.0, 5.0)};
  EXPECT_EQ(merge_bubbles(in, 0.3), in);
  EXPECT_TRUE(merge_bubbles({}, 0.3).empty());
  EXPECT_THROW(merge_bubbles(in, 0.0), InvalidArgument);
}

TEST(BubbleMerge, FixedPointProperty) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(0.0, 4.0);
  for (int c = 0; c < 300; ++c) {
    std::vector<Bubble> in;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) in.push_back(at(i + 1, {coord(rng), coord(rng), 0.75}, 400.0 + i * 50, i));
    const auto once = merge_bubbles(in, 0.6);
    EXPECT_EQ(merge_bubbles(once, 0.6), once);
    for (std::size_t a = 0; a < once.size(); ++a) {
      for (std::size_t b = a + 1; b < once.size(); ++b) {
        ASSERT_GT(distance(once[a].position, once[b].position), 0.6);
        ASSERT_LT(once[a].id, once[b].id);
      }
    }
    ASSERT_LE(once.size(), in.size());
  }
}
