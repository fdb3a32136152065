#include <gtest/gtest.h>

#include <cmath>

#include "odis/blending.hpp"
#include "odis/conditioning.hpp"
#include "odis/error.hpp"
#include "test_support.hpp"

using namespace odis;

TEST(Condition, CenterFootprintMatchesSingleViewCoverage) {
  Rng rng(1);
  const Mask m = condition_mask(CenterNfov{}, 1024, 512, rng);
  ViewSet one;
  one.cameras.push_back({camera_frame_for(UnitVec3::trusted({0, 0, 1})), 126.87, 112.62, 1, 1});
  const auto cov = coverage_of_viewset(one, 1024, 512);
  std::size_t n = 0;
  for (auto c : cov) n += c;
  EXPECT_EQ(m.count(), n);
  EXPECT_GT(m.fraction(), 0.15);
  EXPECT_LT(m.fraction(), 0.4);
}

TEST(Condition, ExplicitAllKnownIsIdentity) {
  const Image erp = fixtures::smooth_panorama(64, 2);
  Rng rng(2);
  const Condition c = make_condition(erp, ExplicitMask{Mask(128, 64, true)}, rng);
  EXPECT_EQ(c.image, erp);
}

TEST(Condition, ExplicitAllUnknownIsAllowed) {
  Rng rng(3);
  EXPECT_NO_THROW(make_condition(Image(128, 64, 3, 0.5f), ExplicitMask{Mask(128, 64, false)}, rng));
  EXPECT_THROW(make_condition(Image(128, 64, 3, 0.5f), ExplicitMask{Mask(64, 64, false)}, rng), DataError);
}

TEST(Condition, GroundRegionByLatitude) {
  Rng rng(4);
  const Mask m = condition_mask(GroundRegion{-kPi / 4}, 512, 256, rng);
  for (int y = 0; y < 256; ++y) {
    const double lat = kPi / 2 - kPi * (y + 0.5) / 256;
    for (int x = 0; x < 512; x += 17) EXPECT_EQ(m.get(x, y), !(lat < -kPi / 4)) << y;
  }
}

TEST(Condition, EmptyKnownRegionRejected) {
  Rng rng(5);
  EXPECT_THROW(condition_mask(GroundRegion{kPi / 2}, 512, 256, rng), DataError);
  EXPECT_THROW(condition_mask(GroundRegion{-2.0}, 512, 256, rng), std::invalid_argument);
  EXPECT_THROW(condition_mask(CenterNfov{180.0, 60.0}, 512, 256, rng), std::invalid_argument);
}

TEST(Condition, KnownMatchesSourceUnknownIsZero) {
  const Image erp = fixtures::smooth_panorama(128, 6);
  Rng rng(6);
  for (const ConditionSpec& spec : {ConditionSpec{CenterNfov{}}, ConditionSpec{RandomBoxes{}},
                                    ConditionSpec{GroundRegion{}}, ConditionSpec{TwoView{}}}) {
    const Condition c = make_condition(erp, spec, rng);
    for (int y = 0; y < 128; ++y)
      for (int x = 0; x < 256; ++x)
        for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(c.image.at(x, y, ch), c.known.get(x, y) ? erp.at(x, y, ch) : 0.0f);
  }
}

TEST(Condition, TwoViewFootprintsAreDisjoint) {
  Rng rng(7);
  const Mask one = condition_mask(CenterNfov{}, 1024, 512, rng);
  const Mask two = condition_mask(TwoView{}, 1024, 512, rng);
  EXPECT_EQ(two.count(), 2 * one.count());
  for (int y = 0; y < 512; ++y)
    for (int x = 0; x < 1024; ++x)
      if (one.get(x, y)) EXPECT_FALSE(one.get((x + 512) % 1024, y));
}

TEST(Condition, RandomBoxesDeterministicAndInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const Mask ma = condition_mask(RandomBoxes{}, 512, 256, a);
    EXPECT_EQ(ma, condition_mask(RandomBoxes{}, 512, 256, b));
    EXPECT_GE(1.0 - ma.fraction(), 0.2);
    EXPECT_LE(1.0 - ma.fraction(), 0.8);
  }
  Rng c(0), d(1);
  EXPECT_NE(condition_mask(RandomBoxes{}, 512, 256, c), condition_mask(RandomBoxes{}, 512, 256, d));
}

TEST(ConditionViews, AllKnownStaysAllKnown) {
  const auto views = condition_to_views(Image(256, 128, 3, 0.5f), Mask(256, 128, true), standard_view_set(60.0, 32));
  ASSERT_EQ(views.size(), 26u);
  for (const auto& v : views) EXPECT_EQ(v.known.count(), 32u * 32u);
}

TEST(ConditionViews, DownwardViewInsideGroundRegionIsUnknown) {
  Rng rng(8);
  const Mask m = condition_mask(GroundRegion{-kPi / 4}, 1024, 512, rng);
  ViewSet down;
  down.cameras.push_back(make_camera(UnitVec3::trusted({0, -1, 0}), 60.0, 64));
  const auto v = condition_to_views(apply_mask(Image(1024, 512, 3, 0.5f), m), m, down);
  EXPECT_EQ(v[0].known.count(), 0u);
  for (float x : v[0].image.data()) EXPECT_EQ(x, 0.0f);
}

TEST(ConditionViews, MasksRoundTripThroughBlending) {
  Rng rng(9);
  for (const ConditionSpec& spec : {ConditionSpec{CenterNfov{}}, ConditionSpec{RandomBoxes{}}}) {
    const Mask m = condition_mask(spec, 512, 256, rng);
    const ViewSet set = standard_view_set(60.0, 128);
    const auto views = condition_to_views(apply_mask(Image(512, 256, 3, 1.0f), m), m, set);
    ViewBlender blender(set, 512, 256);
    for (std::size_t k = 0; k < views.size(); ++k) blender.add(int(k), mask_to_image(views[k].known));
    const Mask back = image_to_mask(blender.finish());
    std::size_t agree = 0;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 512; ++x) agree += back.get(x, y) == m.get(x, y);
    EXPECT_GE(double(agree) / (512.0 * 256.0), 0.99);
  }
}
