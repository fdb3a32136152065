#include <gtest/gtest.h>

#include <cmath>

#include "odis/error.hpp"
#include "odis/image.hpp"
#include "test_support.hpp"

using namespace odis;

TEST(Bilinear, ConstantImageIsExact) {
  Image img(7, 5, 3, 0.3f);
  Rng rng(1);
  float out[3];
  for (int n = 0; n < 500; ++n) {
    sample_bilinear(img, rng.uniform(-3, 10), rng.uniform(-3, 8), n % 2 ? Wrap::kClamp : Wrap::kHorizontalWrap, out);
    for (float v : out) EXPECT_EQ(v, 0.3f);
  }
}

TEST(Bilinear, PixelCentersReturnPixels) {
  const Image img = fixtures::random_image(6, 4, 2);
  float out[3];
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) {
      sample_bilinear(img, x + 0.5, y + 0.5, Wrap::kClamp, out);
      for (int c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(out[c], img.at(x, y, c));
    }
}

TEST(Bilinear, MidpointIsAverage) {
  const Image img = fixtures::random_image(6, 4, 3);
  float out[3];
  sample_bilinear(img, 2.0, 1.5, Wrap::kClamp, out);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(out[c], 0.5 * (img.at(1, 1, c) + img.at(2, 1, c)), 1e-6);
}

TEST(Bilinear, HorizontalWrapJoinsEdges) {
  const Image img = fixtures::random_image(6, 4, 4);
  float out[3];
  sample_bilinear(img, 0.0, 2.5, Wrap::kHorizontalWrap, out);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(out[c], 0.5 * (img.at(0, 2, c) + img.at(5, 2, c)), 1e-6);
  sample_bilinear(img, 0.0, 2.5, Wrap::kClamp, out);
  for (int c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(out[c], img.at(0, 2, c));
}

TEST(Bilinear, VerticalClamp) {
  const Image img = fixtures::random_image(6, 4, 5);
  float out[3];
  sample_bilinear(img, 3.5, -2.0, Wrap::kHorizontalWrap, out);
  for (int c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(out[c], img.at(3, 0, c));
}

TEST(Nearest, PicksContainingPixel) {
  Mask m(4, 2);
  m.set(3, 1, true);
  EXPECT_TRUE(sample_nearest(m, 3.2, 1.9, Wrap::kClamp));
  EXPECT_FALSE(sample_nearest(m, 2.9, 1.9, Wrap::kClamp));
  EXPECT_TRUE(sample_nearest(m, -0.5, 1.5, Wrap::kHorizontalWrap));
}

TEST(Resample, AreaDownsampleAverages) {
  const Image img = fixtures::random_image(8, 4, 6);
  const Image d = downsample_area(img, 2);
  ASSERT_EQ(d.width(), 4);
  ASSERT_EQ(d.height(), 2);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) {
        const double mean = (img.at(2 * x, 2 * y, c) + img.at(2 * x + 1, 2 * y, c) + img.at(2 * x, 2 * y + 1, c) +
                             img.at(2 * x + 1, 2 * y + 1, c)) /
                            4.0;
        EXPECT_NEAR(d.at(x, y, c), mean, 1e-6);
      }
}

TEST(Resample, MaskPoolingRequiresAllKnown) {
  Mask m(4, 2, true);
  m.set(1, 0, false);
  const Mask d = downsample_all(m, 2);
  EXPECT_FALSE(d.get(0, 0));
  EXPECT_TRUE(d.get(1, 0));
  const Mask u = resize_mask(d, 4, 2);
  EXPECT_FALSE(u.get(0, 1));
  EXPECT_TRUE(u.get(3, 1));
}

TEST(Resample, BilinearResizeKeepsConstant) {
  const Image img(10, 5, 3, 0.25f);
  const Image r = resize_bilinear(img, 37, 13);
  for (float v : r.data()) EXPECT_EQ(v, 0.25f);
}

TEST(MaskImage, RoundTrip) {
  Mask m(5, 3);
  m.set(0, 0, true);
  m.set(4, 2, true);
  EXPECT_EQ(image_to_mask(mask_to_image(m)), m);
  EXPECT_EQ(m.count(), 2u);
}

TEST(MaskImage, ApplyZeroesUnknown) {
  const Image img = fixtures::random_image(4, 2, 7);
  Mask m(4, 2);
  m.set(2, 1, true);
  const Image a = apply_mask(img, m);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 4; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(a.at(x, y, c), m.get(x, y) ? img.at(x, y, c) : 0.0f);
}

TEST(Png, RoundTripIsQuantization) {
  const auto dir = fixtures::scratch_dir("png");
  const Image img = fixtures::random_image(33, 17, 8);
  write_png(dir / "a.png", img);
  const Image back = read_png(dir / "a.png");
  EXPECT_EQ(back, quantize_8bit(img));
  write_png(dir / "b.png", back);
  EXPECT_EQ(read_png(dir / "b.png"), back);
}

TEST(Png, MissingFileIsDataError) { EXPECT_THROW(read_png("/nonexistent/x.png"), DataError); }
