#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "odis/error.hpp"
#include "odis/metrics.hpp"
#include "test_support.hpp"

using namespace odis;

namespace {

Image rotate_columns(const Image& img, int shift) {
  Image out(img.width(), img.height(), img.channels());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) out.at((x + shift) % img.width(), y, c) = img.at(x, y, c);
  return out;
}

}  // namespace

TEST(Mse, IdenticalImages) {
  const Image a = fixtures::smooth_panorama(64, 1);
  const MetricReport r = mse_regions(a, a);
  EXPECT_EQ(r.global_mse, 0.0);
  EXPECT_EQ(r.pole_mse, 0.0);
  EXPECT_EQ(r.equator_mse, 0.0);
  EXPECT_TRUE(std::isinf(r.psnr));
  EXPECT_TRUE(to_json(r)["psnr"].is_null());
}

TEST(Mse, UniformOffset) {
  const Image a(256, 128, 3, 0.0f);
  const Image b(256, 128, 3, 1.0f / 255.0f);
  const MetricReport r = mse_regions(a, b);
  // The stored offset is the float nearest 1/255.
  const double d = double(1.0f / 255.0f);
  const double e = d * d;
  EXPECT_NEAR(e, (1.0 / 255.0) * (1.0 / 255.0), 2e-12);
  EXPECT_NEAR(r.global_mse, e, 1e-12);
  EXPECT_NEAR(r.pole_mse, e, 1e-12);
  EXPECT_NEAR(r.equator_mse, e, 1e-12);
  EXPECT_NEAR(r.psnr, 10 * std::log10(1 / r.global_mse), 1e-12);
}

TEST(Mse, TopRowWeightedBySphericalCap) {
  for (int h : {64, 256, 1024}) {
    Image a(2 * h, h, 3, 0.0f), b(2 * h, h, 3, 0.0f);
    for (int x = 0; x < 2 * h; ++x)
      for (int c = 0; c < 3; ++c) b.at(x, 0, c) = 1.0f;
    // Area of the cap above latitude pi/2 - pi/h, as a fraction of the sphere.
    const double cap = (1.0 - std::cos(kPi / h)) / 2.0;
    EXPECT_NEAR(mse_regions(a, b).global_mse / cap, 1.0, 1e-3) << h;
  }
}

TEST(Mse, RegionsSeparate) {
  const int h = 180;
  Image a(2 * h, h, 3, 0.0f), b(2 * h, h, 3, 0.0f);
  for (int y = 0; y < 20; ++y)  // latitudes above 70 deg
    for (int x = 0; x < 2 * h; ++x) b.at(x, y, 0) = 0.5f;
  const MetricReport r = mse_regions(a, b);
  EXPECT_GT(r.pole_mse, 0.0);
  EXPECT_EQ(r.equator_mse, 0.0);
}

TEST(Mse, SymmetricAndZeroOnlyWhenEqual) {
  const Image a = fixtures::smooth_panorama(64, 2), b = fixtures::smooth_panorama(64, 3);
  const MetricReport ab = mse_regions(a, b), ba = mse_regions(b, a);
  EXPECT_EQ(ab.global_mse, ba.global_mse);
  EXPECT_EQ(ab.pole_mse, ba.pole_mse);
  EXPECT_GT(ab.global_mse, 0.0);
  EXPECT_THROW(mse_regions(a, Image(64, 64, 3)), DataError);
}

TEST(Seam, ConstantRowsGiveOne) {
  Image img(64, 32, 3);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = float(y) / 32.0f;
  EXPECT_EQ(seam_score(img), 1.0);
}

TEST(Seam, HardCutScoresHigh) {
  Image img(64, 32, 3, 0.0f);
  for (int y = 0; y < 32; ++y)
    for (int x = 32; x < 64; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 1.0f;
  EXPECT_GT(seam_score(img), 5.0);
  EXPECT_NEAR(seam_score(img), 63.0, 1e-9);
}

TEST(Seam, RotationInvariantForSeamFreePanorama) {
  // Texture whose statistics do not depend on longitude: per-row sinusoids
  // with random phases, periodic across the seam.
  const int h = 256, w = 512;
  Image pano(w, h, 3);
  Rng rng(4);
  for (int y = 0; y < h; ++y)
    for (int c = 0; c < 3; ++c) {
      const double p1 = rng.uniform(0, 2 * kPi), p2 = rng.uniform(0, 2 * kPi);
      const int k1 = rng.between(3, 9), k2 = rng.between(10, 30);
      for (int x = 0; x < w; ++x) {
        const double lon = 2 * kPi * (x + 0.5) / w;
        pano.at(x, y, c) = float(0.5 + 0.25 * std::sin(k1 * lon + p1) + 0.1 * std::sin(k2 * lon + p2));
      }
    }
  const double base = seam_score(pano);
  EXPECT_LT(base, 1.5);
  for (int shift : {1, 17, 64, 200}) EXPECT_NEAR(seam_score(rotate_columns(pano, shift)), base, 0.1 * base);
}

TEST(Report, JsonFieldNames) {
  const Image a = fixtures::smooth_panorama(64, 5), b = fixtures::smooth_panorama(64, 6);
  const nlohmann::json j = to_json(compare_images(a, b, standard_view_set(60.0, 32)));
  for (const char* key : {"global_mse", "pole_mse", "equator_mse", "seam_score", "psnr", "coverage_min", "coverage_max"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.size(), 7u);
  EXPECT_GE(j["coverage_min"].get<double>(), 1.0);
  EXPECT_GE(j["coverage_max"].get<double>(), 2.0);
}

TEST(Median, MaskedAndUnmasked) {
  Image a(4, 2, 3, 0.0f), b(4, 2, 3, 0.0f);
  b.at(0, 0, 0) = 1.0f;
  EXPECT_EQ(median_abs_error(a, b), 0.0);
  Mask m(4, 2);
  m.set(0, 0, true);
  b.at(0, 0, 1) = 1.0f;
  EXPECT_EQ(median_abs_error(a, b, m), 1.0);
}
