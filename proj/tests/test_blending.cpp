#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "odis/blending.hpp"
#include "odis/error.hpp"
#include "odis/metrics.hpp"
#include "odis/scene.hpp"
#include "test_support.hpp"

using namespace odis;

namespace {

ProjectedView full_view(int index, int w, int h, double half_diag, double distance, const Image& colors) {
  ProjectedView v(index, w, h, 0, h, colors.channels(), half_diag);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) v.set(x, y, distance, colors.pixel(x, y));
  return v;
}

std::vector<ProjectedView> standard_projections(const Image& erp, int size) {
  const ViewSet set = standard_view_set(60.0, size);
  std::vector<ProjectedView> out;
  for (std::size_t k = 0; k < set.size(); ++k) {
    out.push_back(project_nfov_to_erp(extract_nfov(erp, set.cameras[k]), erp.width(), erp.height(), int(k)));
  }
  return out;
}

}  // namespace

TEST(BlendFormula, CenterAndCornerGivesCenterView) {
  const Image a = fixtures::random_image(8, 4, 1), b = fixtures::random_image(8, 4, 2);
  const std::vector<ProjectedView> views{full_view(0, 8, 4, 10.0, 0.0, a), full_view(1, 8, 4, 10.0, 10.0, b)};
  EXPECT_EQ(blend_views(views), a);
}

TEST(BlendFormula, SymmetricPairIsMidpoint) {
  const Image a = fixtures::random_image(8, 4, 3), b = fixtures::random_image(8, 4, 4);
  const std::vector<ProjectedView> views{full_view(0, 8, 4, 10.0, 3.0, a), full_view(1, 8, 4, 10.0, 3.0, b)};
  const Image y = blend_views(views);
  for (int yy = 0; yy < 4; ++yy)
    for (int x = 0; x < 8; ++x)
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(y.at(x, yy, c), float((double(a.at(x, yy, c)) + double(b.at(x, yy, c))) / 2.0));
      }
}

TEST(BlendFormula, DoublePrecisionClosedForm) {
  Rng rng(5);
  for (int n = 0; n < 1000; ++n) {
    const double D = rng.uniform(10, 200);
    const double di = rng.uniform(0, D), dj = rng.uniform(0, D);
    const double xi[1] = {rng.uniform()}, xj[1] = {rng.uniform()};
    const BlendSample s[2] = {{0, di, D, xi}, {1, dj, D, xj}};
    const double wi = 1.0 - di / D, wj = 1.0 - dj / D;
    EXPECT_EQ(blend_pixel(s)[0], wi / (wi + wj) * xi[0] + wj / (wi + wj) * xj[0]);
  }
}

TEST(BlendFormula, DegenerateFallsBackToMean) {
  const Image a(4, 2, 3, 0.2f), b(4, 2, 3, 0.6f);
  const std::vector<ProjectedView> views{full_view(0, 4, 2, 5.0, 5.0, a), full_view(1, 4, 2, 5.0, 5.0, b)};
  const Image y = blend_views(views);
  for (float v : y.data()) EXPECT_FLOAT_EQ(v, 0.4f);
}

TEST(Blend, UncoveredPixelsAreReported) {
  ProjectedView v(0, 4, 2, 0, 2, 3, 5.0);
  const float c[3] = {0, 0, 0};
  v.set(0, 0, 1.0, c);
  try {
    (void)blend_views(std::span(&v, 1));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(Blend, PartitionOfUnity) {
  const Image erp = fixtures::smooth_panorama(128, 6);
  const auto views = standard_projections(erp, 64);
  EXPECT_LT(blend_weights(views).max_partition_error(), 1e-9);
}

TEST(Blend, AgreementIsIdempotent) {
  const Image erp(256, 128, 3, 0.37f);
  const auto views = standard_projections(erp, 64);
  const Image y = blend_views(views);
  for (float v : y.data()) EXPECT_NEAR(v, 0.37f, 0.37f * 1.2e-7f);
}

TEST(Blend, PermutationInvariant) {
  const Image erp = fixtures::smooth_panorama(128, 7);
  auto views = standard_projections(erp, 64);
  const Image ref = blend_views(views);
  Rng rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    for (std::size_t i = views.size() - 1; i > 0; --i) std::swap(views[i], views[rng.below(i + 1)]);
    EXPECT_EQ(blend_views(views), ref);
  }
}

TEST(Blend, StreamingMatchesBatch) {
  const Image erp = fixtures::smooth_panorama(128, 9);
  const ViewSet set = standard_view_set(60.0, 64);
  ViewBlender blender(set, 256, 128);
  std::vector<ProjectedView> views;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const NfovImage v = extract_nfov(erp, set.cameras[k]);
    blender.add(int(k), v.pixels);
    views.push_back(project_nfov_to_erp(v, 256, 128, int(k)));
  }
  EXPECT_EQ(blender.finish(), blend_views(views));
}

TEST(Blend, StreamingRejectsOutOfOrderViews) {
  ViewBlender blender(standard_view_set(60.0, 16), 64, 32);
  EXPECT_THROW(blender.add(1, Image(16, 16)), std::invalid_argument);
}

TEST(Blend, RoundTripThroughViews) {
  const Image erp = render_scene(random_scene(10), 256, 2);
  const Image out = blend_views(standard_projections(erp, 128));
  EXPECT_LE(median_abs_error(erp, out), 3.0 / 255.0);
  EXPECT_LE(seam_score(out), 1.5);
}

TEST(Embed, FootprintSpansHalfFov) {
  const EmbeddedCondition c = embed_nfov_center(Image(400, 300, 3, 0.5f), 126.87, 112.62, 2048, 1024);
  const int row = 511;  // a row whose center latitude is just above the equator
  int first = -1, last = -1;
  for (int x = 0; x < 2048; ++x)
    if (c.known.get(x, row)) {
      if (first < 0) first = x;
      last = x;
    }
  const double half = std::atan(std::tan(126.87 / 2 * kPi / 180)) * 180 / kPi;
  const double lon_first = (first + 0.5) * 360.0 / 2048 - 180.0;
  const double lon_last = (last + 0.5) * 360.0 / 2048 - 180.0;
  EXPECT_NEAR(lon_first, -half, 360.0 / 2048);
  EXPECT_NEAR(lon_last, half, 360.0 / 2048);
  EXPECT_NEAR(half, 63.435, 1e-3);
}

TEST(Embed, DefaultFovsGiveFourByThreePlane) {
  EXPECT_NEAR(std::tan(126.87 / 2 * kPi / 180), 2.0, 1e-3);
  EXPECT_NEAR(std::tan(112.62 / 2 * kPi / 180), 1.5, 1e-3);
}

TEST(Embed, TinyFovCoversAlmostNothing) {
  const EmbeddedCondition c = embed_nfov_center(Image(8, 8, 3, 0.5f), 1.0, 1.0, 1024, 512);
  EXPECT_GT(c.known.count(), 0u);
  EXPECT_LT(c.known.fraction(), 0.001);
}

TEST(Embed, UnknownIsZero) {
  const EmbeddedCondition c = embed_nfov_center(Image(40, 30, 3, 0.5f), 90, 60, 256, 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 256; ++x)
      if (!c.known.get(x, y))
        for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(c.erp.at(x, y, ch), 0.0f);
}
