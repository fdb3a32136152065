#pragma once

#include <span>
#include <vector>

#include "odis/image.hpp"
#include "odis/projection.hpp"

namespace odis {

/// Raw weight of a covered pixel at distance d from the view center, where
/// half_diagonal is the largest distance that view can produce.
inline double raw_blend_weight(double distance, double half_diagonal) { return 1.0 - distance / half_diagonal; }

/// Below this every covering view is treated as weightless and the pixel
/// falls back to the unweighted mean.
inline constexpr double kDegenerateWeight = 1e-12;

/// One covering view at a single ERP pixel.
struct BlendSample {
  int view_index = 0;
  double distance = 0.0;
  double half_diagonal = 1.0;
  std::span<const double> color;
};

/// Double-precision merge of one pixel with the same arithmetic as
/// blend_views: samples are visited in ascending view_index order.
std::vector<double> blend_pixel(std::span<const BlendSample> samples);

/// Per-pixel accumulation of the distance-weighted merge. Weights must be
/// registered for every view (pass 1) before any color is added (pass 2),
/// and both passes must visit views in ascending index order.
class BlendAccumulator {
 public:
  BlendAccumulator(int width, int height, int channels);

  void add_weight(int x, int y, double raw_weight);
  void add_color(int x, int y, double raw_weight, std::span<const float> color);

  int uncovered_count() const;
  /// Throws DataError naming the number of uncovered pixels.
  Image finish() const;

  double weight_sum(int x, int y) const { return weight_sum_[offset(x, y)]; }
  bool degenerate(int x, int y) const { return max_weight_[offset(x, y)] < kDegenerateWeight; }
  int count(int x, int y) const { return count_[offset(x, y)]; }

 private:
  std::size_t offset(int x, int y) const { return std::size_t(y) * std::size_t(width_) + std::size_t(x); }

  int width_;
  int height_;
  int channels_;
  std::vector<double> weight_sum_;
  std::vector<double> max_weight_;
  std::vector<int> count_;
  std::vector<double> color_;
};

/// Merge overlapping projected views: y = sum_i (w_i / sum_k w_k) x_i with
/// w_i = 1 - d_i / D_i. Views are combined in ascending index() order, so the
/// result does not depend on the order of the input list. Throws DataError
/// if any ERP pixel is left uncovered.
Image blend_views(std::span<const ProjectedView> views);

/// Normalized per-view weights (0 where a view does not cover the pixel).
struct BlendWeights {
  int width = 0;
  int height = 0;
  std::vector<int> view_index;
  std::vector<std::vector<double>> weights;  // [view][y * width + x]

  /// max over covered pixels of |sum_i w_i - 1|.
  double max_partition_error() const;
};

BlendWeights blend_weights(std::span<const ProjectedView> views);

/// Streams NFoV images through projection and blending without keeping every
/// ProjectedView in memory. Produces the same bits as blend_views over the
/// same views.
class ViewBlender {
 public:
  ViewBlender(const ViewSet& views, int width, int height, int channels = 3);

  /// Views must be added in ascending index order, each exactly once.
  void add(int index, const Image& pixels);
  Image finish() const;

 private:
  ViewSet views_;
  ErpGrid grid_;
  BlendAccumulator acc_;
  int next_index_ = 0;
};

struct EmbeddedCondition {
  Image erp;
  Mask known;
};

/// Projects an NFoV image onto an otherwise-zero ERP through a +z-facing
/// camera with the given full FOVs (degrees).
EmbeddedCondition embed_nfov_center(const Image& nfov, double fov_w_deg, double fov_h_deg, int width, int height);

}  // namespace odis
