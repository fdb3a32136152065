#include "odis/blending.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "odis/error.hpp"

namespace odis {

std::vector<double> blend_pixel(std::span<const BlendSample> samples) {
  if (samples.empty()) throw DataError("blend_pixel needs at least one sample");
  std::vector<const BlendSample*> order;
  for (const BlendSample& s : samples) {
    if (s.color.size() != samples.front().color.size()) throw DataError("blend samples disagree on channel count");
    order.push_back(&s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const BlendSample* a, const BlendSample* b) { return a->view_index < b->view_index; });
  double sum = 0.0, max_weight = 0.0;
  for (const BlendSample* s : order) {
    const double w = raw_blend_weight(s->distance, s->half_diagonal);
    sum += w;
    max_weight = std::max(max_weight, w);
  }
  const bool degenerate = max_weight < kDegenerateWeight;
  std::vector<double> out(samples.front().color.size(), 0.0);
  for (const BlendSample* s : order) {
    const double w = raw_blend_weight(s->distance, s->half_diagonal);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += degenerate ? s->color[c] : (w / sum) * s->color[c];
  }
  if (degenerate) {
    for (double& v : out) v /= double(order.size());
  }
  return out;
}

BlendAccumulator::BlendAccumulator(int width, int height, int channels)
    : width_(width),
      height_(height),
      channels_(channels),
      weight_sum_(std::size_t(width) * std::size_t(height), 0.0),
      max_weight_(std::size_t(width) * std::size_t(height), 0.0),
      count_(std::size_t(width) * std::size_t(height), 0),
      color_(std::size_t(width) * std::size_t(height) * std::size_t(channels), 0.0) {}

void BlendAccumulator::add_weight(int x, int y, double raw_weight) {
  const std::size_t o = offset(x, y);
  weight_sum_[o] += raw_weight;
  max_weight_[o] = std::max(max_weight_[o], raw_weight);
  ++count_[o];
}

void BlendAccumulator::add_color(int x, int y, double raw_weight, std::span<const float> color) {
  const std::size_t o = offset(x, y);
  double* acc = color_.data() + o * std::size_t(channels_);
  if (max_weight_[o] < kDegenerateWeight) {
    for (int c = 0; c < channels_; ++c) acc[c] += color[std::size_t(c)];
    return;
  }
  const double w = raw_weight / weight_sum_[o];
  for (int c = 0; c < channels_; ++c) acc[c] += w * color[std::size_t(c)];
}

int BlendAccumulator::uncovered_count() const {
  return int(std::count(count_.begin(), count_.end(), 0));
}

Image BlendAccumulator::finish() const {
  if (const int missing = uncovered_count(); missing > 0) {
    throw DataError("blend leaves " + std::to_string(missing) + " ERP pixels uncovered");
  }
  Image out(width_, height_, channels_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const std::size_t o = offset(x, y);
      const double scale = max_weight_[o] < kDegenerateWeight ? 1.0 / count_[o] : 1.0;
      for (int c = 0; c < channels_; ++c) {
        out.at(x, y, c) = float(color_[o * std::size_t(channels_) + std::size_t(c)] * scale);
      }
    }
  }
  return out;
}

namespace {

std::vector<const ProjectedView*> sorted_views(std::span<const ProjectedView> views) {
  if (views.empty()) throw DataError("blend needs at least one view");
  std::vector<const ProjectedView*> order;
  order.reserve(views.size());
  for (const ProjectedView& v : views) {
    if (v.erp_width() != views.front().erp_width() || v.erp_height() != views.front().erp_height() ||
        v.channels() != views.front().channels()) {
      throw DataError("projected views disagree on ERP size or channel count");
    }
    order.push_back(&v);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const ProjectedView* a, const ProjectedView* b) { return a->index() < b->index(); });
  return order;
}

BlendAccumulator accumulate_weights(const std::vector<const ProjectedView*>& order) {
  const ProjectedView& first = *order.front();
  BlendAccumulator acc(first.erp_width(), first.erp_height(), first.channels());
  for (const ProjectedView* v : order) {
    for (int y = v->row_begin(); y < v->row_end(); ++y) {
      for (int x = 0; x < v->erp_width(); ++x) {
        if (v->covered(x, y)) acc.add_weight(x, y, raw_blend_weight(v->distance(x, y), v->half_diagonal()));
      }
    }
  }
  return acc;
}

}  // namespace

Image blend_views(std::span<const ProjectedView> views) {
  const auto order = sorted_views(views);
  BlendAccumulator acc = accumulate_weights(order);
  for (const ProjectedView* v : order) {
    for (int y = v->row_begin(); y < v->row_end(); ++y) {
      for (int x = 0; x < v->erp_width(); ++x) {
        if (v->covered(x, y)) {
          acc.add_color(x, y, raw_blend_weight(v->distance(x, y), v->half_diagonal()), v->color(x, y));
        }
      }
    }
  }
  return acc.finish();
}

double BlendWeights::max_partition_error() const {
  double worst = 0.0;
  const std::size_t n = std::size_t(width) * std::size_t(height);
  for (std::size_t p = 0; p < n; ++p) {
    double sum = 0.0;
    bool any = false;
    for (std::size_t v = 0; v < weights.size(); ++v) {
      if (weights[v][p] > 0.0 || weights[v][p] < 0.0) any = true;
      sum += weights[v][p];
    }
    if (any) worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

BlendWeights blend_weights(std::span<const ProjectedView> views) {
  const auto order = sorted_views(views);
  const BlendAccumulator acc = accumulate_weights(order);
  BlendWeights out;
  out.width = order.front()->erp_width();
  out.height = order.front()->erp_height();
  for (const ProjectedView* v : order) {
    out.view_index.push_back(v->index());
    std::vector<double> w(std::size_t(out.width) * std::size_t(out.height), 0.0);
    for (int y = v->row_begin(); y < v->row_end(); ++y) {
      for (int x = 0; x < out.width; ++x) {
        if (!v->covered(x, y)) continue;
        const double wi = acc.degenerate(x, y) ? 1.0 / acc.count(x, y)
                                               : raw_blend_weight(v->distance(x, y), v->half_diagonal()) /
                                                     acc.weight_sum(x, y);
        w[std::size_t(y) * std::size_t(out.width) + std::size_t(x)] = wi;
      }
    }
    out.weights.push_back(std::move(w));
  }
  return out;
}

ViewBlender::ViewBlender(const ViewSet& views, int width, int height, int channels)
    : views_(views), grid_(width, height), acc_(width, height, channels) {
  for (const NfovCamera& cam : views_.cameras) {
    cam.validate();
    const double half_diag = cam.half_diagonal();
    for_each_footprint_pixel(grid_, cam, [&](int x, int y, const PlanePoint& p) {
      acc_.add_weight(x, y, raw_blend_weight(p.distance, half_diag));
    });
  }
}

void ViewBlender::add(int index, const Image& pixels) {
  if (index != next_index_ || index >= int(views_.size())) {
    throw std::invalid_argument("views must be added once each in ascending index order");
  }
  ++next_index_;
  const NfovCamera& cam = views_.cameras[std::size_t(index)];
  if (pixels.width() != cam.width || pixels.height() != cam.height) {
    throw DataError("view " + std::to_string(index) + " does not match its camera resolution");
  }
  const double half_diag = cam.half_diagonal();
  std::vector<float> color(std::size_t(pixels.channels()));
  for_each_footprint_pixel(grid_, cam, [&](int x, int y, const PlanePoint& p) {
    sample_bilinear(pixels, p.i, p.j, Wrap::kClamp, color);
    acc_.add_color(x, y, raw_blend_weight(p.distance, half_diag), color);
  });
}

Image ViewBlender::finish() const {
  if (next_index_ != int(views_.size())) throw std::logic_error("ViewBlender finished before all views were added");
  return acc_.finish();
}

EmbeddedCondition embed_nfov_center(const Image& nfov, double fov_w_deg, double fov_h_deg, int width, int height) {
  NfovCamera cam{camera_frame_for(UnitVec3::trusted({0.0, 0.0, 1.0})), fov_w_deg, fov_h_deg, nfov.width(),
                 nfov.height()};
  cam.validate();
  const ProjectedView view = project_nfov_to_erp({cam, nfov}, width, height);
  return {view.colors(), view.coverage()};
}

}  // namespace odis
