#include "odis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "odis/error.hpp"

namespace odis {

namespace {

constexpr double kDeg = kPi / 180.0;

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw DataError("images differ in size or channel count");
}

}  // namespace

double psnr_from_mse(double mse) {
  if (mse <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

MetricReport mse_regions(const Image& a, const Image& b) {
  require_same_shape(a, b);
  if (a.height() <= 0 || a.width() != 2 * a.height()) throw DataError("metrics expect a 2:1 ERP image");
  const int w = a.width();
  const int h = a.height();
  const int ch = a.channels();
  double sum_all = 0.0, w_all = 0.0;
  double sum_pole = 0.0, w_pole = 0.0;
  double sum_eq = 0.0, w_eq = 0.0;
  for (int y = 0; y < h; ++y) {
    const double lat = 0.5 * kPi - kPi * (y + 0.5) / h;
    const double weight = std::cos(lat);
    double row = 0.0;
    const auto ra = a.data().subspan(std::size_t(y) * std::size_t(w) * std::size_t(ch), std::size_t(w) * std::size_t(ch));
    const auto rb = b.data().subspan(std::size_t(y) * std::size_t(w) * std::size_t(ch), std::size_t(w) * std::size_t(ch));
    for (std::size_t i = 0; i < ra.size(); ++i) {
      const double d = double(ra[i]) - double(rb[i]);
      row += d * d;
    }
    const double row_weight = weight * double(w) * double(ch);
    sum_all += weight * row;
    w_all += row_weight;
    if (std::abs(lat) > 60.0 * kDeg) {
      sum_pole += weight * row;
      w_pole += row_weight;
    }
    if (std::abs(lat) < 30.0 * kDeg) {
      sum_eq += weight * row;
      w_eq += row_weight;
    }
  }
  MetricReport r;
  r.global_mse = w_all > 0.0 ? sum_all / w_all : 0.0;
  r.pole_mse = w_pole > 0.0 ? sum_pole / w_pole : 0.0;
  r.equator_mse = w_eq > 0.0 ? sum_eq / w_eq : 0.0;
  r.psnr = psnr_from_mse(r.global_mse);
  return r;
}

double seam_score(const Image& erp) {
  const int w = erp.width();
  const int h = erp.height();
  const int ch = erp.channels();
  if (w < 2) return 1.0;
  double seam = 0.0;
  double interior = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int c = 0; c < ch; ++c) {
      seam += std::abs(double(erp.at(0, y, c)) - double(erp.at(w - 1, y, c)));
      for (int x = 0; x + 1 < w; ++x) interior += std::abs(double(erp.at(x + 1, y, c)) - double(erp.at(x, y, c)));
    }
  }
  seam /= double(h) * double(ch);
  interior /= double(h) * double(ch) * double(w - 1);
  if (interior == 0.0) return seam == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return seam / interior;
}

MetricReport compare_images(const Image& reference, const Image& candidate, const ViewSet& views) {
  MetricReport r = mse_regions(reference, candidate);
  r.seam_score = seam_score(candidate);
  const auto counts = coverage_of_viewset(views, reference.width(), reference.height());
  if (!counts.empty()) {
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    r.coverage_min = *lo;
    r.coverage_max = *hi;
  }
  return r;
}

nlohmann::json to_json(const MetricReport& r) {
  nlohmann::json j;
  j["global_mse"] = r.global_mse;
  j["pole_mse"] = r.pole_mse;
  j["equator_mse"] = r.equator_mse;
  j["seam_score"] = std::isfinite(r.seam_score) ? nlohmann::json(r.seam_score) : nlohmann::json(nullptr);
  j["psnr"] = std::isfinite(r.psnr) ? nlohmann::json(r.psnr) : nlohmann::json(nullptr);
  j["coverage_min"] = r.coverage_min;
  j["coverage_max"] = r.coverage_max;
  return j;
}

double median_abs_error(const Image& a, const Image& b) {
  require_same_shape(a, b);
  std::vector<float> diff(a.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(a.data()[i] - b.data()[i]);
  if (diff.empty()) return 0.0;
  auto mid = diff.begin() + std::ptrdiff_t(diff.size() / 2);
  std::nth_element(diff.begin(), mid, diff.end());
  return *mid;
}

double median_abs_error(const Image& a, const Image& b, const Mask& where) {
  require_same_shape(a, b);
  if (where.width() != a.width() || where.height() != a.height()) throw DataError("mask does not match the images");
  std::vector<float> diff;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!where.get(x, y)) continue;
      for (int c = 0; c < a.channels(); ++c) diff.push_back(std::abs(a.at(x, y, c) - b.at(x, y, c)));
    }
  }
  if (diff.empty()) return 0.0;
  auto mid = diff.begin() + std::ptrdiff_t(diff.size() / 2);
  std::nth_element(diff.begin(), mid, diff.end());
  return *mid;
}

}  // namespace odis
