#include "odis/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "odis/error.hpp"

namespace odis {

namespace {

void add_footprint(Mask& mask, const NfovCamera& cam) {
  const ErpGrid grid(mask.width(), mask.height());
  for_each_footprint_pixel(grid, cam, [&](int x, int y, const PlanePoint&) { mask.set(x, y, true); });
}

NfovCamera footprint_camera(double yaw_deg, double fov_w, double fov_h) {
  NfovCamera cam{camera_frame_for_yaw_pitch(yaw_deg, 0.0), fov_w, fov_h, 1, 1};
  cam.validate();
  return cam;
}

Mask random_boxes(const RandomBoxes& spec, int width, int height, Rng& rng) {
  if (spec.min_count < 1 || spec.max_count < spec.min_count || !(spec.min_fraction >= 0.0) ||
      !(spec.max_fraction <= 1.0) || spec.max_fraction < spec.min_fraction) {
    throw std::invalid_argument("invalid random-box parameters");
  }
  const double total = double(width) * double(height);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int count = rng.between(spec.min_count, spec.max_count);
    const double target = rng.uniform(spec.min_fraction, spec.max_fraction);
    Mask unknown(width, height);
    for (int b = 0; b < count; ++b) {
      // Each box gets roughly its share of the target area, with random aspect.
      const double area = target / count * rng.uniform(0.6, 1.6) * total;
      const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(4.0)));
      const int bw = std::clamp(int(std::lround(std::sqrt(area * aspect))), 1, width);
      const int bh = std::clamp(int(std::lround(std::sqrt(area / aspect))), 1, height);
      const int x0 = int(rng.below(std::uint64_t(width)));
      const int y0 = int(rng.below(std::uint64_t(height - bh + 1)));
      for (int y = y0; y < y0 + bh; ++y) {
        for (int x = 0; x < bw; ++x) unknown.set((x0 + x) % width, y, true);
      }
    }
    const double frac = unknown.fraction();
    if (frac >= spec.min_fraction && frac <= spec.max_fraction) {
      Mask known(width, height);
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) known.set(x, y, !unknown.get(x, y));
      }
      return known;
    }
  }
  throw DataError("could not draw boxes within the requested coverage range");
}

}  // namespace

Mask condition_mask(const ConditionSpec& spec, int width, int height, Rng& rng) {
  if (height <= 0 || width != 2 * height) throw std::invalid_argument("condition mask must be 2:1");
  Mask known = std::visit(
      [&](const auto& s) -> Mask {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CenterNfov>) {
          Mask m(width, height);
          add_footprint(m, footprint_camera(0.0, s.fov_w_deg, s.fov_h_deg));
          return m;
        } else if constexpr (std::is_same_v<T, RandomBoxes>) {
          return random_boxes(s, width, height, rng);
        } else if constexpr (std::is_same_v<T, GroundRegion>) {
          if (!(s.lat_threshold > -0.5 * kPi && s.lat_threshold <= 0.5 * kPi)) {
            throw std::invalid_argument("ground threshold must lie in (-pi/2, pi/2]");
          }
          const ErpGrid grid(width, height);
          Mask m(width, height);
          for (int y = 0; y < height; ++y) {
            const bool k = grid.latitude(y) >= s.lat_threshold;
            for (int x = 0; x < width; ++x) m.set(x, y, k);
          }
          return m;
        } else if constexpr (std::is_same_v<T, TwoView>) {
          Mask m(width, height);
          add_footprint(m, footprint_camera(0.0, s.fov_w_deg, s.fov_h_deg));
          add_footprint(m, footprint_camera(s.yaw_offset_deg, s.fov_w_deg, s.fov_h_deg));
          return m;
        } else {
          if (s.known.width() != width || s.known.height() != height) {
            throw DataError("explicit mask does not match the ERP size");
          }
          return s.known;
        }
      },
      spec);
  if (!std::holds_alternative<ExplicitMask>(spec) && known.count() == 0) {
    throw DataError("condition has an empty known region");
  }
  return known;
}

Condition make_condition(const Image& erp, const ConditionSpec& spec, Rng& rng) {
  Mask known = condition_mask(spec, erp.width(), erp.height(), rng);
  return {apply_mask(erp, known), std::move(known)};
}

std::vector<ViewCondition> condition_to_views(const Image& cond, const Mask& known, const ViewSet& views) {
  if (cond.width() != known.width() || cond.height() != known.height()) {
    throw DataError("conditional image and mask differ in size");
  }
  std::vector<ViewCondition> out;
  out.reserve(views.size());
  for (const NfovCamera& cam : views.cameras) {
    out.push_back({extract_nfov(cond, cam).pixels, extract_nfov_mask(known, cam)});
  }
  return out;
}

}  // namespace odis
