#pragma once

#include <variant>
#include <vector>

#include "odis/image.hpp"
#include "odis/projection.hpp"
#include "odis/random.hpp"

namespace odis {

/// Single NFoV image embedded at the ERP center (+z).
struct CenterNfov {
  double fov_w_deg = 126.87;
  double fov_h_deg = 112.62;
};

/// Unknown region made of axis-aligned ERP rectangles (wrapping across the
/// seam), with the union covering a fraction in [min_fraction, max_fraction].
struct RandomBoxes {
  int min_count = 1;
  int max_count = 8;
  double min_fraction = 0.2;
  double max_fraction = 0.8;
};

/// Everything below the latitude threshold (radians) is unknown.
struct GroundRegion {
  double lat_threshold = -0.7853981633974483;
};

/// Two center-style footprints separated in yaw.
struct TwoView {
  double fov_w_deg = 126.87;
  double fov_h_deg = 112.62;
  double yaw_offset_deg = 180.0;
};

/// Caller-supplied known mask at the ERP resolution.
struct ExplicitMask {
  Mask known;
};

using ConditionSpec = std::variant<CenterNfov, RandomBoxes, GroundRegion, TwoView, ExplicitMask>;

struct Condition {
  Image image;  // source where known, exactly zero elsewhere
  Mask known;
};

/// Known-region mask for a spec at the given ERP size. Throws
/// std::invalid_argument for out-of-range parameters and DataError when a
/// conditioning variant ends up with no known pixels.
Mask condition_mask(const ConditionSpec& spec, int width, int height, Rng& rng);

Condition make_condition(const Image& erp, const ConditionSpec& spec, Rng& rng);

struct ViewCondition {
  Image image;
  Mask known;
};

/// Bilinear extraction of the conditional image and nearest-neighbour
/// extraction of its mask through every camera.
std::vector<ViewCondition> condition_to_views(const Image& cond, const Mask& known, const ViewSet& views);

}  // namespace odis
