#pragma once

#include <nlohmann/json.hpp>

#include "odis/image.hpp"
#include "odis/projection.hpp"

namespace odis {

/// Desk-scale quality report. MSE fields are area-weighted by cos(latitude)
/// over [0, 1]-normalized samples; psnr is +inf for identical images.
struct MetricReport {
  double global_mse = 0.0;
  double pole_mse = 0.0;     // |lat| > 60 deg
  double equator_mse = 0.0;  // |lat| < 30 deg
  double seam_score = 1.0;
  double psnr = 0.0;
  double coverage_min = 0.0;
  double coverage_max = 0.0;
};

/// Fills the three MSE fields and psnr. Throws DataError on a shape mismatch.
MetricReport mse_regions(const Image& a, const Image& b);

double psnr_from_mse(double mse);

/// Mean |col 0 - col W-1| divided by the mean absolute difference of all
/// adjacent column pairs. 1.0 for 0/0, +inf for x/0 with x > 0.
double seam_score(const Image& erp);

/// mse_regions(reference, candidate) plus the candidate's seam score and the
/// coverage range of `views` at the image size.
MetricReport compare_images(const Image& reference, const Image& candidate, const ViewSet& views);

/// JSON object keyed by the MetricReport field names; an infinite psnr is
/// written as null.
nlohmann::json to_json(const MetricReport& r);

/// Median absolute per-sample difference.
double median_abs_error(const Image& a, const Image& b);
double median_abs_error(const Image& a, const Image& b, const Mask& where);

}  // namespace odis
