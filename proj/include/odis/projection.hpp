#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "odis/geometry.hpp"
#include "odis/image.hpp"

namespace odis {

/// Perspective (gnomonic) camera. FOVs are full angles in degrees.
struct NfovCamera {
  CameraFrame frame;
  double fov_w_deg = 60.0;
  double fov_h_deg = 60.0;
  int width = 256;
  int height = 256;

  /// Throws std::invalid_argument unless 0 < fov < 180 and resolution >= 1.
  void validate() const;

  double tan_half_w() const;
  double tan_half_h() const;
  /// Distance from the image center to a corner, in pixels.
  double half_diagonal() const;
};

NfovCamera make_camera(const UnitVec3& forward, double fov_deg, int size);

struct NfovImage {
  NfovCamera camera;
  Image pixels;
};

/// Ordered list of cameras; the list index is the view index.
struct ViewSet {
  std::vector<NfovCamera> cameras;

  std::size_t size() const { return cameras.size(); }
};

/// 26 rhombicuboctahedron views with a square FOV and resolution.
ViewSet standard_view_set(double fov_deg = 60.0, int size = 256);

/// Views for a user-supplied direction list (north-up frames).
ViewSet view_set_from_directions(std::span<const UnitVec3> directions, double fov_deg, int size);

UnitVec3 nfov_pixel_to_direction(const NfovCamera& cam, double i, double j);

struct PlanePoint {
  double i = 0.0;  // continuous NFoV pixel column
  double j = 0.0;  // continuous NFoV pixel row
  double distance = 0.0;  // pixels from the image center
};

/// Where a direction lands on the camera image, if it is inside the frustum
/// (|a| <= tan(fov_w/2), |b| <= tan(fov_h/2), forward . d > 0).
std::optional<PlanePoint> direction_to_nfov_pixel(const NfovCamera& cam, const UnitVec3& d);

/// Sampling grid of an ERP: per-row sin/cos of latitude and per-column
/// sin/cos of longitude at pixel centers.
class ErpGrid {
 public:
  ErpGrid(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  Vec3 direction(int x, int y) const {
    return {cos_lat_[std::size_t(y)] * sin_lon_[std::size_t(x)], sin_lat_[std::size_t(y)],
            cos_lat_[std::size_t(y)] * cos_lon_[std::size_t(x)]};
  }
  double latitude(int y) const { return lat_[std::size_t(y)]; }

  /// Inclusive-exclusive row range that can contain pixels of the camera's footprint.
  std::pair<int, int> row_bounds(const NfovCamera& cam) const;

 private:
  int width_;
  int height_;
  std::vector<double> lat_, sin_lat_, cos_lat_, sin_lon_, cos_lon_;
};

/// Bilinear extraction with horizontal wrap and vertical clamp on the ERP.
NfovImage extract_nfov(const Image& erp, const NfovCamera& cam);

/// Nearest-neighbour extraction of a binary mask.
Mask extract_nfov_mask(const Mask& erp_mask, const NfovCamera& cam);

/// One view re-projected onto an ERP grid. Only rows [row_begin, row_end)
/// are stored; pixels outside that band are uncovered.
class ProjectedView {
 public:
  ProjectedView() = default;
  ProjectedView(int index, int erp_width, int erp_height, int row_begin, int row_end, int channels,
                double half_diagonal);

  int index() const { return index_; }
  int erp_width() const { return erp_width_; }
  int erp_height() const { return erp_height_; }
  int row_begin() const { return row_begin_; }
  int row_end() const { return row_end_; }
  int channels() const { return colors_.channels(); }
  double half_diagonal() const { return half_diagonal_; }

  bool covered(int x, int y) const {
    return y >= row_begin_ && y < row_end_ && coverage_.get(x, y - row_begin_);
  }
  /// Distance in NFoV pixels; +inf where uncovered.
  double distance(int x, int y) const;
  std::span<const float> color(int x, int y) const { return colors_.pixel(x, y - row_begin_); }

  void set(int x, int y, double distance, std::span<const float> color);
  /// Overrides the stored distance at a covered pixel (hand-built test views).
  void set_distance(int x, int y, double distance);

  /// Full-size coverage mask.
  Mask coverage() const;
  /// Full-size color image (zeros where uncovered).
  Image colors() const;

 private:
  int index_ = 0;
  int erp_width_ = 0;
  int erp_height_ = 0;
  int row_begin_ = 0;
  int row_end_ = 0;
  double half_diagonal_ = 0.0;
  Image colors_;
  Mask coverage_;
  std::vector<double> distance_;
};

/// Visit every ERP pixel inside the camera frustum.
template <typename Fn>
void for_each_footprint_pixel(const ErpGrid& grid, const NfovCamera& cam, Fn&& fn) {
  const auto [y0, y1] = grid.row_bounds(cam);
  for (int y = y0; y < y1; ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const Vec3 d = grid.direction(x, y);
      if (auto p = direction_to_nfov_pixel(cam, UnitVec3::trusted(d))) fn(x, y, *p);
    }
  }
}

ProjectedView project_nfov_to_erp(const NfovImage& img, int width, int height, int index = 0);

/// Number of views covering each ERP pixel.
std::vector<std::uint16_t> coverage_of_viewset(const ViewSet& views, int width, int height);

}  // namespace odis
