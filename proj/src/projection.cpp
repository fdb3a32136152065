#include "odis/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace odis {

namespace {

constexpr double kDeg = kPi / 180.0;

}  // namespace

void NfovCamera::validate() const {
  if (!(fov_w_deg > 0.0 && fov_w_deg < 180.0 && fov_h_deg > 0.0 && fov_h_deg < 180.0)) {
    throw std::invalid_argument("camera FOV must lie in (0, 180) degrees");
  }
  if (width < 1 || height < 1) throw std::invalid_argument("camera resolution must be >= 1");
}

double NfovCamera::tan_half_w() const { return std::tan(0.5 * fov_w_deg * kDeg); }
double NfovCamera::tan_half_h() const { return std::tan(0.5 * fov_h_deg * kDeg); }
double NfovCamera::half_diagonal() const { return 0.5 * std::hypot(double(width), double(height)); }

NfovCamera make_camera(const UnitVec3& forward, double fov_deg, int size) {
  NfovCamera cam{camera_frame_for(forward), fov_deg, fov_deg, size, size};
  cam.validate();
  return cam;
}

ViewSet standard_view_set(double fov_deg, int size) {
  const auto dirs = rhombicuboctahedron_directions();
  return view_set_from_directions(dirs, fov_deg, size);
}

ViewSet view_set_from_directions(std::span<const UnitVec3> directions, double fov_deg, int size) {
  ViewSet set;
  set.cameras.reserve(directions.size());
  for (const UnitVec3& d : directions) set.cameras.push_back(make_camera(d, fov_deg, size));
  return set;
}

UnitVec3 nfov_pixel_to_direction(const NfovCamera& cam, double i, double j) {
  const double a = (2.0 * i / cam.width - 1.0) * cam.tan_half_w();
  const double b = (1.0 - 2.0 * j / cam.height) * cam.tan_half_h();
  const CameraFrame& f = cam.frame;
  if (a == 0.0 && b == 0.0) return f.forward;
  return UnitVec3::normalized(Vec3(f.forward) + Vec3(f.right) * a + Vec3(f.up) * b);
}

std::optional<PlanePoint> direction_to_nfov_pixel(const NfovCamera& cam, const UnitVec3& d) {
  const double fd = dot(d, cam.frame.forward);
  if (!(fd > 0.0)) return std::nullopt;
  const double a = dot(d, cam.frame.right) / fd;
  const double b = dot(d, cam.frame.up) / fd;
  const double tw = cam.tan_half_w();
  const double th = cam.tan_half_h();
  if (std::abs(a) > tw || std::abs(b) > th) return std::nullopt;
  PlanePoint p;
  p.i = (a / tw + 1.0) * 0.5 * cam.width;
  p.j = (1.0 - b / th) * 0.5 * cam.height;
  p.distance = std::hypot(p.i - 0.5 * cam.width, p.j - 0.5 * cam.height);
  return p;
}

ErpGrid::ErpGrid(int width, int height) : width_(width), height_(height) {
  if (height <= 0 || width != 2 * height) throw std::invalid_argument("ERP grid must be 2:1");
  lat_.resize(std::size_t(height));
  sin_lat_.resize(std::size_t(height));
  cos_lat_.resize(std::size_t(height));
  for (int y = 0; y < height; ++y) {
    const double lat = 0.5 * kPi - kPi * (y + 0.5) / height;
    lat_[std::size_t(y)] = lat;
    sin_lat_[std::size_t(y)] = std::sin(lat);
    cos_lat_[std::size_t(y)] = std::cos(lat);
  }
  sin_lon_.resize(std::size_t(width));
  cos_lon_.resize(std::size_t(width));
  for (int x = 0; x < width; ++x) {
    const double lon = 2.0 * kPi * (x + 0.5) / width - kPi;
    sin_lon_[std::size_t(x)] = std::sin(lon);
    cos_lon_[std::size_t(x)] = std::cos(lon);
  }
}

std::pair<int, int> ErpGrid::row_bounds(const NfovCamera& cam) const {
  // Latitude extremes of the footprint lie on its boundary unless a pole is inside.
  double lat_min = 0.5 * kPi;
  double lat_max = -0.5 * kPi;
  constexpr int kSteps = 128;
  for (int s = 0; s <= kSteps; ++s) {
    const double t = double(s) / kSteps;
    const double edge_points[4][2] = {{t * cam.width, 0.0},
                                      {t * cam.width, double(cam.height)},
                                      {0.0, t * cam.height},
                                      {double(cam.width), t * cam.height}};
    for (const auto& e : edge_points) {
      const double lat = to_latlon(nfov_pixel_to_direction(cam, e[0], e[1])).lat;
      lat_min = std::min(lat_min, lat);
      lat_max = std::max(lat_max, lat);
    }
  }
  if (direction_to_nfov_pixel(cam, UnitVec3::trusted({0.0, 1.0, 0.0}))) lat_max = 0.5 * kPi;
  if (direction_to_nfov_pixel(cam, UnitVec3::trusted({0.0, -1.0, 0.0}))) lat_min = -0.5 * kPi;
  const double margin = 1.0 * kDeg;
  const double v_top = (0.5 * kPi - (lat_max + margin)) / kPi * height_;
  const double v_bottom = (0.5 * kPi - (lat_min - margin)) / kPi * height_;
  const int y0 = std::clamp(int(std::floor(v_top)) - 1, 0, height_);
  const int y1 = std::clamp(int(std::ceil(v_bottom)) + 1, 0, height_);
  return {y0, y1};
}

NfovImage extract_nfov(const Image& erp, const NfovCamera& cam) {
  cam.validate();
  NfovImage out{cam, Image(cam.width, cam.height, erp.channels())};
  for (int j = 0; j < cam.height; ++j) {
    for (int i = 0; i < cam.width; ++i) {
      const UnitVec3 d = nfov_pixel_to_direction(cam, i + 0.5, j + 0.5);
      const ErpCoord uv = direction_to_erp_pixel(d, erp.width(), erp.height());
      sample_bilinear(erp, uv.u, uv.v, Wrap::kHorizontalWrap, out.pixels.pixel(i, j));
    }
  }
  return out;
}

Mask extract_nfov_mask(const Mask& erp_mask, const NfovCamera& cam) {
  cam.validate();
  Mask out(cam.width, cam.height);
  for (int j = 0; j < cam.height; ++j) {
    for (int i = 0; i < cam.width; ++i) {
      const UnitVec3 d = nfov_pixel_to_direction(cam, i + 0.5, j + 0.5);
      const ErpCoord uv = direction_to_erp_pixel(d, erp_mask.width(), erp_mask.height());
      out.set(i, j, sample_nearest(erp_mask, uv.u, uv.v, Wrap::kHorizontalWrap));
    }
  }
  return out;
}

ProjectedView::ProjectedView(int index, int erp_width, int erp_height, int row_begin, int row_end, int channels,
                             double half_diagonal)
    : index_(index),
      erp_width_(erp_width),
      erp_height_(erp_height),
      row_begin_(row_begin),
      row_end_(row_end),
      half_diagonal_(half_diagonal),
      colors_(erp_width, row_end - row_begin, channels),
      coverage_(erp_width, row_end - row_begin),
      distance_(std::size_t(erp_width) * std::size_t(row_end - row_begin), std::numeric_limits<double>::infinity()) {
  if (row_begin < 0 || row_end > erp_height || row_begin > row_end) {
    throw std::invalid_argument("projected view row band out of range");
  }
}

double ProjectedView::distance(int x, int y) const {
  if (y < row_begin_ || y >= row_end_) return std::numeric_limits<double>::infinity();
  return distance_[std::size_t(y - row_begin_) * std::size_t(erp_width_) + std::size_t(x)];
}

void ProjectedView::set(int x, int y, double distance, std::span<const float> color) {
  const int row = y - row_begin_;
  coverage_.set(x, row, true);
  distance_[std::size_t(row) * std::size_t(erp_width_) + std::size_t(x)] = distance;
  std::copy(color.begin(), color.end(), colors_.pixel(x, row).begin());
}

void ProjectedView::set_distance(int x, int y, double distance) {
  if (!covered(x, y)) throw std::invalid_argument("set_distance on an uncovered pixel");
  distance_[std::size_t(y - row_begin_) * std::size_t(erp_width_) + std::size_t(x)] = distance;
}

Mask ProjectedView::coverage() const {
  Mask out(erp_width_, erp_height_);
  for (int y = row_begin_; y < row_end_; ++y) {
    for (int x = 0; x < erp_width_; ++x) out.set(x, y, covered(x, y));
  }
  return out;
}

Image ProjectedView::colors() const {
  Image out(erp_width_, erp_height_, colors_.channels());
  for (int y = row_begin_; y < row_end_; ++y) {
    for (int x = 0; x < erp_width_; ++x) {
      if (covered(x, y)) std::ranges::copy(color(x, y), out.pixel(x, y).begin());
    }
  }
  return out;
}

ProjectedView project_nfov_to_erp(const NfovImage& img, int width, int height, int index) {
  const NfovCamera& cam = img.camera;
  cam.validate();
  if (img.pixels.width() != cam.width || img.pixels.height() != cam.height) {
    throw std::invalid_argument("NFoV pixel grid does not match its camera resolution");
  }
  const ErpGrid grid(width, height);
  const auto [y0, y1] = grid.row_bounds(cam);
  ProjectedView view(index, width, height, y0, y1, img.pixels.channels(), cam.half_diagonal());
  std::vector<float> color(std::size_t(img.pixels.channels()));
  for_each_footprint_pixel(grid, cam, [&](int x, int y, const PlanePoint& p) {
    sample_bilinear(img.pixels, p.i, p.j, Wrap::kClamp, color);
    view.set(x, y, p.distance, color);
  });
  return view;
}

std::vector<std::uint16_t> coverage_of_viewset(const ViewSet& views, int width, int height) {
  const ErpGrid grid(width, height);
  std::vector<std::uint16_t> counts(std::size_t(width) * std::size_t(height), 0);
  for (const NfovCamera& cam : views.cameras) {
    cam.validate();
    for_each_footprint_pixel(grid, cam, [&](int x, int y, const PlanePoint&) {
      ++counts[std::size_t(y) * std::size_t(width) + std::size_t(x)];
    });
  }
  return counts;
}

}  // namespace odis
