#include "odis/geometry.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <tuple>

namespace odis {

UnitVec3 UnitVec3::normalized(const Vec3& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  }
  return UnitVec3(v * (1.0 / n));
}

double angle_between(const UnitVec3& a, const UnitVec3& b) {
  // atan2 form stays accurate for nearly parallel vectors where acos does not.
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

double wrap_longitude(double lon) {
  double w = std::fmod(lon + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  w -= kPi;
  return w >= kPi ? -kPi : w;
}

LatLon to_latlon(const UnitVec3& d) {
  const double horiz = std::hypot(d.x(), d.z());
  LatLon ll;
  ll.lat = std::atan2(d.y(), horiz);
  ll.lon = horiz < 1e-300 ? 0.0 : std::atan2(d.x(), d.z());
  if (ll.lon >= kPi) ll.lon = -kPi;
  return ll;
}

UnitVec3 from_latlon(const LatLon& ll) {
  const double c = std::cos(ll.lat);
  return UnitVec3::trusted({c * std::sin(ll.lon), std::sin(ll.lat), c * std::cos(ll.lon)});
}

namespace {

void require_erp_shape(int width, int height) {
  if (height <= 0 || width != 2 * height) {
    throw std::invalid_argument("ERP image must have width == 2 * height (got " +
                                std::to_string(width) + "x" + std::to_string(height) + ")");
  }
}

}  // namespace

UnitVec3 erp_pixel_to_direction(double u, double v, int width, int height) {
  require_erp_shape(width, height);
  const double lon = 2.0 * kPi * u / width - kPi;
  const double lat = 0.5 * kPi - kPi * v / height;
  return from_latlon({lat, lon});
}

ErpCoord direction_to_erp_pixel(const UnitVec3& d, int width, int height) {
  require_erp_shape(width, height);
  const LatLon ll = to_latlon(d);
  double u = (ll.lon + kPi) / (2.0 * kPi) * width;
  if (u >= width) u -= width;
  if (u < 0.0) u += width;
  const double v = (0.5 * kPi - ll.lat) / kPi * height;
  return {u, v};
}

CameraFrame camera_frame_for(const UnitVec3& forward) {
  const Vec3 north{0.0, 1.0, 0.0};
  const double f_dot_n = dot(forward, north);
  Vec3 reference = north;
  if (std::abs(f_dot_n) >= 1.0 - 1e-6) {
    reference = f_dot_n > 0.0 ? Vec3{0.0, 0.0, -1.0} : Vec3{0.0, 0.0, 1.0};
  }
  const Vec3 f = forward;
  const UnitVec3 up = UnitVec3::normalized(reference - f * dot(reference, f));
  const UnitVec3 right = UnitVec3::normalized(cross(up, f));
  return {forward, right, up};
}

CameraFrame camera_frame_for_yaw_pitch(double yaw_deg, double pitch_deg) {
  const double deg = kPi / 180.0;
  return camera_frame_for(from_latlon({pitch_deg * deg, yaw_deg * deg}));
}

std::vector<UnitVec3> rhombicuboctahedron_directions() {
  using Triple = std::array<int, 3>;
  std::array<std::vector<Triple>, 3> groups;
  for (int x = -1; x <= 1; ++x) {
    for (int y = -1; y <= 1; ++y) {
      for (int z = -1; z <= 1; ++z) {
        const int nonzero = (x != 0) + (y != 0) + (z != 0);
        if (nonzero > 0) groups[nonzero - 1].push_back({x, y, z});
      }
    }
  }
  std::vector<UnitVec3> out;
  out.reserve(kStandardViewCount);
  for (auto& g : groups) {
    std::sort(g.begin(), g.end());
    for (const Triple& t : g) out.push_back(UnitVec3::normalized({double(t[0]), double(t[1]), double(t[2])}));
  }
  return out;
}

}  // namespace odis
