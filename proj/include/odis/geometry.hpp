#pragma once

// Sphere coordinate conventions shared by every module.
//
// World axes: +z points at the ERP image center (lon = 0, lat = 0), +y is the
// north pole and +x is lon = +90 deg. ERP pixel centers sit at integer + 0.5.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace odis {

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Unit-length direction. Construction always normalizes, so the invariant
/// |v| = 1 holds up to rounding.
class UnitVec3 {
 public:
  constexpr UnitVec3() : v_{0.0, 0.0, 1.0} {}

  /// Throws std::invalid_argument for a zero or non-finite vector.
  static UnitVec3 normalized(const Vec3& v);

  /// Wraps a vector already known to be unit length (no renormalization).
  static constexpr UnitVec3 trusted(const Vec3& v) { return UnitVec3(v); }

  constexpr double x() const { return v_.x; }
  constexpr double y() const { return v_.y; }
  constexpr double z() const { return v_.z; }
  constexpr const Vec3& vec() const { return v_; }
  constexpr operator const Vec3&() const { return v_; }  // NOLINT(google-explicit-constructor)
  constexpr UnitVec3 operator-() const { return UnitVec3(-v_); }
  constexpr bool operator==(const UnitVec3&) const = default;

 private:
  constexpr explicit UnitVec3(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

/// Angle between two unit directions in radians, accurate near 0 and pi.
double angle_between(const UnitVec3& a, const UnitVec3& b);

struct LatLon {
  double lat = 0.0;  // [-pi/2, pi/2]
  double lon = 0.0;  // [-pi, pi)
};

LatLon to_latlon(const UnitVec3& d);
UnitVec3 from_latlon(const LatLon& ll);

/// Wraps an angle into [-pi, pi).
double wrap_longitude(double lon);

struct ErpCoord {
  double u = 0.0;  // [0, W)
  double v = 0.0;  // [0, H]
};

/// Continuous ERP pixel coordinates to a direction. Requires width == 2 * height.
UnitVec3 erp_pixel_to_direction(double u, double v, int width, int height);

/// Inverse of erp_pixel_to_direction. u is wrapped into [0, W); at the poles
/// longitude is taken as 0, so u = W / 2.
ErpCoord direction_to_erp_pixel(const UnitVec3& d, int width, int height);

/// Right-handed orthonormal view frame: cross(right, up) == forward.
struct CameraFrame {
  UnitVec3 forward;
  UnitVec3 right = UnitVec3::trusted({1.0, 0.0, 0.0});
  UnitVec3 up = UnitVec3::trusted({0.0, 1.0, 0.0});
};

/// North-up frame for a view direction. Views within 1e-6 of a pole use -z
/// (north-facing) or +z (south-facing) as the up reference instead.
CameraFrame camera_frame_for(const UnitVec3& forward);

/// Frame looking at (yaw, pitch) in degrees; yaw is longitude, pitch latitude.
CameraFrame camera_frame_for_yaw_pitch(double yaw_deg, double pitch_deg);

/// The 26 face normals of a rhombicuboctahedron. Order: the 6 axis
/// directions, then the 12 edge directions (two non-zero components), then
/// the 8 corner directions, each group sorted lexicographically by the
/// unnormalized integer (x, y, z) triple.
std::vector<UnitVec3> rhombicuboctahedron_directions();

inline constexpr int kStandardViewCount = 26;

}  // namespace odis
