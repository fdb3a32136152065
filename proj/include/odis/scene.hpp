#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "odis/geometry.hpp"
#include "odis/image.hpp"

namespace odis {

using Rgb = std::array<float, 3>;

/// Axis-aligned box standing on the ground plane.
struct SceneBox {
  double x0, x1, z0, z1;  // footprint
  double height;
  Rgb color;
  double stripe_period;  // vertical period of the window bands
};

/// Procedural outdoor scene seen from a camera above a tiled ground plane:
/// sky gradient with a sun and soft clouds, a checker-tiled ground with fog
/// towards the horizon, and a few box buildings. Rendering traces one ray
/// per sub-sample, so the panorama is seam-free and geometrically exact.
struct SceneParams {
  double camera_height = 1.6;
  Rgb sky_zenith{0.25f, 0.45f, 0.85f};
  Rgb sky_horizon{0.75f, 0.85f, 0.95f};
  Rgb ground_a{0.55f, 0.5f, 0.42f};
  Rgb ground_b{0.3f, 0.28f, 0.25f};
  double tile_size = 1.0;
  double tile_rotation = 0.0;  // radians
  UnitVec3 sun = UnitVec3::trusted({0.0, 0.5, 0.8660254037844386});
  double cloudiness = 0.5;
  std::uint64_t noise_seed = 1;
  std::vector<SceneBox> boxes;
};

SceneParams random_scene(std::uint64_t seed);

Rgb shade_ray(const SceneParams& scene, const UnitVec3& dir);

/// ERP rendering at height x 2*height with `supersample`^2 rays per pixel.
Image render_scene(const SceneParams& scene, int height, int supersample = 2);

}  // namespace odis
