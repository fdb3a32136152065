#include "odis/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "odis/random.hpp"

namespace odis {

namespace {

std::uint64_t hash3(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t seed) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  for (std::int64_t v : {x, y, z}) {
    h ^= std::uint64_t(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h = (h ^ (h >> 33)) * 0xff51afd7ed558ccdULL;
  }
  return h ^ (h >> 29);
}

double lattice(std::int64_t x, std::int64_t y, std::int64_t z, std::uint64_t seed) {
  return double(hash3(x, y, z, seed) >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, double z, std::uint64_t seed) {
  const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
  const auto ix = std::int64_t(fx), iy = std::int64_t(fy), iz = std::int64_t(fz);
  const double tx = smooth(x - fx), ty = smooth(y - fy), tz = smooth(z - fz);
  double acc = 0.0;
  for (int dz = 0; dz <= 1; ++dz) {
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        const double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
        acc += w * lattice(ix + dx, iy + dy, iz + dz, seed);
      }
    }
  }
  return acc;
}

double fbm(const Vec3& p, std::uint64_t seed) {
  double sum = 0.0, amp = 0.5, freq = 1.0;
  for (int o = 0; o < 4; ++o) {
    sum += amp * value_noise(p.x * freq, p.y * freq, p.z * freq, seed + std::uint64_t(o));
    amp *= 0.5;
    freq *= 2.03;
  }
  return sum;
}

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {float(a[0] + (b[0] - a[0]) * t), float(a[1] + (b[1] - a[1]) * t), float(a[2] + (b[2] - a[2]) * t)};
}

Rgb scale(const Rgb& a, double s) { return {float(a[0] * s), float(a[1] * s), float(a[2] * s)}; }

Rgb sky(const SceneParams& s, const UnitVec3& d) {
  const double up = std::max(0.0, d.y());
  Rgb c = mix(s.sky_horizon, s.sky_zenith, std::pow(up, 0.6));
  const double clouds = fbm(Vec3(d) * 3.0, s.noise_seed);
  const double cover = std::clamp((clouds - (1.0 - s.cloudiness) * 0.6) * 2.5, 0.0, 1.0) * std::min(1.0, up * 6.0);
  c = mix(c, Rgb{0.95f, 0.95f, 0.97f}, cover * 0.8);
  const double sun_cos = dot(d, s.sun);
  const double glow = std::pow(std::max(0.0, sun_cos), 64.0) * 0.35;
  const double disc = std::clamp((sun_cos - 0.9990) / 0.0004, 0.0, 1.0);
  c = mix(c, Rgb{1.0f, 0.95f, 0.8f}, std::min(1.0, glow + disc));
  return c;
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Rgb color{};
};

void hit_box(const SceneBox& b, const Vec3& o, const Vec3& d, Hit& hit) {
  double tmin = 0.0, tmax = std::numeric_limits<double>::infinity();
  const double lo[3] = {b.x0, 0.0, b.z0};
  const double hi[3] = {b.x1, b.height, b.z1};
  const double oo[3] = {o.x, o.y, o.z};
  const double dd[3] = {d.x, d.y, d.z};
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dd[a]) < 1e-15) {
      if (oo[a] < lo[a] || oo[a] > hi[a]) return;
      continue;
    }
    double t0 = (lo[a] - oo[a]) / dd[a];
    double t1 = (hi[a] - oo[a]) / dd[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > tmin) {
      tmin = t0;
      axis = a;
    }
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return;
  }
  if (axis < 0 || tmin >= hit.t) return;
  const Vec3 p = o + d * tmin;
  // Window bands on the walls, flat roof.
  double shade = axis == 0 ? 0.8 : (axis == 2 ? 0.65 : 1.0);
  if (axis != 1) {
    const double band = std::fmod(p.y / b.stripe_period, 1.0);
    const double along = axis == 0 ? p.z : p.x;
    const double col = std::fmod(std::abs(along) / (0.7 * b.stripe_period), 1.0);
    if (band > 0.35 && band < 0.75 && col > 0.2 && col < 0.8) shade *= 0.45;
  }
  hit.t = tmin;
  hit.color = scale(b.color, shade);
}

}  // namespace

SceneParams random_scene(std::uint64_t seed) {
  Rng rng(seed * 7919 + 17);
  SceneParams s;
  auto colour = [&](double lo, double hi) {
    return Rgb{float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi))};
  };
  s.camera_height = rng.uniform(1.2, 2.5);
  s.sky_zenith = {float(rng.uniform(0.1, 0.35)), float(rng.uniform(0.25, 0.5)), float(rng.uniform(0.6, 0.95))};
  s.sky_horizon = colour(0.7, 0.95);
  s.ground_a = colour(0.35, 0.8);
  s.ground_b = colour(0.05, 0.4);
  s.tile_size = rng.uniform(0.6, 2.0);
  s.tile_rotation = rng.uniform(0.0, kPi / 2);
  s.sun = from_latlon({rng.uniform(0.15, 1.2), rng.uniform(-kPi, kPi)});
  s.cloudiness = rng.uniform(0.2, 0.9);
  s.noise_seed = seed + 101;
  const int boxes = rng.between(2, 7);
  for (int i = 0; i < boxes; ++i) {
    const double angle = rng.uniform(-kPi, kPi);
    const double dist = rng.uniform(6.0, 25.0);
    const double cx = dist * std::sin(angle), cz = dist * std::cos(angle);
    const double hw = rng.uniform(1.0, 4.0), hd = rng.uniform(1.0, 4.0);
    s.boxes.push_back({cx - hw, cx + hw, cz - hd, cz + hd, rng.uniform(3.0, 14.0), colour(0.3, 0.9),
                       rng.uniform(0.8, 2.0)});
  }
  return s;
}

Rgb shade_ray(const SceneParams& s, const UnitVec3& dir) {
  const Vec3 origin{0.0, s.camera_height, 0.0};
  const Vec3 d = dir;
  Hit hit;
  for (const SceneBox& b : s.boxes) hit_box(b, origin, d, hit);
  if (d.y < -1e-9) {
    const double t = s.camera_height / -d.y;
    if (t < hit.t) {
      const Vec3 p = origin + d * t;
      const double c = std::cos(s.tile_rotation), sn = std::sin(s.tile_rotation);
      const double gx = (c * p.x - sn * p.z) / s.tile_size;
      const double gz = (sn * p.x + c * p.z) / s.tile_size;
      const bool odd = ((std::int64_t(std::floor(gx)) + std::int64_t(std::floor(gz))) & 1) != 0;
      // Texture contrast fades with distance so the horizon does not alias.
      const double contrast = std::exp(-t / (12.0 * s.tile_size));
      const Rgb mean = mix(s.ground_a, s.ground_b, 0.5);
      Rgb g = mix(mean, odd ? s.ground_b : s.ground_a, contrast);
      const double grain = 0.85 + 0.3 * value_noise(p.x * 2.0, 0.0, p.z * 2.0, s.noise_seed + 9);
      g = scale(g, grain);
      hit.t = t;
      hit.color = g;
    }
  }
  if (!std::isfinite(hit.t)) return sky(s, dir);
  const double fog = 1.0 - std::exp(-hit.t / 60.0);
  return mix(hit.color, s.sky_horizon, fog);
}

Image render_scene(const SceneParams& s, int height, int supersample) {
  const int width = 2 * height;
  Image img(width, height, 3);
  const int n = std::max(1, supersample);
  const double inv = 1.0 / (n * n);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc[3] = {0, 0, 0};
      for (int sy = 0; sy < n; ++sy) {
        for (int sx = 0; sx < n; ++sx) {
          const UnitVec3 d = erp_pixel_to_direction(x + (sx + 0.5) / n, y + (sy + 0.5) / n, width, height);
          const Rgb c = shade_ray(s, d);
          for (int ch = 0; ch < 3; ++ch) acc[ch] += c[std::size_t(ch)];
        }
      }
      for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = std::clamp(float(acc[ch] * inv), 0.0f, 1.0f);
    }
  }
  return img;
}

}  // namespace odis
