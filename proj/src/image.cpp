#include "odis/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "odis/error.hpp"

namespace odis {

Image::Image(int width, int height, int channels, float fill) : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels <= 0) {
    throw std::invalid_argument("invalid image shape");
  }
  data_.assign(std::size_t(width) * std::size_t(height) * std::size_t(channels), fill);
}

std::size_t Mask::count() const {
  return std::size_t(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

namespace {

int wrap_index(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

}  // namespace

void sample_bilinear(const Image& img, double x, double y, Wrap wrap, std::span<float> out) {
  const int w = img.width();
  const int h = img.height();
  const double xs = x - 0.5;
  const double ys = y - 0.5;
  const double xf = std::floor(xs);
  const double yf = std::floor(ys);
  const double fx = xs - xf;
  const double fy = ys - yf;
  const int x0i = int(xf);
  const int y0i = int(yf);
  int x0, x1;
  if (wrap == Wrap::kHorizontalWrap) {
    x0 = wrap_index(x0i, w);
    x1 = wrap_index(x0i + 1, w);
  } else {
    x0 = clamp_index(x0i, w);
    x1 = clamp_index(x0i + 1, w);
  }
  const int y0 = clamp_index(y0i, h);
  const int y1 = clamp_index(y0i + 1, h);
  for (int c = 0; c < img.channels(); ++c) {
    // Nested lerps keep constant neighbourhoods bit-exact.
    const double a = img.at(x0, y0, c);
    const double b = img.at(x1, y0, c);
    const double d = img.at(x0, y1, c);
    const double e = img.at(x1, y1, c);
    const double top = a + fx * (b - a);
    const double bottom = d + fx * (e - d);
    out[std::size_t(c)] = float(top + fy * (bottom - top));
  }
}

bool sample_nearest(const Mask& mask, double x, double y, Wrap wrap) {
  int xi = int(std::floor(x));
  int yi = clamp_index(int(std::floor(y)), mask.height());
  xi = wrap == Wrap::kHorizontalWrap ? wrap_index(xi, mask.width()) : clamp_index(xi, mask.width());
  return mask.get(xi, yi);
}

Image downsample_area(const Image& img, int factor) {
  if (factor < 1 || img.width() % factor != 0 || img.height() % factor != 0) {
    throw std::invalid_argument("downsample factor must divide the image dimensions");
  }
  if (factor == 1) return img;
  Image out(img.width() / factor, img.height() / factor, img.channels());
  const double inv = 1.0 / (double(factor) * double(factor));
  std::vector<double> acc(std::size_t(img.channels()));
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          const auto p = img.pixel(x * factor + dx, y * factor + dy);
          for (int c = 0; c < img.channels(); ++c) acc[std::size_t(c)] += p[std::size_t(c)];
        }
      }
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = float(acc[std::size_t(c)] * inv);
    }
  }
  return out;
}

Mask downsample_all(const Mask& mask, int factor) {
  if (factor < 1 || mask.width() % factor != 0 || mask.height() % factor != 0) {
    throw std::invalid_argument("downsample factor must divide the mask dimensions");
  }
  Mask out(mask.width() / factor, mask.height() / factor);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      bool all = true;
      for (int dy = 0; dy < factor && all; ++dy) {
        for (int dx = 0; dx < factor && all; ++dx) all = mask.get(x * factor + dx, y * factor + dy);
      }
      out.set(x, y, all);
    }
  }
  return out;
}

Image resize_bilinear(const Image& img, int width, int height) {
  Image out(width, height, img.channels());
  const double sx = double(img.width()) / width;
  const double sy = double(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      sample_bilinear(img, (x + 0.5) * sx, (y + 0.5) * sy, Wrap::kClamp, out.pixel(x, y));
    }
  }
  return out;
}

Image resize_to(const Image& img, int width, int height) {
  if (width == img.width() && height == img.height()) return img;
  if (width < img.width() && img.width() % width == 0 && img.height() % height == 0 &&
      img.width() / width == img.height() / height) {
    return downsample_area(img, img.width() / width);
  }
  return resize_bilinear(img, width, height);
}

Mask resize_mask(const Mask& mask, int width, int height) {
  if (width == mask.width() && height == mask.height()) return mask;
  if (width < mask.width() && mask.width() % width == 0 && mask.height() % height == 0 &&
      mask.width() / width == mask.height() / height) {
    return downsample_all(mask, mask.width() / width);
  }
  Mask out(width, height);
  const double sx = double(mask.width()) / width;
  const double sy = double(mask.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out.set(x, y, sample_nearest(mask, (x + 0.5) * sx, (y + 0.5) * sy, Wrap::kClamp));
  }
  return out;
}

Image mask_to_image(const Mask& mask, int channels) {
  Image out(mask.width(), mask.height(), channels);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask.get(x, y)) {
        for (int c = 0; c < channels; ++c) out.at(x, y, c) = 1.0f;
      }
    }
  }
  return out;
}

Mask image_to_mask(const Image& img) {
  Mask out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto p = img.pixel(x, y);
      const double mean = std::accumulate(p.begin(), p.end(), 0.0) / double(p.size());
      out.set(x, y, mean >= 0.5);
    }
  }
  return out;
}

Image apply_mask(const Image& img, const Mask& mask) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw DataError("image and mask dimensions differ");
  }
  Image out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!mask.get(x, y)) {
        for (float& v : out.pixel(x, y)) v = 0.0f;
      }
    }
  }
  return out;
}

namespace {

std::uint8_t to_byte(float v) {
  const double c = std::clamp(double(v), 0.0, 1.0);
  return std::uint8_t(std::lround(c * 255.0));
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw DataError("cannot read PNG '" + path.string() + "': " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DataError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  Image img(int(png.width), int(png.height), 3);
  auto out = img.data();
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = float(buf[i]) / 255.0f;
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels() != 3 && img.channels() != 1) {
    throw std::invalid_argument("PNG output needs 1 or 3 channels");
  }
  std::vector<std::uint8_t> buf(std::size_t(img.width()) * std::size_t(img.height()) * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const std::size_t o = (std::size_t(y) * std::size_t(img.width()) + std::size_t(x)) * 3;
      for (int c = 0; c < 3; ++c) buf[o + std::size_t(c)] = to_byte(img.at(x, y, img.channels() == 3 ? c : 0));
    }
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = png_uint_32(img.width());
  png.height = png_uint_32(img.height());
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buf.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw DataError("cannot write PNG '" + path.string() + "': " + msg);
  }
}

Image quantize_8bit(const Image& img) {
  Image out = img;
  for (float& v : out.data()) v = float(to_byte(v)) / 255.0f;
  return out;
}

}  // namespace odis
