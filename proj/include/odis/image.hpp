#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace odis {

/// Interleaved float raster (row-major, channel-last). Samples are
/// normalized to [0, 1] by convention; nothing here enforces it.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels = 3, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  float& at(int x, int y, int c) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data_[index(x, y, c)]; }

  std::span<float> pixel(int x, int y) { return {data_.data() + index(x, y, 0), std::size_t(channels_)}; }
  std::span<const float> pixel(int x, int y) const {
    return {data_.data() + index(x, y, 0), std::size_t(channels_)};
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_) + std::size_t(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Binary raster; 1 marks known / covered pixels.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false)
      : width_(width), height_(height), data_(std::size_t(width) * std::size_t(height), fill ? 1 : 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  bool get(int x, int y) const { return data_[std::size_t(y) * std::size_t(width_) + std::size_t(x)] != 0; }
  void set(int x, int y, bool v) { data_[std::size_t(y) * std::size_t(width_) + std::size_t(x)] = v ? 1 : 0; }

  std::size_t count() const;
  double fraction() const { return data_.empty() ? 0.0 : double(count()) / double(data_.size()); }

  std::span<const std::uint8_t> data() const { return data_; }
  bool operator==(const Mask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

enum class Wrap { kClamp, kHorizontalWrap };

/// Bilinear sample at continuous coordinates (pixel centers at integer + 0.5)
/// into `out` (size == channels). kHorizontalWrap wraps x modulo width and
/// clamps y; kClamp clamps both axes.
void sample_bilinear(const Image& img, double x, double y, Wrap wrap, std::span<float> out);

/// Nearest-neighbour mask lookup with the same coordinate conventions.
bool sample_nearest(const Mask& mask, double x, double y, Wrap wrap);

/// Box-filter downsample by an integer factor in both axes.
Image downsample_area(const Image& img, int factor);

/// Mask downsample where an output pixel is known only if every source pixel is.
Mask downsample_all(const Mask& mask, int factor);

/// Bilinear resize to an arbitrary size (edge clamp).
Image resize_bilinear(const Image& img, int width, int height);

/// Area-average resize when the factor is an integer, bilinear otherwise.
Image resize_to(const Image& img, int width, int height);

/// Mask resize: nearest neighbour upsampling, all-known pooling downsampling.
Mask resize_mask(const Mask& mask, int width, int height);

Image mask_to_image(const Mask& mask, int channels = 3);

/// Threshold at 0.5 on the channel mean.
Mask image_to_mask(const Image& img);

/// Zero all pixels where the mask is not set.
Image apply_mask(const Image& img, const Mask& mask);

/// 8-bit RGB PNG I/O. Reading accepts gray, alpha and 16-bit inputs and
/// converts to RGB; writing quantizes with round(clamp(x, 0, 1) * 255).
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

/// Quantize to 8 bits and back, as a PNG round trip would.
Image quantize_8bit(const Image& img);

}  // namespace odis
