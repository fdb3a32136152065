#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "odis/image.hpp"

namespace odis {

/// K quantization vectors over flattened RGB patches. An entry is laid out
/// row-major over the patch with interleaved channels, values in [0, 1].
class Codebook {
 public:
  Codebook() = default;
  Codebook(int patch_h, int patch_w, std::vector<float> entries);

  int size() const { return k_; }
  int patch_h() const { return patch_h_; }
  int patch_w() const { return patch_w_; }
  int dim() const { return patch_h_ * patch_w_ * 3; }
  /// The code that marks a masked position.
  std::int32_t mask_code() const { return k_; }

  std::span<const float> entry(int k) const {
    return {entries_.data() + std::size_t(k) * std::size_t(dim()), std::size_t(dim())};
  }
  std::span<const float> entries() const { return entries_; }

  /// Throws DataError unless K >= 2, entries are finite and pairwise distinct.
  void validate() const;

  bool operator==(const Codebook&) const = default;

 private:
  int k_ = 0;
  int patch_h_ = 0;
  int patch_w_ = 0;
  std::vector<float> entries_;
};

/// Binary format: "ODCB", then uint32 K, patch_h, patch_w, then K * dim
/// float32 values; all little-endian.
void save_codebook(const std::filesystem::path& path, const Codebook& cb);
Codebook load_codebook(const std::filesystem::path& path);

/// Row-major grid of code indices in [0, K) plus the MASK sentinel K.
class CodeGrid {
 public:
  CodeGrid() = default;
  CodeGrid(int rows, int cols, int k, std::int32_t fill);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int k() const { return k_; }
  std::int32_t mask_code() const { return k_; }
  std::size_t size() const { return codes_.size(); }

  std::int32_t& at(int r, int c) { return codes_[std::size_t(r) * std::size_t(cols_) + std::size_t(c)]; }
  std::int32_t at(int r, int c) const { return codes_[std::size_t(r) * std::size_t(cols_) + std::size_t(c)]; }
  std::int32_t& operator[](std::size_t i) { return codes_[i]; }
  std::int32_t operator[](std::size_t i) const { return codes_[i]; }

  bool is_masked(std::size_t i) const { return codes_[i] == k_; }
  std::size_t mask_count() const;

  std::span<const std::int32_t> codes() const { return codes_; }
  bool operator==(const CodeGrid&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int k_ = 0;
  std::vector<std::int32_t> codes_;
};

/// Text format: a header line "codegrid <rows> <cols> <K>" followed by one
/// line per row of space-separated indices, with MASK written as "M".
void write_codegrid(std::ostream& out, const CodeGrid& grid);
CodeGrid read_codegrid(std::istream& in);
void save_codegrid(const std::filesystem::path& path, const CodeGrid& grid);
CodeGrid load_codegrid(const std::filesystem::path& path);

/// Non-overlapping patches of one or more RGB images, flattened in codebook
/// entry layout.
struct PatchSet {
  int dim = 0;
  std::vector<float> values;  // count() * dim

  std::size_t count() const { return dim == 0 ? 0 : values.size() / std::size_t(dim); }
  std::span<const float> patch(std::size_t i) const {
    return {values.data() + i * std::size_t(dim), std::size_t(dim)};
  }
};

PatchSet extract_patches(std::span<const Image> images, int patch);

/// Index of the nearest entry by exact Euclidean distance for every patch;
/// ties go to the lowest index. When `sq_dist` is given it receives the
/// squared distances (double precision) to the chosen entries.
std::vector<std::int32_t> nearest_entries(const Codebook& cb, const PatchSet& patches,
                                          std::vector<double>* sq_dist = nullptr);

struct TrainOptions {
  int k = 1024;
  int patch = 16;
  std::uint64_t seed = 0;
  int max_iterations = 50;
  double shift_tolerance = 1e-6;
};

struct TrainResult {
  Codebook codebook;
  /// Mean squared error per sample after each assignment step; the last
  /// value is measured against the stored (float) entries.
  std::vector<double> mse_history;
  double final_mse = 0.0;
  int iterations = 0;
};

/// k-means over non-overlapping patches with k-means++ seeding. Throws
/// DataError when fewer than K distinct patches exist.
TrainResult train_codebook(std::span<const Image> images, const TrainOptions& options);
TrainResult train_codebook(const PatchSet& patches, int patch, const TrainOptions& options);

/// Throws DataError unless the image dimensions are divisible by the patch size.
CodeGrid encode(const Image& img, const Codebook& cb);

/// Throws DataError if the grid contains MASK or indices outside [0, K).
Image decode(const CodeGrid& codes, const Codebook& cb);

}  // namespace odis
