#include "odis/codebook.hpp"

#include <cblas.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "odis/error.hpp"
#include "odis/random.hpp"

namespace odis {

static_assert(std::endian::native == std::endian::little, "codebook I/O assumes a little-endian host");

Codebook::Codebook(int patch_h, int patch_w, std::vector<float> entries)
    : patch_h_(patch_h), patch_w_(patch_w), entries_(std::move(entries)) {
  if (patch_h <= 0 || patch_w <= 0) throw std::invalid_argument("patch size must be positive");
  if (entries_.size() % std::size_t(dim()) != 0) throw std::invalid_argument("entry buffer is not a multiple of dim");
  k_ = int(entries_.size() / std::size_t(dim()));
}

void Codebook::validate() const {
  if (k_ < 2) throw DataError("codebook needs at least 2 entries");
  for (float v : entries_) {
    if (!std::isfinite(v)) throw DataError("codebook entry is not finite");
  }
  std::vector<int> order(static_cast<std::size_t>(k_));
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bytes = std::size_t(dim()) * sizeof(float);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return std::memcmp(entry(a).data(), entry(b).data(), bytes) < 0; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (std::memcmp(entry(order[i - 1]).data(), entry(order[i]).data(), bytes) == 0) {
      throw DataError("codebook entries " + std::to_string(order[i - 1]) + " and " + std::to_string(order[i]) +
                      " are identical");
    }
  }
}

namespace {

constexpr char kMagic[4] = {'O', 'D', 'C', 'B'};

void write_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(kMagic, 4);
  write_u32(out, std::uint32_t(cb.size()));
  write_u32(out, std::uint32_t(cb.patch_h()));
  write_u32(out, std::uint32_t(cb.patch_w()));
  const auto e = cb.entries();
  out.write(reinterpret_cast<const char*>(e.data()), std::streamsize(e.size() * sizeof(float)));
  if (!out) throw DataError("failed writing codebook '" + path.string() + "'");
}

Codebook load_codebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open codebook '" + path.string() + "'");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw DataError("'" + path.string() + "' is not a codebook file");
  const std::uint32_t k = read_u32(in);
  const std::uint32_t ph = read_u32(in);
  const std::uint32_t pw = read_u32(in);
  if (!in || k == 0 || ph == 0 || pw == 0 || ph > 4096 || pw > 4096 || k > (1u << 24)) {
    throw DataError("corrupt codebook header in '" + path.string() + "'");
  }
  std::vector<float> entries(std::size_t(k) * ph * pw * 3);
  in.read(reinterpret_cast<char*>(entries.data()), std::streamsize(entries.size() * sizeof(float)));
  if (!in) throw DataError("truncated codebook '" + path.string() + "'");
  if (in.peek() != std::ifstream::traits_type::eof()) throw DataError("trailing bytes in codebook '" + path.string() + "'");
  Codebook cb(int(ph), int(pw), std::move(entries));
  cb.validate();
  return cb;
}

CodeGrid::CodeGrid(int rows, int cols, int k, std::int32_t fill)
    : rows_(rows), cols_(cols), k_(k), codes_(std::size_t(rows) * std::size_t(cols), fill) {
  if (rows < 0 || cols < 0 || k < 1) throw std::invalid_argument("invalid code grid shape");
}

std::size_t CodeGrid::mask_count() const {
  return std::size_t(std::count(codes_.begin(), codes_.end(), k_));
}

void write_codegrid(std::ostream& out, const CodeGrid& grid) {
  out << "codegrid " << grid.rows() << ' ' << grid.cols() << ' ' << grid.k() << '\n';
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (c) out << ' ';
      if (grid.at(r, c) == grid.mask_code()) {
        out << 'M';
      } else {
        out << grid.at(r, c);
      }
    }
    out << '\n';
  }
}

CodeGrid read_codegrid(std::istream& in) {
  std::string tag;
  int rows = 0, cols = 0, k = 0;
  if (!(in >> tag >> rows >> cols >> k) || tag != "codegrid" || rows <= 0 || cols <= 0 || k < 1) {
    throw DataError("code grid must start with 'codegrid <rows> <cols> <K>'");
  }
  CodeGrid grid(rows, cols, k, k);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::string tok;
    if (!(in >> tok)) throw DataError("code grid has fewer than rows*cols entries");
    if (tok == "M") continue;
    std::size_t used = 0;
    long v = -1;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v < 0 || v >= k) throw DataError("invalid code '" + tok + "'");
    grid[i] = std::int32_t(v);
  }
  std::string extra;
  if (in >> extra) throw DataError("code grid has more than rows*cols entries");
  return grid;
}

void save_codegrid(const std::filesystem::path& path, const CodeGrid& grid) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  write_codegrid(out, grid);
}

CodeGrid load_codegrid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open code grid '" + path.string() + "'");
  return read_codegrid(in);
}

PatchSet extract_patches(std::span<const Image> images, int patch) {
  if (patch <= 0) throw std::invalid_argument("patch size must be positive");
  PatchSet set;
  set.dim = patch * patch * 3;
  for (const Image& img : images) {
    if (img.channels() != 3) throw DataError("patch extraction expects RGB images");
    if (img.width() % patch != 0 || img.height() % patch != 0) {
      throw DataError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                      " is not divisible by patch size " + std::to_string(patch));
    }
    for (int py = 0; py < img.height() / patch; ++py) {
      for (int px = 0; px < img.width() / patch; ++px) {
        for (int y = 0; y < patch; ++y) {
          const auto row = img.data().subspan(
              (std::size_t(py * patch + y) * std::size_t(img.width()) + std::size_t(px * patch)) * 3,
              std::size_t(patch) * 3);
          set.values.insert(set.values.end(), row.begin(), row.end());
        }
      }
    }
  }
  return set;
}

namespace {

double exact_sq_dist(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return s;
}

float float_sq_dist(const float* a, const float* b, int n) {
  float acc[8] = {};
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int j = 0; j < 8; ++j) {
      const float d = a[i + j] - b[i + j];
      acc[j] += d * d;
    }
  }
  float s = 0.0f;
  for (; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  for (float v : acc) s += v;
  return s;
}

// Values are recentred by 0.5 before the float screening so norms stay small.
constexpr float kCentre = 0.5f;
constexpr std::size_t kBlock = 256;

}  // namespace

std::vector<std::int32_t> nearest_entries(const Codebook& cb, const PatchSet& patches, std::vector<double>* sq_dist) {
  const int dim = cb.dim();
  const int k = cb.size();
  if (patches.dim != dim) throw DataError("patch dimension does not match the codebook");
  const std::size_t n = patches.count();
  std::vector<std::int32_t> best(n, 0);
  if (sq_dist) sq_dist->assign(n, 0.0);
  if (n == 0) return best;

  std::vector<float> centred(cb.entries().begin(), cb.entries().end());
  for (float& v : centred) v -= kCentre;
  std::vector<float> entry_norm(static_cast<std::size_t>(k));
  float max_norm = 0.0f;
  for (int e = 0; e < k; ++e) {
    const float* c = centred.data() + std::size_t(e) * std::size_t(dim);
    float s = 0.0f;
    for (int i = 0; i < dim; ++i) s += c[i] * c[i];
    entry_norm[std::size_t(e)] = s;
    max_norm = std::max(max_norm, s);
  }
  // Generous bound on the float error of the screening distances.
  const double rel_tol = 8.0 * dim * double(std::numeric_limits<float>::epsilon());

  std::vector<float> block(kBlock * std::size_t(dim));
  std::vector<float> gram(kBlock * std::size_t(k));
  std::vector<float> approx(static_cast<std::size_t>(k));
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t rows = std::min(kBlock, n - start);
    const float* src = patches.values.data() + start * std::size_t(dim);
    for (std::size_t i = 0; i < rows * std::size_t(dim); ++i) block[i] = src[i] - kCentre;
    cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasTrans, int(rows), k, dim, 1.0f, block.data(), dim,
                centred.data(), dim, 0.0f, gram.data(), k);
    for (std::size_t r = 0; r < rows; ++r) {
      const float* x = block.data() + r * std::size_t(dim);
      float xnorm = 0.0f;
      for (int i = 0; i < dim; ++i) xnorm += x[i] * x[i];
      const float* g = gram.data() + r * std::size_t(k);
      float lowest = std::numeric_limits<float>::infinity();
      for (int e = 0; e < k; ++e) {
        approx[std::size_t(e)] = xnorm - 2.0f * g[e] + entry_norm[std::size_t(e)];
        lowest = std::min(lowest, approx[std::size_t(e)]);
      }
      const double slack = rel_tol * (double(xnorm) + double(max_norm)) + 1e-12;
      const auto patch = patches.patch(start + r);
      double best_d = std::numeric_limits<double>::infinity();
      std::int32_t best_e = 0;
      for (int e = 0; e < k; ++e) {
        if (double(approx[std::size_t(e)]) > double(lowest) + slack) continue;
        const double d = exact_sq_dist(patch, cb.entry(e));
        if (d < best_d) {
          best_d = d;
          best_e = e;
        }
      }
      best[start + r] = best_e;
      if (sq_dist) (*sq_dist)[start + r] = best_d;
    }
  }
  return best;
}

namespace {

std::size_t count_distinct(const PatchSet& patches, std::size_t stop_at) {
  const std::size_t n = patches.count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bytes = std::size_t(patches.dim) * sizeof(float);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::memcmp(patches.patch(a).data(), patches.patch(b).data(), bytes) < 0;
  });
  std::size_t distinct = n ? 1 : 0;
  for (std::size_t i = 1; i < n && distinct < stop_at; ++i) {
    if (std::memcmp(patches.patch(order[i - 1]).data(), patches.patch(order[i]).data(), bytes) != 0) ++distinct;
  }
  return distinct;
}

std::vector<float> kmeans_plus_plus(const PatchSet& patches, int k, Rng& rng) {
  const std::size_t n = patches.count();
  const int dim = patches.dim;
  std::vector<float> centres;
  centres.reserve(std::size_t(k) * std::size_t(dim));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::size_t(rng.below(n));
  for (int c = 0; c < k; ++c) {
    const auto chosen = patches.patch(pick);
    centres.insert(centres.end(), chosen.begin(), chosen.end());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = float_sq_dist(patches.patch(i).data(), chosen.data(), dim);
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }
    if (c + 1 == k) break;
    if (!(total > 0.0)) throw DataError("k-means++ ran out of distinct patches");
    double target = rng.uniform() * total;
    pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target < 0.0) break;
    }
  }
  return centres;
}

}  // namespace

TrainResult train_codebook(std::span<const Image> images, const TrainOptions& options) {
  return train_codebook(extract_patches(images, options.patch), options.patch, options);
}

TrainResult train_codebook(const PatchSet& patches, int patch, const TrainOptions& options) {
  if (options.k < 2) throw std::invalid_argument("codebook needs K >= 2");
  if (patches.dim != patch * patch * 3) throw std::invalid_argument("patch set does not match the patch size");
  const std::size_t n = patches.count();
  const std::size_t distinct = count_distinct(patches, std::size_t(options.k));
  if (distinct < std::size_t(options.k)) {
    throw DataError("only " + std::to_string(distinct) + " distinct patches available for K = " +
                    std::to_string(options.k));
  }
  const int dim = patches.dim;
  const int k = options.k;
  Rng rng(options.seed);

  TrainResult result;
  Codebook cb(patch, patch, kmeans_plus_plus(patches, k, rng));
  std::vector<double> dist;
  std::vector<double> sums(std::size_t(k) * std::size_t(dim));
  std::vector<std::size_t> counts(static_cast<std::size_t>(k));
  const double denom = double(n) * double(dim);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const auto assign = nearest_entries(cb, patches, &dist);
    result.mse_history.push_back(std::accumulate(dist.begin(), dist.end(), 0.0) / denom);
    ++result.iterations;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = patches.patch(i);
      double* s = sums.data() + std::size_t(assign[i]) * std::size_t(dim);
      for (int d = 0; d < dim; ++d) s[d] += p[std::size_t(d)];
      ++counts[std::size_t(assign[i])];
    }
    // Empty clusters take over the points currently worst served.
    std::vector<std::size_t> by_error;
    std::size_t next_donor = 0;
    for (int e = 0; e < k; ++e) {
      if (counts[std::size_t(e)] != 0) continue;
      if (by_error.empty()) {
        by_error.resize(n);
        std::iota(by_error.begin(), by_error.end(), 0);
        std::stable_sort(by_error.begin(), by_error.end(),
                         [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
      }
      const std::size_t donor = by_error[next_donor++ % n];
      const auto p = patches.patch(donor);
      double* s = sums.data() + std::size_t(e) * std::size_t(dim);
      for (int d = 0; d < dim; ++d) s[d] = p[std::size_t(d)];
      counts[std::size_t(e)] = 1;
      dist[donor] = 0.0;
    }

    std::vector<float> next(std::size_t(k) * std::size_t(dim));
    double max_shift = 0.0;
    for (int e = 0; e < k; ++e) {
      const double inv = 1.0 / double(counts[std::size_t(e)]);
      const auto old = cb.entry(e);
      double shift = 0.0;
      for (int d = 0; d < dim; ++d) {
        const std::size_t o = std::size_t(e) * std::size_t(dim) + std::size_t(d);
        next[o] = float(sums[o] * inv);
        const double diff = double(next[o]) - double(old[std::size_t(d)]);
        shift += diff * diff;
      }
      max_shift = std::max(max_shift, std::sqrt(shift));
    }
    cb = Codebook(patch, patch, std::move(next));
    if (max_shift < options.shift_tolerance) break;
  }

  nearest_entries(cb, patches, &dist);
  result.final_mse = std::accumulate(dist.begin(), dist.end(), 0.0) / denom;
  result.mse_history.push_back(result.final_mse);
  cb.validate();
  result.codebook = std::move(cb);
  return result;
}

CodeGrid encode(const Image& img, const Codebook& cb) {
  if (img.channels() != 3) throw DataError("encode expects an RGB image");
  if (img.width() % cb.patch_w() != 0 || img.height() % cb.patch_h() != 0 || cb.patch_w() != cb.patch_h()) {
    throw DataError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " is not divisible by the codebook patch size " + std::to_string(cb.patch_w()));
  }
  const Image* one = &img;
  const PatchSet patches = extract_patches(std::span<const Image>(one, 1), cb.patch_w());
  const auto idx = nearest_entries(cb, patches);
  CodeGrid grid(img.height() / cb.patch_h(), img.width() / cb.patch_w(), cb.size(), 0);
  for (std::size_t i = 0; i < idx.size(); ++i) grid[i] = idx[i];
  return grid;
}

Image decode(const CodeGrid& codes, const Codebook& cb) {
  if (codes.k() != cb.size()) throw DataError("code grid K does not match the codebook");
  const int ph = cb.patch_h();
  const int pw = cb.patch_w();
  Image out(codes.cols() * pw, codes.rows() * ph, 3);
  for (int r = 0; r < codes.rows(); ++r) {
    for (int c = 0; c < codes.cols(); ++c) {
      const std::int32_t code = codes.at(r, c);
      if (code == codes.mask_code()) throw DataError("cannot decode a grid that still contains MASK");
      if (code < 0 || code >= cb.size()) throw DataError("code index out of range");
      const auto e = cb.entry(code);
      for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
          for (int ch = 0; ch < 3; ++ch) {
            out.at(c * pw + x, r * ph + y, ch) = std::clamp(e[std::size_t((y * pw + x) * 3 + ch)], 0.0f, 1.0f);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace odis
