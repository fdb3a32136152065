#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "odis/codebook.hpp"
#include "odis/image.hpp"
#include "odis/random.hpp"

namespace odis {

/// Fraction of positions still masked after step t of T: cos(pi/2 * t/T).
/// Throws std::invalid_argument unless 0 <= t <= T and T >= 1.
double mask_ratio(int t, int total_steps);

/// ceil(ratio * initial_masked), with values within 1e-9 of an integer
/// snapped to it so exact products (t = 0, t = T) do not round up.
std::size_t scheduled_mask_count(int t, int total_steps, std::size_t initial_masked);

/// Training-time masking: replaces round(cos(pi/2 * r) * N) uniformly chosen
/// positions with MASK. Requires 0 <= r < 1.
CodeGrid training_mask(const CodeGrid& codes, double r, Rng& rng);

/// Read-only side information handed to a predictor. Any member may be
/// null; predictors use what they understand.
struct Conditioning {
  const Image* condition = nullptr;  // conditional image (zeros where unknown)
  const Mask* known = nullptr;       // 1 where the condition is known
  const Image* low_res = nullptr;    // stage-1 output resampled into this view
  int slot = 0;                      // which grid of a multi-grid problem (view index)
};

/// One probability vector over the K codes for each MASK position of the
/// input grid, in ascending row-major position order.
struct Prediction {
  std::vector<std::size_t> positions;
  std::vector<double> probs;  // positions.size() * K

  std::span<const double> at(std::size_t i, int k) const {
    return {probs.data() + i * std::size_t(k), std::size_t(k)};
  }
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const CodeGrid& codes, const Conditioning& cond) const = 0;
};

/// Point masses on a known ground truth, one grid per slot.
class OraclePredictor : public Predictor {
 public:
  explicit OraclePredictor(std::vector<CodeGrid> truths);
  Prediction predict(const CodeGrid& codes, const Conditioning& cond) const override;

 private:
  std::vector<CodeGrid> truths_;
};

/// Position-independent code frequencies (add-one smoothed).
class MarginalPredictor : public Predictor {
 public:
  MarginalPredictor(std::span<const CodeGrid> corpus, int k);
  Prediction predict(const CodeGrid& codes, const Conditioning& cond) const override;
  std::span<const double> distribution() const { return dist_; }

 private:
  std::vector<double> dist_;
};

/// Per-position code frequencies over a corpus of equally shaped grids,
/// smoothed towards the global marginal.
class ContextCopyPredictor : public Predictor {
 public:
  ContextCopyPredictor(std::span<const CodeGrid> corpus, int k);
  Prediction predict(const CodeGrid& codes, const Conditioning& cond) const override;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int k_ = 0;
  std::vector<double> per_position_;  // rows * cols * K
};

struct SampleConfig {
  int steps = 16;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

struct SampleTrace {
  CodeGrid codes;
  /// Masked count after each step t = 1..T.
  std::vector<std::size_t> masked_after_step;
};

/// Iterative masked-code sampling. At each step the predictor is queried at
/// the MASK positions, one code is drawn per position, and the least
/// confident draws (log-probability plus annealed Gumbel noise) are masked
/// again so that exactly scheduled_mask_count(t, T, M0) remain. Fixed input
/// positions are never changed. Throws DataError when the predictor breaks
/// its contract.
SampleTrace sample_with_trace(const Predictor& predictor, const CodeGrid& initial, const Conditioning& cond,
                              const SampleConfig& cfg);

CodeGrid sample(const Predictor& predictor, const CodeGrid& initial, const Conditioning& cond,
                const SampleConfig& cfg);

}  // namespace odis
