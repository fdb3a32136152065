#include "odis/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "odis/error.hpp"
#include "odis/geometry.hpp"

namespace odis {

double mask_ratio(int t, int total_steps) {
  if (total_steps < 1) throw std::invalid_argument("mask schedule needs T >= 1");
  if (t < 0 || t > total_steps) throw std::invalid_argument("mask schedule step out of range");
  if (t == total_steps) return 0.0;
  return std::cos(0.5 * kPi * double(t) / double(total_steps));
}

std::size_t scheduled_mask_count(int t, int total_steps, std::size_t initial_masked) {
  const double value = mask_ratio(t, total_steps) * double(initial_masked);
  const double nearest = std::round(value);
  if (std::abs(value - nearest) < 1e-9) return std::size_t(nearest);
  return std::size_t(std::ceil(value));
}

CodeGrid training_mask(const CodeGrid& codes, double r, Rng& rng) {
  if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("training mask ratio parameter must lie in [0, 1)");
  const std::size_t n = codes.size();
  const auto masked = std::size_t(std::llround(std::cos(0.5 * kPi * r) * double(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: the first `masked` slots become a uniform subset.
  for (std::size_t i = 0; i < masked; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  CodeGrid out = codes;
  for (std::size_t i = 0; i < masked; ++i) out[order[i]] = out.mask_code();
  return out;
}

namespace {

std::vector<std::size_t> masked_positions(const CodeGrid& codes) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes.is_masked(i)) pos.push_back(i);
  }
  return pos;
}

Prediction broadcast(const CodeGrid& codes, std::span<const double> dist) {
  Prediction p;
  p.positions = masked_positions(codes);
  p.probs.reserve(p.positions.size() * dist.size());
  for (std::size_t i = 0; i < p.positions.size(); ++i) p.probs.insert(p.probs.end(), dist.begin(), dist.end());
  return p;
}

std::vector<double> normalized_counts(std::span<const CodeGrid> corpus, int k) {
  std::vector<double> counts(std::size_t(k), 1.0);
  double total = double(k);
  for (const CodeGrid& g : corpus) {
    if (g.k() != k) throw DataError("corpus grid K does not match the predictor");
    for (std::int32_t c : g.codes()) {
      if (c >= 0 && c < k) {
        counts[std::size_t(c)] += 1.0;
        total += 1.0;
      }
    }
  }
  for (double& c : counts) c /= total;
  return counts;
}

}  // namespace

OraclePredictor::OraclePredictor(std::vector<CodeGrid> truths) : truths_(std::move(truths)) {
  if (truths_.empty()) throw std::invalid_argument("oracle predictor needs at least one ground-truth grid");
}

Prediction OraclePredictor::predict(const CodeGrid& codes, const Conditioning& cond) const {
  if (cond.slot < 0 || std::size_t(cond.slot) >= truths_.size()) throw DataError("oracle has no grid for this slot");
  const CodeGrid& truth = truths_[std::size_t(cond.slot)];
  if (truth.rows() != codes.rows() || truth.cols() != codes.cols() || truth.k() != codes.k()) {
    throw DataError("oracle ground truth does not match the grid shape");
  }
  Prediction p;
  p.positions = masked_positions(codes);
  p.probs.assign(p.positions.size() * std::size_t(codes.k()), 0.0);
  for (std::size_t i = 0; i < p.positions.size(); ++i) {
    const std::int32_t c = truth[p.positions[i]];
    if (c < 0 || c >= codes.k()) throw DataError("oracle ground truth contains MASK");
    p.probs[i * std::size_t(codes.k()) + std::size_t(c)] = 1.0;
  }
  return p;
}

MarginalPredictor::MarginalPredictor(std::span<const CodeGrid> corpus, int k) : dist_(normalized_counts(corpus, k)) {}

Prediction MarginalPredictor::predict(const CodeGrid& codes, const Conditioning&) const {
  if (std::size_t(codes.k()) != dist_.size()) throw DataError("grid K does not match the marginal predictor");
  return broadcast(codes, dist_);
}

ContextCopyPredictor::ContextCopyPredictor(std::span<const CodeGrid> corpus, int k) : k_(k) {
  if (corpus.empty()) throw std::invalid_argument("context-copy predictor needs a corpus");
  rows_ = corpus.front().rows();
  cols_ = corpus.front().cols();
  const std::vector<double> marginal = normalized_counts(corpus, k);
  const std::size_t n = std::size_t(rows_) * std::size_t(cols_);
  std::vector<double> counts(n * std::size_t(k), 0.0);
  std::vector<double> totals(n, 0.0);
  for (const CodeGrid& g : corpus) {
    if (g.rows() != rows_ || g.cols() != cols_) throw DataError("context-copy corpus grids differ in shape");
    for (std::size_t p = 0; p < n; ++p) {
      if (g[p] >= 0 && g[p] < k) {
        counts[p * std::size_t(k) + std::size_t(g[p])] += 1.0;
        totals[p] += 1.0;
      }
    }
  }
  per_position_.resize(counts.size());
  for (std::size_t p = 0; p < n; ++p) {
    for (int c = 0; c < k; ++c) {
      const std::size_t o = p * std::size_t(k) + std::size_t(c);
      per_position_[o] = (counts[o] + marginal[std::size_t(c)]) / (totals[p] + 1.0);
    }
  }
}

Prediction ContextCopyPredictor::predict(const CodeGrid& codes, const Conditioning&) const {
  if (codes.rows() != rows_ || codes.cols() != cols_ || codes.k() != k_) {
    throw DataError("grid shape does not match the context-copy corpus");
  }
  Prediction p;
  p.positions = masked_positions(codes);
  p.probs.reserve(p.positions.size() * std::size_t(k_));
  for (std::size_t pos : p.positions) {
    const auto first = per_position_.begin() + std::ptrdiff_t(pos * std::size_t(k_));
    p.probs.insert(p.probs.end(), first, first + k_);
  }
  return p;
}

namespace {

void check_contract(const Prediction& pred, const std::vector<std::size_t>& expected, int k) {
  if (pred.positions != expected) throw DataError("predictor must return one distribution per MASK position");
  if (pred.probs.size() != expected.size() * std::size_t(k)) {
    throw DataError("predictor returned distributions of the wrong length");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    double sum = 0.0;
    for (double v : pred.at(i, k)) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("predictor returned a negative or non-finite probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw DataError("predictor distribution at position " + std::to_string(expected[i]) + " sums to " +
                      std::to_string(sum));
    }
  }
}

std::int32_t draw(std::span<const double> probs, Rng& rng) {
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  const double target = rng.uniform() * total;
  double cum = 0.0;
  std::int32_t last_positive = 0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    if (probs[c] <= 0.0) continue;
    last_positive = std::int32_t(c);
    cum += probs[c];
    if (target < cum) return std::int32_t(c);
  }
  return last_positive;
}

}  // namespace

SampleTrace sample_with_trace(const Predictor& predictor, const CodeGrid& initial, const Conditioning& cond,
                              const SampleConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("sampling needs T >= 1");
  if (cfg.temperature < 0.0) throw std::invalid_argument("temperature must be non-negative");
  for (std::int32_t c : initial.codes()) {
    if (c < 0 || c > initial.k()) throw DataError("initial grid holds an out-of-range code");
  }
  SampleTrace trace{initial, {}};
  CodeGrid& codes = trace.codes;
  const std::size_t initial_masked = codes.mask_count();
  if (initial_masked == 0) return trace;

  Rng rng(cfg.seed);
  const int k = codes.k();
  struct Candidate {
    std::size_t position;
    std::int32_t code;
    double confidence;
  };
  std::vector<Candidate> candidates;
  for (int t = 1; t <= cfg.steps; ++t) {
    const auto positions = masked_positions(codes);
    const Prediction pred = predictor.predict(codes, cond);
    check_contract(pred, positions, k);

    const double noise_scale = cfg.temperature * (1.0 - double(t) / double(cfg.steps));
    candidates.clear();
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const auto probs = pred.at(i, k);
      const std::int32_t code = draw(probs, rng);
      double confidence = std::log(probs[std::size_t(code)]);
      if (noise_scale > 0.0) confidence += noise_scale * rng.gumbel();
      candidates.push_back({positions[i], code, confidence});
    }
    const std::size_t remain = std::min(scheduled_mask_count(t, cfg.steps, initial_masked), positions.size());
    const std::size_t keep = positions.size() - remain;
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return a.confidence > b.confidence;
    });
    for (std::size_t i = 0; i < keep; ++i) codes[candidates[i].position] = candidates[i].code;
    trace.masked_after_step.push_back(remain);
  }
  return trace;
}

CodeGrid sample(const Predictor& predictor, const CodeGrid& initial, const Conditioning& cond,
                const SampleConfig& cfg) {
  return sample_with_trace(predictor, initial, cond, cfg).codes;
}

}  // namespace odis
