#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "odis/codebook.hpp"
#include "odis/image.hpp"
#include "odis/metrics.hpp"
#include "odis/projection.hpp"
#include "odis/sampler.hpp"

namespace odis {

/// Two-stage synthesis settings. Defaults: 256x512 coarse ERP, 1024x2048
/// output, 26 views of 256x256 at 60 deg, T = 16.
struct PipelineConfig {
  int low_height = 256;
  int high_height = 1024;
  int nfov_size = 256;
  double fov_deg = 60.0;
  ViewSet views = standard_view_set(60.0, 256);
  int steps = 16;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  /// Worker threads for the per-view stage (0 = hardware concurrency).
  int threads = 0;
  std::shared_ptr<const Codebook> codebook;
  std::shared_ptr<const Predictor> stage1_predictor;
  std::shared_ptr<const Predictor> stage2_predictor;

  /// Throws std::invalid_argument when the geometry does not fit the codebook
  /// (coarse grid 16x32, view grid 16x16 at the defaults).
  void validate() const;
  /// Rebuilds `views` for fov_deg / nfov_size.
  void use_standard_views();
};

/// Initial code grid for a (possibly partially known) image: codes of fully
/// known patches are fixed, every other position is MASK.
CodeGrid fixed_codes(const Image& img, const Mask& known, const Codebook& cb);

struct Stage1Result {
  Image image;  // low_height x 2 * low_height
  CodeGrid initial;
  CodeGrid codes;
};

/// Coarse ERP synthesis. The condition may be at any 2:1 resolution; it is
/// area-resampled to the coarse size and a pixel counts as known only if all
/// of its source pixels are.
Stage1Result stage1(const Image& cond, const Mask& known, const PipelineConfig& cfg);

struct Stage2Result {
  Image image;  // high_height x 2 * high_height
  std::vector<Image> views;
  std::vector<CodeGrid> codes;
};

/// Per-view refinement: each view is conditioned on the NFoV extracted from
/// the coarse image and on the conditional NFoV; the decoded views are
/// blended into the output ERP.
Stage2Result stage2(const Image& low, const Image& cond, const Mask& known, const PipelineConfig& cfg);

struct SynthesisResult {
  Stage1Result stage1;
  Stage2Result stage2;
};

SynthesisResult synthesize(const Image& cond, const Mask& known, const PipelineConfig& cfg);

/// Seed used for view `index` in stage 2, derived from the run seed.
std::uint64_t view_seed(std::uint64_t seed, int index);

/// decode(encode(erp)).
Image reconstruct_direct(const Image& erp, const Codebook& cb);

/// Blend of decode(encode(extract(erp, view))) over all views, at the size of erp.
Image reconstruct_via_views(const Image& erp, const Codebook& cb, const ViewSet& views, int threads = 1);

struct ReconstructionComparison {
  MetricReport direct;
  MetricReport via_views;
};

ReconstructionComparison reconstruct_compare(const Image& erp, const Codebook& cb, const ViewSet& views,
                                             int threads = 1);
nlohmann::json to_json(const ReconstructionComparison& c);

/// Ground-truth grids for the oracle predictors: the coarse grid of the
/// resampled panorama, and one grid per view extracted from it.
CodeGrid coarse_truth(const Image& panorama, const Codebook& cb, int low_height);
std::vector<CodeGrid> view_truths(const Image& panorama, const Codebook& cb, const ViewSet& views);

enum class PredictorKind { kOracle, kMarginal, kContextCopy };

PredictorKind parse_predictor_kind(const std::string& name);

struct StagePredictors {
  std::shared_ptr<const Predictor> stage1;
  std::shared_ptr<const Predictor> stage2;
};

/// Oracle predictors read their truth from `truth`; the statistical ones are
/// gathered from the corpus panoramas (coarse grids for stage 1, view grids
/// for stage 2).
StagePredictors make_predictors(PredictorKind kind, std::span<const Image> corpus, const Image* truth,
                                const PipelineConfig& cfg);

}  // namespace odis
