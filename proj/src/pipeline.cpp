#include "odis/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

#include "odis/blending.hpp"
#include "odis/conditioning.hpp"
#include "odis/error.hpp"
#include "odis/parallel.hpp"

namespace odis {

void PipelineConfig::validate() const {
  if (!codebook) throw std::invalid_argument("pipeline needs a codebook");
  const int p = codebook->patch_w();
  if (codebook->patch_h() != p) throw std::invalid_argument("pipeline needs square codebook patches");
  if (low_height <= 0 || low_height % p != 0) throw std::invalid_argument("coarse height must be a multiple of the patch size");
  if (high_height <= 0) throw std::invalid_argument("output height must be positive");
  if (steps < 1) throw std::invalid_argument("T must be >= 1");
  if (views.cameras.empty()) throw std::invalid_argument("pipeline needs at least one view");
  for (const NfovCamera& cam : views.cameras) {
    cam.validate();
    if (cam.width % p != 0 || cam.height % p != 0) throw std::invalid_argument("view size must be a multiple of the patch size");
  }
}

void PipelineConfig::use_standard_views() { views = standard_view_set(fov_deg, nfov_size); }

CodeGrid fixed_codes(const Image& img, const Mask& known, const Codebook& cb) {
  if (known.width() != img.width() || known.height() != img.height()) throw DataError("mask does not match the image");
  CodeGrid grid = encode(img, cb);
  const int p = cb.patch_w();
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      bool all = true;
      for (int y = r * p; y < (r + 1) * p && all; ++y) {
        for (int x = c * p; x < (c + 1) * p && all; ++x) all = known.get(x, y);
      }
      if (!all) grid.at(r, c) = grid.mask_code();
    }
  }
  return grid;
}

std::uint64_t view_seed(std::uint64_t seed, int index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * std::uint64_t(index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Stage1Result stage1(const Image& cond, const Mask& known, const PipelineConfig& cfg) {
  cfg.validate();
  if (!cfg.stage1_predictor) throw std::invalid_argument("stage 1 needs a predictor");
  if (cond.height() <= 0 || cond.width() != 2 * cond.height()) throw DataError("conditional image must be 2:1 ERP");
  if (known.width() != cond.width() || known.height() != cond.height()) throw DataError("mask does not match the condition");
  const int h = cfg.low_height;
  const Image low_cond = resize_to(cond, 2 * h, h);
  const Mask low_known = resize_mask(known, 2 * h, h);

  Stage1Result out;
  out.initial = fixed_codes(low_cond, low_known, *cfg.codebook);
  const Conditioning ctx{&low_cond, &low_known, nullptr, 0};
  out.codes = sample(*cfg.stage1_predictor, out.initial, ctx, {cfg.steps, cfg.temperature, cfg.seed});
  out.image = decode(out.codes, *cfg.codebook);
  spdlog::debug("stage 1: {} of {} codes sampled", out.initial.mask_count(), out.initial.size());
  return out;
}

Stage2Result stage2(const Image& low, const Image& cond, const Mask& known, const PipelineConfig& cfg) {
  cfg.validate();
  if (!cfg.stage2_predictor) throw std::invalid_argument("stage 2 needs a predictor");
  if (low.height() != cfg.low_height || low.width() != 2 * cfg.low_height) {
    throw DataError("stage 2 expects the coarse image at " + std::to_string(2 * cfg.low_height) + "x" +
                    std::to_string(cfg.low_height));
  }
  const auto view_conds = condition_to_views(cond, known, cfg.views);
  const std::size_t n = cfg.views.size();
  Stage2Result out;
  out.views.resize(n);
  out.codes.resize(n);
  parallel_for(n, cfg.threads, [&](std::size_t k) {
    const NfovCamera& cam = cfg.views.cameras[k];
    const Image low_view = extract_nfov(low, cam).pixels;
    const ViewCondition& vc = view_conds[k];
    const CodeGrid initial = fixed_codes(vc.image, vc.known, *cfg.codebook);
    const Conditioning ctx{&vc.image, &vc.known, &low_view, int(k)};
    out.codes[k] = sample(*cfg.stage2_predictor, initial, ctx,
                          {cfg.steps, cfg.temperature, view_seed(cfg.seed, int(k))});
    out.views[k] = decode(out.codes[k], *cfg.codebook);
  });
  ViewBlender blender(cfg.views, 2 * cfg.high_height, cfg.high_height);
  for (std::size_t k = 0; k < n; ++k) blender.add(int(k), out.views[k]);
  out.image = blender.finish();
  return out;
}

SynthesisResult synthesize(const Image& cond, const Mask& known, const PipelineConfig& cfg) {
  SynthesisResult r;
  r.stage1 = stage1(cond, known, cfg);
  r.stage2 = stage2(r.stage1.image, cond, known, cfg);
  return r;
}

Image reconstruct_direct(const Image& erp, const Codebook& cb) { return decode(encode(erp, cb), cb); }

Image reconstruct_via_views(const Image& erp, const Codebook& cb, const ViewSet& views, int threads) {
  std::vector<Image> decoded(views.size());
  parallel_for(views.size(), threads, [&](std::size_t k) {
    decoded[k] = reconstruct_direct(extract_nfov(erp, views.cameras[k]).pixels, cb);
  });
  ViewBlender blender(views, erp.width(), erp.height(), erp.channels());
  for (std::size_t k = 0; k < decoded.size(); ++k) blender.add(int(k), decoded[k]);
  return blender.finish();
}

ReconstructionComparison reconstruct_compare(const Image& erp, const Codebook& cb, const ViewSet& views, int threads) {
  const Image direct = reconstruct_direct(erp, cb);
  const Image via = reconstruct_via_views(erp, cb, views, threads);
  return {compare_images(erp, direct, views), compare_images(erp, via, views)};
}

nlohmann::json to_json(const ReconstructionComparison& c) {
  return {{"direct", to_json(c.direct)},
          {"via_views", to_json(c.via_views)},
          {"note", "FID/IS/LPIPS are not computed; they require pretrained classifier networks."}};
}

CodeGrid coarse_truth(const Image& panorama, const Codebook& cb, int low_height) {
  return encode(resize_to(panorama, 2 * low_height, low_height), cb);
}

std::vector<CodeGrid> view_truths(const Image& panorama, const Codebook& cb, const ViewSet& views) {
  std::vector<CodeGrid> out;
  out.reserve(views.size());
  for (const NfovCamera& cam : views.cameras) out.push_back(encode(extract_nfov(panorama, cam).pixels, cb));
  return out;
}

PredictorKind parse_predictor_kind(const std::string& name) {
  if (name == "oracle") return PredictorKind::kOracle;
  if (name == "marginal") return PredictorKind::kMarginal;
  if (name == "contextcopy") return PredictorKind::kContextCopy;
  throw std::invalid_argument("unknown predictor '" + name + "' (expected oracle, marginal or contextcopy)");
}

StagePredictors make_predictors(PredictorKind kind, std::span<const Image> corpus, const Image* truth,
                                const PipelineConfig& cfg) {
  if (!cfg.codebook) throw std::invalid_argument("predictors need a codebook");
  const Codebook& cb = *cfg.codebook;
  if (kind == PredictorKind::kOracle) {
    if (!truth) throw std::invalid_argument("the oracle predictor needs a ground-truth panorama");
    return {std::make_shared<OraclePredictor>(std::vector{coarse_truth(*truth, cb, cfg.low_height)}),
            std::make_shared<OraclePredictor>(view_truths(*truth, cb, cfg.views))};
  }
  if (corpus.empty()) throw std::invalid_argument("statistical predictors need a corpus");
  std::vector<CodeGrid> coarse;
  std::vector<CodeGrid> per_view;
  for (const Image& pano : corpus) {
    coarse.push_back(coarse_truth(pano, cb, cfg.low_height));
    for (CodeGrid& g : view_truths(pano, cb, cfg.views)) per_view.push_back(std::move(g));
  }
  if (kind == PredictorKind::kMarginal) {
    return {std::make_shared<MarginalPredictor>(coarse, cb.size()),
            std::make_shared<MarginalPredictor>(per_view, cb.size())};
  }
  return {std::make_shared<ContextCopyPredictor>(coarse, cb.size()),
          std::make_shared<ContextCopyPredictor>(per_view, cb.size())};
}

}  // namespace odis
