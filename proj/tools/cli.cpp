#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "odis/blending.hpp"
#include "odis/codebook.hpp"
#include "odis/conditioning.hpp"
#include "odis/error.hpp"
#include "odis/geometry.hpp"
#include "odis/metrics.hpp"
#include "odis/pipeline.hpp"
#include "odis/projection.hpp"
#include "odis/sampler.hpp"
#include "odis/scene.hpp"

namespace fs = std::filesystem;

namespace odis::cli {

namespace {

std::vector<fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no PNG files in '" + dir.string() + "'");
  return files;
}

std::vector<Image> read_pngs(const std::vector<fs::path>& files) {
  std::vector<Image> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_png(f));
  return out;
}

Image read_erp(const fs::path& path) {
  Image img = read_png(path);
  if (img.width() != 2 * img.height()) {
    throw DataError("'" + path.string() + "' is not a 2:1 equirectangular image");
  }
  return img;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open '" + path.string() + "' for writing");
  f << j.dump(2) << '\n';
}

/// --dir k or --yaw/--pitch selection shared by extract and project.
struct ViewChoice {
  std::optional<int> dir;
  double yaw = 0.0;
  double pitch = 0.0;
  double fov = 60.0;

  void add_options(CLI::App* app) {
    auto* d = app->add_option("--dir", dir, "index of a standard view direction (0-25)")->check(CLI::Range(0, 25));
    app->add_option("--yaw", yaw, "view longitude in degrees")->excludes(d);
    app->add_option("--pitch", pitch, "view latitude in degrees")->excludes(d);
    app->add_option("--fov", fov, "square field of view in degrees")->capture_default_str()->check(CLI::Range(0.001, 179.999));
  }

  NfovCamera camera(int width, int height) const {
    const UnitVec3 forward = dir ? rhombicuboctahedron_directions()[std::size_t(*dir)]
                                 : from_latlon({pitch * kPi / 180.0, yaw * kPi / 180.0});
    NfovCamera cam{camera_frame_for(forward), fov, fov, width, height};
    cam.validate();
    return cam;
  }
};

/// Accepts plain `key = value` lines: keys outside any section are routed to
/// the subcommand being run when it has an option of that name.
class SubcommandConfig : public CLI::ConfigTOML {
 public:
  const CLI::App* active = nullptr;

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigTOML::from_config(input);
    if (active == nullptr) return items;
    for (auto& item : items) {
      if (!item.parents.empty() || item.name == "++" || item.name == "--") continue;
      if (active->get_option_no_throw("--" + item.name) != nullptr) item.parents = {active->get_name()};
    }
    return items;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage omni-directional image synthesis toolkit", "odis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value config file; command-line flags take precedence");
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();
  std::function<void()> action;

  // directions
  auto* directions = app.add_subcommand("directions", "print the 26 view directions as CSV (index,x,y,z)");
  bool header = false;
  directions->add_flag("--header", header, "print a column header first");
  directions->callback([&] {
    action = [&] {
      if (header) out << "index,x,y,z\n";
      const auto dirs = rhombicuboctahedron_directions();
      char line[128];
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", i, dirs[i].x(), dirs[i].y(), dirs[i].z());
        out << line;
      }
    };
  });

  // extract
  auto* extract = app.add_subcommand("extract", "extract a perspective view from an ERP panorama");
  std::string in_path, out_path;
  ViewChoice view;
  int size = 256;
  extract->add_option("--in", in_path, "input ERP PNG")->required();
  extract->add_option("--out", out_path, "output view PNG")->required();
  extract->add_option("--size", size, "view resolution in pixels")->capture_default_str()->check(CLI::PositiveNumber);
  view.add_options(extract);
  extract->callback([&] {
    action = [&] {
      const Image erp = read_erp(in_path);
      write_png(out_path, extract_nfov(erp, view.camera(size, size)).pixels);
    };
  });

  // project
  auto* project = app.add_subcommand("project", "project a perspective view back onto an ERP canvas");
  int height = 1024;
  std::string mask_out;
  project->add_option("--in", in_path, "input view PNG")->required();
  project->add_option("--out", out_path, "output ERP PNG (zero outside the footprint)")->required();
  project->add_option("--height", height, "ERP height; width is twice this")->capture_default_str()->check(CLI::PositiveNumber);
  project->add_option("--mask-out", mask_out, "optional coverage mask PNG");
  view.add_options(project);
  project->callback([&] {
    action = [&] {
      const Image img = read_png(in_path);
      const ProjectedView pv = project_nfov_to_erp({view.camera(img.width(), img.height()), img}, 2 * height, height);
      write_png(out_path, pv.colors());
      if (!mask_out.empty()) write_png(mask_out, mask_to_image(pv.coverage()));
    };
  });

  // blend
  auto* blend = app.add_subcommand("blend", "merge the 26 standard views into one ERP");
  std::vector<std::string> view_paths;
  double fov = 60.0;
  blend->add_option("--views", view_paths, "26 view PNGs in direction-index order")->required()->expected(1, -1);
  blend->add_option("--out", out_path, "output ERP PNG")->required();
  blend->add_option("--height", height, "ERP height; width is twice this")->capture_default_str()->check(CLI::PositiveNumber);
  blend->add_option("--fov", fov, "field of view of the views in degrees")->capture_default_str();
  blend->callback([&] {
    action = [&] {
      if (view_paths.size() != std::size_t(kStandardViewCount)) {
        throw std::invalid_argument("blend expects exactly 26 views, got " + std::to_string(view_paths.size()));
      }
      std::vector<Image> views;
      for (const auto& p : view_paths) views.push_back(read_png(p));
      const ViewSet set = standard_view_set(fov, views.front().width());
      ViewBlender blender(set, 2 * height, height);
      for (std::size_t k = 0; k < views.size(); ++k) {
        if (views[k].width() != views.front().width() || views[k].height() != views.front().width()) {
          throw DataError("view '" + view_paths[k] + "' is not square or differs in size from the first view");
        }
        blender.add(int(k), views[k]);
      }
      write_png(out_path, blender.finish());
    };
  });

  // embed
  auto* embed = app.add_subcommand("embed", "embed an NFoV image at the ERP center as a conditional image");
  double fovw = 126.87, fovh = 112.62;
  std::string mask_path;
  embed->add_option("--in", in_path, "input NFoV PNG")->required();
  embed->add_option("--fovw", fovw, "horizontal FOV in degrees")->capture_default_str();
  embed->add_option("--fovh", fovh, "vertical FOV in degrees")->capture_default_str();
  embed->add_option("--height", height, "ERP height; width is twice this")->capture_default_str()->check(CLI::PositiveNumber);
  embed->add_option("--out", out_path, "conditional ERP PNG")->required();
  embed->add_option("--mask", mask_path, "known-region mask PNG")->required();
  embed->callback([&] {
    action = [&] {
      const Image img = read_png(in_path);
      const EmbeddedCondition c = embed_nfov_center(img, fovw, fovh, 2 * height, height);
      write_png(out_path, c.erp);
      write_png(mask_path, mask_to_image(c.known));
    };
  });

  // train-codebook
  auto* train = app.add_subcommand("train-codebook", "k-means patch codebook from a directory of PNGs");
  std::string images_dir;
  int k = 256, patch = 16, max_iter = 50, nfov_size = 256;
  std::uint64_t seed = 0;
  bool from_views = false;
  train->add_option("--images", images_dir, "directory of training PNGs")->required();
  train->add_option("--k", k, "number of codebook entries")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  train->add_option("--patch", patch, "patch size in pixels")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", seed, "k-means++ seed")->capture_default_str();
  train->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_flag("--from-views", from_views, "treat inputs as ERP panoramas and train on their 26 extracted views");
  train->add_option("--nfov-size", nfov_size, "view size for --from-views")->capture_default_str();
  train->add_option("--fov", fov, "view FOV for --from-views")->capture_default_str();
  train->add_option("--out", out_path, "output codebook file")->required();
  train->callback([&] {
    action = [&] {
      spdlog::info("train-codebook seed = {}", seed);
      std::vector<Image> images = read_pngs(png_files(images_dir));
      if (from_views) {
        const ViewSet set = standard_view_set(fov, nfov_size);
        std::vector<Image> views;
        for (const Image& pano : images) {
          for (const NfovCamera& cam : set.cameras) views.push_back(extract_nfov(pano, cam).pixels);
        }
        images = std::move(views);
      }
      TrainOptions opt{k, patch, seed, max_iter, 1e-6};
      const TrainResult r = train_codebook(images, opt);
      spdlog::info("trained K = {} in {} iterations, quantization MSE {:.6g}", k, r.iterations, r.final_mse);
      save_codebook(out_path, r.codebook);
    };
  });

  // encode / decode
  auto* enc = app.add_subcommand("encode", "quantize an image to a code grid");
  std::string codebook_path;
  enc->add_option("--in", in_path, "input PNG")->required();
  enc->add_option("--codebook", codebook_path, "codebook file")->required();
  enc->add_option("--out", out_path, "output grid (stdout if omitted)");
  enc->callback([&] {
    action = [&] {
      const Codebook cb = load_codebook(codebook_path);
      const CodeGrid g = encode(read_png(in_path), cb);
      if (out_path.empty()) {
        write_codegrid(out, g);
      } else {
        save_codegrid(out_path, g);
      }
    };
  });
  auto* dec = app.add_subcommand("decode", "render a code grid with its codebook");
  std::string codes_path;
  dec->add_option("--codes", codes_path, "input grid")->required();
  dec->add_option("--codebook", codebook_path, "codebook file")->required();
  dec->add_option("--out", out_path, "output PNG")->required();
  dec->callback([&] {
    action = [&] {
      const Codebook cb = load_codebook(codebook_path);
      write_png(out_path, decode(load_codegrid(codes_path), cb));
    };
  });

  // mask
  auto* mask = app.add_subcommand("mask", "build a conditional image and known mask from a panorama");
  std::string variant = "center";
  double lat_threshold_deg = -45.0, yaw_offset = 180.0;
  mask->add_option("--variant", variant, "center|boxes|ground|two")->capture_default_str()
      ->check(CLI::IsMember({"center", "boxes", "ground", "two"}));
  mask->add_option("--seed", seed, "seed for randomized variants")->capture_default_str();
  mask->add_option("--in", in_path, "input ERP PNG")->required();
  mask->add_option("--out", out_path, "conditional ERP PNG")->required();
  mask->add_option("--mask-out", mask_path, "known-region mask PNG")->required();
  mask->add_option("--fovw", fovw, "horizontal FOV for center/two")->capture_default_str();
  mask->add_option("--fovh", fovh, "vertical FOV for center/two")->capture_default_str();
  mask->add_option("--lat-threshold", lat_threshold_deg, "ground variant: latitude (deg) below which is unknown")->capture_default_str();
  mask->add_option("--yaw-offset", yaw_offset, "two variant: yaw between the footprints")->capture_default_str();
  mask->callback([&] {
    action = [&] {
      spdlog::info("mask seed = {}", seed);
      const Image erp = read_erp(in_path);
      ConditionSpec spec;
      if (variant == "center") spec = CenterNfov{fovw, fovh};
      if (variant == "boxes") spec = RandomBoxes{};
      if (variant == "ground") spec = GroundRegion{lat_threshold_deg * kPi / 180.0};
      if (variant == "two") spec = TwoView{fovw, fovh, yaw_offset};
      Rng rng(seed);
      const Condition c = make_condition(erp, spec, rng);
      write_png(out_path, c.image);
      write_png(mask_path, mask_to_image(c.known));
    };
  });

  // sample
  auto* samp = app.add_subcommand("sample", "fill MASK entries of a code grid by iterative sampling");
  std::string predictor = "marginal", truth_path;
  std::vector<std::string> corpus_paths;
  int steps = 16;
  double temperature = 1.0;
  samp->add_option("--codes", codes_path, "input grid with M entries")->required();
  samp->add_option("--predictor", predictor, "marginal|oracle|contextcopy")->capture_default_str()
      ->check(CLI::IsMember({"marginal", "oracle", "contextcopy"}));
  samp->add_option("--T", steps, "number of sampling steps")->capture_default_str()->check(CLI::PositiveNumber);
  samp->add_option("--seed", seed, "sampling seed")->capture_default_str();
  samp->add_option("--temperature", temperature, "Gumbel noise scale (0 disables)")->capture_default_str()->check(CLI::NonNegativeNumber);
  samp->add_option("--truth", truth_path, "ground-truth grid for the oracle");
  samp->add_option("--corpus", corpus_paths, "grids for predictor statistics (default: the input's known codes)");
  samp->add_option("--out", out_path, "output grid (stdout if omitted)");
  samp->callback([&] {
    action = [&] {
      spdlog::info("sample seed = {}", seed);
      const CodeGrid initial = load_codegrid(codes_path);
      std::unique_ptr<Predictor> pred;
      const PredictorKind kind = parse_predictor_kind(predictor);
      if (kind == PredictorKind::kOracle) {
        if (truth_path.empty()) throw std::invalid_argument("--predictor oracle needs --truth");
        pred = std::make_unique<OraclePredictor>(std::vector{load_codegrid(truth_path)});
      } else {
        std::vector<CodeGrid> corpus;
        for (const auto& p : corpus_paths) corpus.push_back(load_codegrid(p));
        if (corpus.empty()) corpus.push_back(initial);
        if (kind == PredictorKind::kMarginal) {
          pred = std::make_unique<MarginalPredictor>(corpus, initial.k());
        } else {
          pred = std::make_unique<ContextCopyPredictor>(corpus, initial.k());
        }
      }
      const CodeGrid result = sample(*pred, initial, {}, {steps, temperature, seed});
      if (out_path.empty()) {
        write_codegrid(out, result);
      } else {
        save_codegrid(out_path, result);
      }
    };
  });

  // synthesize
  auto* synth = app.add_subcommand("synthesize", "two-stage synthesis from a conditional ERP and mask");
  std::string cond_path, stage1_path, views_dir, corpus_dir;
  int low_height = 256, threads = 0;
  height = 1024;
  synth->add_option("--cond", cond_path, "conditional ERP PNG")->required();
  synth->add_option("--mask", mask_path, "known-region mask PNG")->required();
  synth->add_option("--codebook", codebook_path, "codebook file")->required();
  synth->add_option("--predictor", predictor, "marginal|oracle|contextcopy")->capture_default_str()
      ->check(CLI::IsMember({"marginal", "oracle", "contextcopy"}));
  synth->add_option("--T", steps, "sampling steps per stage")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "run seed")->capture_default_str();
  synth->add_option("--temperature", temperature, "Gumbel noise scale")->capture_default_str()->check(CLI::NonNegativeNumber);
  synth->add_option("--out", out_path, "output ERP PNG")->required();
  synth->add_option("--save-stage1", stage1_path, "write the coarse stage-1 ERP here");
  synth->add_option("--save-views", views_dir, "write the decoded stage-2 views into this directory");
  synth->add_option("--corpus", corpus_dir, "directory of panoramas for predictor statistics");
  synth->add_option("--truth", truth_path, "ground-truth panorama for the oracle predictor");
  synth->add_option("--low-height", low_height, "stage-1 ERP height")->capture_default_str();
  synth->add_option("--height", height, "output ERP height")->capture_default_str();
  synth->add_option("--nfov-size", nfov_size, "stage-2 view size")->capture_default_str();
  synth->add_option("--fov", fov, "stage-2 view FOV")->capture_default_str();
  synth->add_option("--threads", threads, "worker threads for stage 2 (0 = all cores)")->capture_default_str();
  synth->callback([&] {
    action = [&] {
      spdlog::info("synthesize seed = {}", seed);
      PipelineConfig cfg;
      cfg.codebook = std::make_shared<const Codebook>(load_codebook(codebook_path));
      cfg.low_height = low_height;
      cfg.high_height = height;
      cfg.nfov_size = nfov_size;
      cfg.fov_deg = fov;
      cfg.use_standard_views();
      cfg.steps = steps;
      cfg.temperature = temperature;
      cfg.seed = seed;
      cfg.threads = threads;
      const Image cond = read_erp(cond_path);
      const Mask known = image_to_mask(read_png(mask_path));
      if (known.width() != cond.width() || known.height() != cond.height()) {
        throw DataError("mask '" + mask_path + "' does not match the conditional image size");
      }
      const PredictorKind kind = parse_predictor_kind(predictor);
      std::vector<Image> corpus;
      std::optional<Image> truth;
      if (kind == PredictorKind::kOracle) {
        if (truth_path.empty()) throw std::invalid_argument("--predictor oracle needs --truth");
        truth = read_erp(truth_path);
      } else if (!corpus_dir.empty()) {
        corpus = read_pngs(png_files(corpus_dir));
      } else {
        corpus.push_back(cond);
      }
      const StagePredictors preds = make_predictors(kind, corpus, truth ? &*truth : nullptr, cfg);
      cfg.stage1_predictor = preds.stage1;
      cfg.stage2_predictor = preds.stage2;
      const SynthesisResult r = synthesize(cond, known, cfg);
      write_png(out_path, r.stage2.image);
      if (!stage1_path.empty()) write_png(stage1_path, r.stage1.image);
      if (!views_dir.empty()) {
        fs::create_directories(views_dir);
        for (std::size_t i = 0; i < r.stage2.views.size(); ++i) {
          char name[32];
          std::snprintf(name, sizeof name, "v%02zu.png", i);
          write_png(fs::path(views_dir) / name, r.stage2.views[i]);
        }
      }
    };
  });

  // reconstruct-compare
  auto* recon = app.add_subcommand("reconstruct-compare", "compare direct ERP and per-view reconstructions");
  std::string report_path;
  nfov_size = 256;
  recon->add_option("--in", in_path, "input ERP PNG")->required();
  recon->add_option("--codebook", codebook_path, "codebook file")->required();
  recon->add_option("--report", report_path, "output JSON report")->required();
  recon->add_option("--nfov-size", nfov_size, "view size")->capture_default_str();
  recon->add_option("--fov", fov, "view FOV")->capture_default_str();
  recon->add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
  recon->callback([&] {
    action = [&] {
      const Codebook cb = load_codebook(codebook_path);
      const Image erp = read_erp(in_path);
      const auto cmp = reconstruct_compare(erp, cb, standard_view_set(fov, nfov_size), threads);
      const nlohmann::json j = to_json(cmp);
      write_json(report_path, j);
      out << j.dump(2) << '\n';
    };
  });

  // metrics
  auto* met = app.add_subcommand("metrics", "latitude-weighted error report between two ERP images");
  std::string a_path, b_path, json_path;
  met->add_option("--a", a_path, "reference ERP PNG")->required();
  met->add_option("--b", b_path, "candidate ERP PNG")->required();
  met->add_option("--json", json_path, "output JSON (stdout only if omitted)");
  met->add_option("--fov", fov, "view FOV for the coverage fields")->capture_default_str();
  met->add_option("--nfov-size", nfov_size, "view size for the coverage fields")->capture_default_str();
  met->callback([&] {
    action = [&] {
      const Image a = read_erp(a_path);
      const Image b = read_erp(b_path);
      const nlohmann::json j = to_json(compare_images(a, b, standard_view_set(fov, nfov_size)));
      if (!json_path.empty()) write_json(json_path, j);
      out << j.dump(2) << '\n';
    };
  });

  // render-scene
  auto* scene = app.add_subcommand("render-scene", "render a procedural test panorama");
  height = 1024;
  int supersample = 2;
  scene->add_option("--seed", seed, "scene seed")->capture_default_str();
  scene->add_option("--height", height, "ERP height; width is twice this")->capture_default_str()->check(CLI::PositiveNumber);
  scene->add_option("--supersample", supersample, "rays per pixel per axis")->capture_default_str()->check(CLI::PositiveNumber);
  scene->add_option("--out", out_path, "output ERP PNG")->required();
  scene->callback([&] {
    action = [&] {
      spdlog::info("render-scene seed = {}", seed);
      write_png(out_path, render_scene(random_scene(seed), height, supersample));
    };
  });

  auto config = std::make_shared<SubcommandConfig>();
  app.config_formatter(config);
  for (int i = 1; i < argc && config->active == nullptr; ++i) {
    config->active = app.get_subcommand_no_throw(argv[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto level = spdlog::level::from_str(log_level);
  spdlog::set_level(level);

  try {
    if (action) action();
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace odis::cli
