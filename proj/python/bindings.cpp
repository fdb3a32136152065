#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

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

namespace py = pybind11;
using namespace odis;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

Image to_image(const FloatArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw std::invalid_argument("expected an (H, W, 3) float array");
  Image img(int(a.shape(1)), int(a.shape(0)), 3);
  std::memcpy(img.data().data(), a.data(), img.size() * sizeof(float));
  return img;
}

FloatArray from_image(const Image& img) {
  FloatArray a({py::ssize_t(img.height()), py::ssize_t(img.width()), py::ssize_t(img.channels())});
  std::memcpy(a.mutable_data(), img.data().data(), img.size() * sizeof(float));
  return a;
}

Mask to_mask(const BoolArray& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected an (H, W) boolean mask");
  Mask m(int(a.shape(1)), int(a.shape(0)));
  const bool* p = a.data();
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m.set(x, y, p[std::size_t(y) * std::size_t(m.width()) + std::size_t(x)]);
  return m;
}

BoolArray from_mask(const Mask& m) {
  BoolArray a({py::ssize_t(m.height()), py::ssize_t(m.width())});
  bool* p = a.mutable_data();
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) p[std::size_t(y) * std::size_t(m.width()) + std::size_t(x)] = m.get(x, y);
  return a;
}

py::array_t<std::int32_t> from_grid(const CodeGrid& g) {
  py::array_t<std::int32_t> a({py::ssize_t(g.rows()), py::ssize_t(g.cols())});
  std::memcpy(a.mutable_data(), g.codes().data(), g.size() * sizeof(std::int32_t));
  return a;
}

CodeGrid to_grid(const py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>& a, int k) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D code grid");
  CodeGrid g(int(a.shape(0)), int(a.shape(1)), k, 0);
  std::memcpy(&g[0], a.data(), g.size() * sizeof(std::int32_t));
  return g;
}

std::vector<Image> to_images(const std::vector<FloatArray>& arrays) {
  std::vector<Image> out;
  for (const auto& a : arrays) out.push_back(to_image(a));
  return out;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["global_mse"] = r.global_mse;
  d["pole_mse"] = r.pole_mse;
  d["equator_mse"] = r.equator_mse;
  d["seam_score"] = r.seam_score;
  d["psnr"] = r.psnr;
  d["coverage_min"] = r.coverage_min;
  d["coverage_max"] = r.coverage_max;
  return d;
}

ConditionSpec parse_spec(const std::string& variant, const py::object& known) {
  if (variant == "center") return CenterNfov{};
  if (variant == "boxes") return RandomBoxes{};
  if (variant == "ground") return GroundRegion{};
  if (variant == "two") return TwoView{};
  if (variant == "explicit") {
    if (known.is_none()) throw std::invalid_argument("the explicit variant needs a known mask");
    return ExplicitMask{to_mask(known.cast<BoolArray>())};
  }
  throw std::invalid_argument("unknown condition variant '" + variant + "'");
}

}  // namespace

PYBIND11_MODULE(_odis, m) {
  m.doc() = "Omnidirectional image synthesis core";
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def("directions", [] {
    py::array_t<double> a({py::ssize_t(kStandardViewCount), py::ssize_t(3)});
    auto r = a.mutable_unchecked<2>();
    const auto dirs = rhombicuboctahedron_directions();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      r(py::ssize_t(i), 0) = dirs[i].x();
      r(py::ssize_t(i), 1) = dirs[i].y();
      r(py::ssize_t(i), 2) = dirs[i].z();
    }
    return a;
  });
  m.def("erp_pixel_to_direction", [](double u, double v, int width, int height) {
    const UnitVec3 d = erp_pixel_to_direction(u, v, width, height);
    return py::make_tuple(d.x(), d.y(), d.z());
  }, py::arg("u"), py::arg("v"), py::arg("width"), py::arg("height"));
  m.def("direction_to_erp_pixel", [](double x, double y, double z, int width, int height) {
    const ErpCoord c = direction_to_erp_pixel(UnitVec3::normalized({x, y, z}), width, height);
    return py::make_tuple(c.u, c.v);
  }, py::arg("x"), py::arg("y"), py::arg("z"), py::arg("width"), py::arg("height"));

  m.def("render_scene", [](std::uint64_t seed, int height, int supersample) {
    return from_image(render_scene(random_scene(seed), height, supersample));
  }, py::arg("seed"), py::arg("height"), py::arg("supersample") = 2);

  m.def("extract_view", [](const FloatArray& erp, int index, double fov, int size) {
    const ViewSet views = standard_view_set(fov, size);
    if (index < 0 || index >= int(views.size())) throw std::invalid_argument("view index must be in [0, 26)");
    return from_image(extract_nfov(to_image(erp), views.cameras[std::size_t(index)]).pixels);
  }, py::arg("erp"), py::arg("index"), py::arg("fov") = 60.0, py::arg("size") = 256);
  m.def("extract_yaw_pitch", [](const FloatArray& erp, double yaw, double pitch, double fov, int size) {
    const NfovCamera cam{camera_frame_for_yaw_pitch(yaw, pitch), fov, fov, size, size};
    cam.validate();
    return from_image(extract_nfov(to_image(erp), cam).pixels);
  }, py::arg("erp"), py::arg("yaw"), py::arg("pitch"), py::arg("fov") = 60.0, py::arg("size") = 256);
  m.def("blend_views", [](const std::vector<FloatArray>& views, int height, double fov) {
    if (views.empty()) throw std::invalid_argument("blend needs views");
    const ViewSet set = standard_view_set(fov, int(views.front().shape(0)));
    if (views.size() != set.size()) throw std::invalid_argument("blend needs all 26 views");
    ViewBlender blender(set, 2 * height, height);
    for (std::size_t k = 0; k < views.size(); ++k) blender.add(int(k), to_image(views[k]));
    return from_image(blender.finish());
  }, py::arg("views"), py::arg("height"), py::arg("fov") = 60.0);
  m.def("coverage", [](int height, double fov, int size) {
    const auto counts = coverage_of_viewset(standard_view_set(fov, size), 2 * height, height);
    py::array_t<std::uint16_t> a({py::ssize_t(height), py::ssize_t(2 * height)});
    std::memcpy(a.mutable_data(), counts.data(), counts.size() * sizeof(std::uint16_t));
    return a;
  }, py::arg("height"), py::arg("fov") = 60.0, py::arg("size") = 256);

  py::class_<Codebook, std::shared_ptr<Codebook>>(m, "Codebook")
      .def_property_readonly("size", &Codebook::size)
      .def_property_readonly("patch", &Codebook::patch_w)
      .def_property_readonly("mask_code", &Codebook::mask_code)
      .def("entries", [](const Codebook& cb) {
        py::array_t<float> a({py::ssize_t(cb.size()), py::ssize_t(cb.dim())});
        std::memcpy(a.mutable_data(), cb.entries().data(), cb.entries().size() * sizeof(float));
        return a;
      })
      .def("encode", [](const Codebook& cb, const FloatArray& img) { return from_grid(encode(to_image(img), cb)); })
      .def("decode", [](const Codebook& cb, const py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>& g) {
        return from_image(decode(to_grid(g, cb.size()), cb));
      })
      .def("save", [](const Codebook& cb, const std::string& path) { save_codebook(path, cb); })
      .def_static("load", [](const std::string& path) { return std::make_shared<Codebook>(load_codebook(path)); })
      .def("__eq__", [](const Codebook& a, const Codebook& b) { return a == b; });

  m.def("train_codebook", [](const std::vector<FloatArray>& images, int k, int patch, std::uint64_t seed,
                             int max_iterations) {
    const auto imgs = to_images(images);
    py::gil_scoped_release release;
    return std::make_shared<Codebook>(train_codebook(imgs, {k, patch, seed, max_iterations, 1e-6}).codebook);
  }, py::arg("images"), py::arg("k"), py::arg("patch"), py::arg("seed") = 0, py::arg("max_iterations") = 50);

  m.def("mask_ratio", &mask_ratio, py::arg("t"), py::arg("steps"));
  m.def("scheduled_mask_count", &scheduled_mask_count, py::arg("t"), py::arg("steps"), py::arg("initial_masked"));
  m.def("sample_oracle", [](const py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>& masked,
                            const py::array_t<std::int32_t, py::array::c_style | py::array::forcecast>& truth, int k,
                            int steps, std::uint64_t seed) {
    const SampleTrace t = sample_with_trace(OraclePredictor({to_grid(truth, k)}), to_grid(masked, k), {},
                                            {steps, 1.0, seed});
    return py::make_tuple(from_grid(t.codes), t.masked_after_step);
  }, py::arg("masked"), py::arg("truth"), py::arg("k"), py::arg("steps") = 16, py::arg("seed") = 0);

  m.def("condition", [](const FloatArray& erp, const std::string& variant, std::uint64_t seed, const py::object& known) {
    Rng rng(seed);
    const Condition c = make_condition(to_image(erp), parse_spec(variant, known), rng);
    return py::make_tuple(from_image(c.image), from_mask(c.known));
  }, py::arg("erp"), py::arg("variant"), py::arg("seed") = 0, py::arg("known") = py::none());

  m.def("synthesize", [](const FloatArray& cond, const BoolArray& known, std::shared_ptr<Codebook> codebook,
                         const std::string& predictor, const py::object& truth, const std::vector<FloatArray>& corpus,
                         int low_height, int height, int nfov_size, int steps, double temperature, std::uint64_t seed,
                         int threads) {
    PipelineConfig cfg;
    cfg.codebook = std::move(codebook);
    cfg.low_height = low_height;
    cfg.high_height = height;
    cfg.nfov_size = nfov_size;
    cfg.use_standard_views();
    cfg.steps = steps;
    cfg.temperature = temperature;
    cfg.seed = seed;
    cfg.threads = threads;
    std::optional<Image> truth_img;
    if (!truth.is_none()) truth_img = to_image(truth.cast<FloatArray>());
    const auto corpus_imgs = to_images(corpus);
    const Image cond_img = to_image(cond);
    const Mask known_mask = to_mask(known);
    py::gil_scoped_release release;
    const StagePredictors p =
        make_predictors(parse_predictor_kind(predictor), corpus_imgs, truth_img ? &*truth_img : nullptr, cfg);
    cfg.stage1_predictor = p.stage1;
    cfg.stage2_predictor = p.stage2;
    const SynthesisResult r = synthesize(cond_img, known_mask, cfg);
    py::gil_scoped_acquire acquire;
    return py::make_tuple(from_image(r.stage2.image), from_image(r.stage1.image));
  }, py::arg("cond"), py::arg("known"), py::arg("codebook"), py::arg("predictor") = "oracle",
        py::arg("truth") = py::none(), py::arg("corpus") = std::vector<FloatArray>{}, py::arg("low_height") = 256,
        py::arg("height") = 1024, py::arg("nfov_size") = 256, py::arg("steps") = 16, py::arg("temperature") = 1.0,
        py::arg("seed") = 0, py::arg("threads") = 0);

  m.def("metrics", [](const FloatArray& reference, const FloatArray& candidate) {
    const Image ref = to_image(reference);
    return report_dict(compare_images(ref, to_image(candidate), standard_view_set()));
  }, py::arg("reference"), py::arg("candidate"));
  m.def("seam_score", [](const FloatArray& erp) { return seam_score(to_image(erp)); }, py::arg("erp"));
  m.def("reconstruct_compare", [](const FloatArray& erp, std::shared_ptr<Codebook> cb, int nfov_size) {
    const ReconstructionComparison c = reconstruct_compare(to_image(erp), *cb, standard_view_set(60.0, nfov_size));
    py::dict d;
    d["direct"] = report_dict(c.direct);
    d["via_views"] = report_dict(c.via_views);
    return d;
  }, py::arg("erp"), py::arg("codebook"), py::arg("nfov_size") = 256);
}
