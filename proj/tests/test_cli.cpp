#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "odis/codebook.hpp"
#include "odis/geometry.hpp"
#include "odis/image.hpp"
#include "test_support.hpp"

using namespace odis;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "odis");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& path) { return path.string(); }

class CliFlow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir = fixtures::scratch_dir("cli");
    fs::create_directories(dir / "corpus");
    for (int s = 0; s < 3; ++s) {
      const auto out = p(dir / "corpus" / ("s" + std::to_string(s) + ".png"));
      ASSERT_EQ(run({"render-scene", "--seed", std::to_string(s), "--height", "64", "--supersample", "1", "--out", out}).code, 0);
    }
    ASSERT_EQ(run({"train-codebook", "--images", p(dir / "corpus"), "--k", "24", "--patch", "8", "--seed", "7", "--out",
                   p(dir / "cb.bin")})
                  .code,
              0);
  }
  static fs::path dir;
};

fs::path CliFlow::dir;

}  // namespace

TEST(Cli, DirectionsCsv) {
  const Result r = run({"directions"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  const auto dirs = rhombicuboctahedron_directions();
  int n = 0;
  while (std::getline(in, line)) {
    int idx;
    double x, y, z;
    ASSERT_EQ(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &idx, &x, &y, &z), 4) << line;
    EXPECT_EQ(idx, n);
    EXPECT_EQ(x, dirs[std::size_t(n)].x());
    EXPECT_EQ(y, dirs[std::size_t(n)].y());
    EXPECT_EQ(z, dirs[std::size_t(n)].z());
    ++n;
  }
  EXPECT_EQ(n, 26);
}

TEST(Cli, HelpOnEverySubcommandExitsZero) {
  EXPECT_EQ(run({"--help"}).code, 0);
  for (const char* sub : {"directions", "extract", "project", "blend", "embed", "train-codebook", "encode", "decode", "mask",
                          "sample", "synthesize", "reconstruct-compare", "metrics", "render-scene"}) {
    const Result r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << sub;
  }
}

TEST(Cli, UsageErrors) {
  const Result unknown = run({"frobnicate"});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_FALSE(unknown.err.empty());
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"extract", "--in", "x.png"}).code, 1);
  EXPECT_EQ(run({"extract", "--in", "x.png", "--out", "y.png", "--dir", "26"}).code, 1);
}

TEST(Cli, MissingCodebookIsDataError) {
  const auto dir = fixtures::scratch_dir("cli_missing");
  write_png(dir / "c.png", Image(64, 32, 3, 0.5f));
  write_png(dir / "m.png", Image(64, 32, 3, 1.0f));
  const std::string cb = p(dir / "no_such_codebook.bin");
  const Result r = run({"synthesize", "--cond", p(dir / "c.png"), "--mask", p(dir / "m.png"), "--codebook", cb, "--out",
                        p(dir / "o.png")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(cb), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "o.png"));
}

TEST_F(CliFlow, ExtractProjectRoundTrip) {
  const auto pano = p(dir / "corpus" / "s0.png");
  ASSERT_EQ(run({"extract", "--in", pano, "--dir", "3", "--size", "32", "--out", p(dir / "v.png")}).code, 0);
  EXPECT_EQ(read_png(dir / "v.png").width(), 32);
  ASSERT_EQ(run({"extract", "--in", pano, "--yaw", "30", "--pitch", "-10", "--fov", "70", "--out", p(dir / "v2.png")}).code, 0);
  ASSERT_EQ(run({"project", "--in", p(dir / "v.png"), "--dir", "3", "--height", "64", "--out", p(dir / "p.png"),
                 "--mask-out", p(dir / "pm.png")})
                .code,
            0);
  const Image mask = read_png(dir / "pm.png");
  EXPECT_EQ(mask.width(), 128);
  EXPECT_GT(image_to_mask(mask).count(), 0u);
}

TEST_F(CliFlow, BlendNeedsAllViews) {
  const auto pano = p(dir / "corpus" / "s1.png");
  std::vector<std::string> args{"blend", "--height", "64", "--out", p(dir / "blend.png"), "--views"};
  for (int k = 0; k < 26; ++k) {
    const auto v = p(dir / ("bv" + std::to_string(k) + ".png"));
    ASSERT_EQ(run({"extract", "--in", pano, "--dir", std::to_string(k), "--size", "32", "--out", v}).code, 0);
    args.push_back(v);
  }
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(read_png(dir / "blend.png").width(), 128);
  args.pop_back();
  EXPECT_EQ(run(args).code, 1);
}

TEST_F(CliFlow, EmbedAndMask) {
  write_png(dir / "nfov.png", fixtures::random_image(40, 30, 3));
  ASSERT_EQ(run({"embed", "--in", p(dir / "nfov.png"), "--height", "64", "--out", p(dir / "e.png"), "--mask",
                 p(dir / "em.png")})
                .code,
            0);
  EXPECT_GT(image_to_mask(read_png(dir / "em.png")).count(), 0u);
  for (const char* v : {"center", "boxes", "ground", "two"}) {
    ASSERT_EQ(run({"mask", "--variant", v, "--seed", "3", "--in", p(dir / "corpus" / "s0.png"), "--out",
                   p(dir / "c1.png"), "--mask-out", p(dir / "m1.png")})
                  .code,
              0)
        << v;
    ASSERT_EQ(run({"mask", "--variant", v, "--seed", "3", "--in", p(dir / "corpus" / "s0.png"), "--out",
                   p(dir / "c2.png"), "--mask-out", p(dir / "m2.png")})
                  .code,
              0);
    EXPECT_EQ(read_png(dir / "c1.png"), read_png(dir / "c2.png")) << v;
    EXPECT_EQ(read_png(dir / "m1.png"), read_png(dir / "m2.png")) << v;
  }
  EXPECT_EQ(run({"mask", "--variant", "sideways", "--in", "a", "--out", "b", "--mask-out", "c"}).code, 1);
}

TEST_F(CliFlow, EncodeDecodeSample) {
  const auto pano = p(dir / "corpus" / "s2.png");
  const Result enc = run({"encode", "--in", pano, "--codebook", p(dir / "cb.bin")});
  ASSERT_EQ(enc.code, 0);
  EXPECT_EQ(enc.out.rfind("codegrid 8 16 24\n", 0), 0u);
  ASSERT_EQ(run({"encode", "--in", pano, "--codebook", p(dir / "cb.bin"), "--out", p(dir / "g.grid")}).code, 0);
  ASSERT_EQ(run({"decode", "--codes", p(dir / "g.grid"), "--codebook", p(dir / "cb.bin"), "--out", p(dir / "d.png")}).code, 0);
  EXPECT_EQ(read_png(dir / "d.png").width(), 128);

  CodeGrid g = load_codegrid(dir / "g.grid");
  const CodeGrid truth = g;
  for (std::size_t i = 0; i < g.size(); i += 2) g[i] = g.mask_code();
  save_codegrid(dir / "masked.grid", g);
  EXPECT_EQ(run({"decode", "--codes", p(dir / "masked.grid"), "--codebook", p(dir / "cb.bin"), "--out", p(dir / "x.png")}).code, 2);
  const Result oracle = run({"sample", "--codes", p(dir / "masked.grid"), "--predictor", "oracle", "--truth", p(dir / "g.grid")});
  ASSERT_EQ(oracle.code, 0);
  std::istringstream in(oracle.out);
  EXPECT_EQ(read_codegrid(in), truth);
  for (const char* pred : {"marginal", "contextcopy"}) {
    const Result a = run({"sample", "--codes", p(dir / "masked.grid"), "--predictor", pred, "--seed", "4", "--T", "8"});
    const Result b = run({"sample", "--codes", p(dir / "masked.grid"), "--predictor", pred, "--seed", "4", "--T", "8",
                          "--corpus", p(dir / "g.grid")});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(a.out.find('M'), std::string::npos);
  }
  EXPECT_EQ(run({"sample", "--codes", p(dir / "masked.grid"), "--predictor", "oracle"}).code, 1);
  EXPECT_EQ(run({"sample", "--codes", p(dir / "missing.grid")}).code, 2);
}

TEST_F(CliFlow, SynthesizeMetricsAndCompare) {
  const auto pano = p(dir / "corpus" / "s0.png");
  ASSERT_EQ(run({"mask", "--variant", "center", "--in", pano, "--out", p(dir / "cond.png"), "--mask-out", p(dir / "mask.png")}).code, 0);
  const std::vector<std::string> base{"synthesize", "--cond", p(dir / "cond.png"), "--mask", p(dir / "mask.png"),
                                      "--codebook", p(dir / "cb.bin"), "--low-height", "32", "--height", "64",
                                      "--nfov-size", "32", "--T", "8", "--seed", "11", "--corpus", p(dir / "corpus")};
  auto with = [&](std::vector<std::string> extra) {
    auto a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  const Result r = run(with({"--out", p(dir / "syn.png"), "--save-stage1", p(dir / "s1.png"), "--save-views", p(dir / "views")}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_png(dir / "syn.png").width(), 128);
  EXPECT_EQ(read_png(dir / "s1.png").width(), 64);
  EXPECT_TRUE(fs::exists(dir / "views" / "v25.png"));
  ASSERT_EQ(run(with({"--out", p(dir / "syn2.png")})).code, 0);
  EXPECT_EQ(read_png(dir / "syn.png"), read_png(dir / "syn2.png"));

  const Result oracle = run({"synthesize", "--cond", p(dir / "cond.png"), "--mask", p(dir / "mask.png"), "--codebook",
                             p(dir / "cb.bin"), "--low-height", "32", "--height", "64", "--nfov-size", "32",
                             "--predictor", "oracle", "--truth", pano, "--out", p(dir / "syn3.png")});
  ASSERT_EQ(oracle.code, 0) << oracle.err;

  const Result m = run({"metrics", "--a", pano, "--b", p(dir / "syn.png"), "--json", p(dir / "m.json")});
  ASSERT_EQ(m.code, 0);
  std::ifstream jf(dir / "m.json");
  const auto j = nlohmann::json::parse(jf);
  for (const char* key : {"global_mse", "pole_mse", "equator_mse", "seam_score", "psnr", "coverage_min", "coverage_max"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(run({"metrics", "--a", pano, "--b", p(dir / "s1.png")}).code, 2);

  const Result rc = run({"reconstruct-compare", "--in", pano, "--codebook", p(dir / "cb.bin"), "--nfov-size", "32",
                         "--report", p(dir / "rc.json")});
  ASSERT_EQ(rc.code, 0) << rc.err;
  std::ifstream rf(dir / "rc.json");
  const auto rj = nlohmann::json::parse(rf);
  EXPECT_TRUE(rj["direct"].contains("pole_mse"));
  EXPECT_TRUE(rj["via_views"].contains("seam_score"));
}

TEST_F(CliFlow, ConfigFileWithFlagOverride) {
  const auto pano = p(dir / "corpus" / "s0.png");
  std::ofstream(dir / "run.cfg") << "# mask settings\nvariant = boxes\nseed = 5\n";
  ASSERT_EQ(run({"--config", p(dir / "run.cfg"), "mask", "--in", pano, "--out", p(dir / "cfg_c.png"), "--mask-out",
                 p(dir / "cfg_m.png")})
                .code,
            0);
  ASSERT_EQ(run({"mask", "--variant", "boxes", "--seed", "5", "--in", pano, "--out", p(dir / "flag_c.png"), "--mask-out",
                 p(dir / "flag_m.png")})
                .code,
            0);
  EXPECT_EQ(read_png(dir / "cfg_m.png"), read_png(dir / "flag_m.png"));
  ASSERT_EQ(run({"--config", p(dir / "run.cfg"), "mask", "--variant", "ground", "--in", pano, "--out", p(dir / "ov_c.png"),
                 "--mask-out", p(dir / "ov_m.png")})
                .code,
            0);
  ASSERT_EQ(run({"mask", "--variant", "ground", "--in", pano, "--out", p(dir / "g_c.png"), "--mask-out", p(dir / "g_m.png")}).code, 0);
  EXPECT_EQ(read_png(dir / "ov_m.png"), read_png(dir / "g_m.png"));
}

TEST_F(CliFlow, TrainCodebookErrors) {
  EXPECT_EQ(run({"train-codebook", "--images", p(dir / "nowhere"), "--out", p(dir / "x.bin")}).code, 2);
  EXPECT_EQ(run({"train-codebook", "--images", p(dir / "corpus"), "--k", "100000", "--patch", "8", "--out", p(dir / "x.bin")}).code, 2);
  EXPECT_FALSE(fs::exists(dir / "x.bin"));
}
