#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "json.hpp"
#include "lesion/cli.hpp"
#include "lesion/codec.hpp"
#include "synthetic.hpp"

using namespace lesion;
using namespace lesion::cli;
using lesion::testing::expect_error;
using lesion::testing::fresh_temp_dir;
using nlohmann::json;

namespace {

struct Captured {
  std::string out, err;
  int code = -1;
};

Captured invoke(std::vector<std::string> args) {
  Captured c;
  args.insert(args.begin(), "lesion");
  c.code = run(args, {[&](const std::string& s) { c.out += s + "\n"; },
                      [&](const std::string& s) { c.err += s + "\n"; }});
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

// Small synthetic dataset shared by the command tests.
const fs::path& dataset() {
  static const fs::path root = [] {
    fs::path r = fresh_temp_dir("cli_dataset");
    lesion::testing::write_synthetic_dataset(r, 5, 5, 80, 11);
    return r;
  }();
  return root;
}

// Quick reduced-spec settings for commands that train.
std::vector<std::string> fast() {
  return {"--reduced", "--quiet", "--set", "train.epochs=1", "--set", "augment.multiplier=1",
          "--set", "train.batch_size=8"};
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

// ---- config -----------------------------------------------------------------------------

TEST(Config, Defaults) {
  RunConfig cfg;
  cfg.finalize();
  EXPECT_EQ(cfg.cv.network, nn::full_spec());
  EXPECT_EQ(cfg.cv.preprocess.image.canvas_rows, 256);
  EXPECT_EQ(cfg.cv.folds, 5);
  EXPECT_EQ(cfg.cv.train.epochs, 40);
  EXPECT_DOUBLE_EQ(cfg.cv.preprocess.image.gaussian_sigma, 1.35);
  EXPECT_EQ(cfg.cv.variant, pipeline::Variant::Ive);
}

TEST(Config, ReducedFollowsNetworkInput) {
  RunConfig cfg;
  cfg.set("network", "reduced");
  cfg.finalize();
  EXPECT_EQ(cfg.cv.network, nn::reduced_spec());
  EXPECT_EQ(cfg.cv.preprocess.image.canvas_rows, 64);
  EXPECT_EQ(cfg.cv.preprocess.image.canvas_cols, 64);
}

TEST(Config, IniRoundTripReproducesEveryValue) {
  RunConfig cfg;
  cfg.set("seed", "1234567890123");
  cfg.set("ive.threshold", "133.7");
  cfg.set("image.gaussian_sigma", "0.1");
  cfg.set("augment.stage", "feature");
  cfg.set("segment.polarity", "bright");
  cfg.set("augment.vertical_flip", "false");
  cfg.set("train.learning_rate", "0.00031");
  cfg.set("variant", "canny");
  cfg.finalize();
  RunConfig back;
  apply_ini(back, render_ini(cfg));
  back.finalize();
  EXPECT_EQ(back.values(), cfg.values());
  EXPECT_EQ(back.cv.preprocess.ive.threshold, 133.7);
  EXPECT_EQ(back.cv.train.adam.learning_rate, 0.00031);
  EXPECT_EQ(back.cv.augment_stage, eval::AugmentStage::Feature);
  EXPECT_EQ(back.cv.seed, 1234567890123u);
  std::size_t keys = 0;
  for (const auto& [k, v] : cfg.values()) {
    ++keys;
    EXPECT_NO_THROW(RunConfig{}.set(k, v)) << k;
  }
  EXPECT_EQ(keys, RunConfig::keys().size());
}

TEST(Config, IniSectionsAndComments) {
  RunConfig cfg;
  apply_ini(cfg, "# top\nseed = 9\n\n[ive]\nthreshold = 100\n; note\n[train]\nepochs=3\n");
  cfg.finalize();
  EXPECT_EQ(cfg.cv.seed, 9u);
  EXPECT_EQ(cfg.cv.preprocess.ive.threshold, 100.0);
  EXPECT_EQ(cfg.cv.train.epochs, 3);
  // Comments are whole lines only; trailing text makes the value invalid.
  expect_error(ErrorKind::ConfigError, [&] { apply_ini(cfg, "[ive]\nthreshold = 100 ; note\n"); });
}

TEST(Config, UnknownKeysAndBadValuesAreRejected) {
  RunConfig cfg;
  expect_error(ErrorKind::ConfigError, [&] { cfg.set("ive.treshold", "1"); });
  expect_error(ErrorKind::ConfigError, [&] { cfg.set("train.epochs", "many"); });
  expect_error(ErrorKind::ConfigError, [&] { cfg.set("train.epochs", "3.5"); });
  expect_error(ErrorKind::ConfigError, [&] { cfg.set("variant", "sobel"); });
  expect_error(ErrorKind::ConfigError, [&] { cfg.set("augment.horizontal_flip", "maybe"); });
  try {
    apply_ini(cfg, "seed = 1\nbogus = 2\n", "run.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    EXPECT_NE(std::string(e.what()).find("run.ini:2"), std::string::npos) << e.what();
  }
  expect_error(ErrorKind::ConfigError, [&] { apply_ini(cfg, "[ive\n"); });
  expect_error(ErrorKind::ConfigError, [&] { apply_ini(cfg, "just words\n"); });
  RunConfig invalid;
  invalid.set("ive.threshold", "300");
  expect_error(ErrorKind::ConfigError, [&] { invalid.finalize(); });
}

TEST(Config, GridParsing) {
  const auto g = parse_grid("64:192:16");
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g.front(), 64.0);
  EXPECT_EQ(g.back(), 192.0);
  EXPECT_EQ(parse_grid("100:100:5"), std::vector<double>{100.0});
  EXPECT_EQ(parse_grid("0:1:0.25").size(), 5u);
  expect_error(ErrorKind::ConfigError, [] { parse_grid("64:192"); });
  expect_error(ErrorKind::ConfigError, [] { parse_grid("64:192:0"); });
  expect_error(ErrorKind::ConfigError, [] { parse_grid("192:64:16"); });
  expect_error(ErrorKind::ConfigError, [] { parse_grid("a:b:c"); });
}

TEST(Config, RunRootFromEnvironment) {
  ::setenv("LESION_RUN_ROOT", "/tmp/elsewhere", 1);
  EXPECT_EQ(default_run_root(), fs::path("/tmp/elsewhere"));
  ::unsetenv("LESION_RUN_ROOT");
  EXPECT_EQ(default_run_root(), fs::path("runs"));
}

// ---- ingest -----------------------------------------------------------------------------

TEST(Ingest, CountsReadableImages) {
  const fs::path root = fresh_temp_dir("ingest_small");
  lesion::testing::write_synthetic_dataset(root, 2, 3, 24, 1);
  const DatasetManifest m = ingest(root);
  EXPECT_EQ(m.entries.size(), 5u);
  EXPECT_EQ(m.count(eval::kMelanoma), 2u);
  EXPECT_EQ(m.count(eval::kNevus), 3u);
  EXPECT_TRUE(m.skipped.empty());
  for (std::size_t i = 1; i < m.entries.size(); ++i) EXPECT_LT(m.entries[i - 1].id, m.entries[i].id);
  EXPECT_EQ(ingest(root).fingerprint, m.fingerprint);
  EXPECT_EQ(m.samples().size(), 5u);
}

TEST(Ingest, SkipsUnreadableFilesAndIgnoresOthers) {
  const fs::path root = fresh_temp_dir("ingest_skip");
  lesion::testing::write_synthetic_dataset(root, 2, 2, 24, 2);
  const auto before = ingest(root).fingerprint;
  std::ofstream(root / "melanoma" / "broken.jpg") << "not a jpeg";
  std::ofstream(root / "naevus" / "notes.txt") << "ignored";
  const DatasetManifest m = ingest(root);
  EXPECT_EQ(m.entries.size(), 4u);
  ASSERT_EQ(m.skipped.size(), 1u);
  EXPECT_NE(m.skipped[0].find("broken.jpg"), std::string::npos);
  EXPECT_EQ(m.fingerprint, before);
}

TEST(Ingest, AcceptsNevusSpelling) {
  const fs::path root = fresh_temp_dir("ingest_alias");
  lesion::testing::write_synthetic_dataset(root, 1, 1, 24, 3);
  fs::rename(root / "naevus", root / "nevus");
  EXPECT_EQ(ingest(root).count(eval::kNevus), 1u);
}

TEST(Ingest, Failures) {
  expect_error(ErrorKind::IoError, [] { ingest("/nonexistent/lesion/root"); });
  const fs::path root = fresh_temp_dir("ingest_missing");
  lesion::testing::write_synthetic_dataset(root, 2, 2, 24, 4);
  fs::remove_all(root / "naevus");
  expect_error(ErrorKind::EmptyDataset, [&] { ingest(root); });
  fs::create_directories(root / "naevus");
  std::ofstream(root / "naevus" / "bad.jpg") << "x";
  expect_error(ErrorKind::EmptyDataset, [&] { ingest(root); });
}

TEST(Ingest, FingerprintTracksContent) {
  const fs::path a = fresh_temp_dir("ingest_fp_a"), b = fresh_temp_dir("ingest_fp_b");
  lesion::testing::write_synthetic_dataset(a, 2, 2, 24, 5);
  lesion::testing::write_synthetic_dataset(b, 2, 2, 24, 6);
  EXPECT_NE(ingest(a).fingerprint, ingest(b).fingerprint);
}

// ---- commands ---------------------------------------------------------------------------

TEST(Run, HelpAndUsageErrors) {
  const Captured help = invoke({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("crossval"), std::string::npos);
  EXPECT_NE(help.out.find("sweep-threshold"), std::string::npos);

  const Captured none = invoke({});
  EXPECT_EQ(none.code, 2);
  EXPECT_EQ(json::parse(none.err)["error"]["kind"], "ConfigError");

  const Captured unknown = invoke({"frobnicate"});
  EXPECT_EQ(unknown.code, 2);
  const Captured missing = invoke({"crossval"});
  EXPECT_EQ(missing.code, 2);
}

TEST(Run, UnknownConfigKeyIsAStructuredError) {
  const fs::path dir = fresh_temp_dir("run_badkey");
  const Captured c = invoke({"ingest", "--dataset", dataset().string(), "--run-dir", dir.string(), "--set",
                             "ive.treshold=3"});
  EXPECT_EQ(c.code, 2);
  const json err = json::parse(c.err);
  EXPECT_EQ(err["error"]["kind"], "ConfigError");
  EXPECT_NE(err["error"]["message"].get<std::string>().find("ive.treshold"), std::string::npos);
}

TEST(Run, StageErrorsExitNonzeroAndRecordTheFailure) {
  const fs::path dir = fresh_temp_dir("run_fail");
  const Captured c = invoke({"ingest", "--dataset", "/nonexistent/x", "--run-dir", dir.string()});
  EXPECT_EQ(c.code, 1);
  EXPECT_EQ(json::parse(c.err)["error"]["kind"], "IoError");
  const json m = manifest(dir);
  EXPECT_EQ(m["status"], "failed");
  EXPECT_EQ(m["error"]["kind"], "IoError");
}

TEST(Run, IngestWritesManifest) {
  const fs::path dir = fresh_temp_dir("run_ingest");
  const Captured c = invoke({"ingest", "--dataset", dataset().string(), "--run-dir", dir.string(), "--seed", "7"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(c.out.find("10 images (5 melanoma, 5 nevus)"), std::string::npos) << c.out;
  const json m = manifest(dir);
  EXPECT_EQ(m["command"], "ingest");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["seeds"]["root"], 7);
  EXPECT_EQ(m["config"]["seed"], "7");
  EXPECT_EQ(m["dataset"]["entries"].size(), 10u);
  EXPECT_EQ(m["dataset"]["fingerprint"].get<std::string>().size(), 16u);
  EXPECT_TRUE(m.contains("timings_seconds"));
  EXPECT_TRUE(fs::exists(dir / "config.ini"));
}

TEST(Run, DefaultRunDirectoryUnderEnvironmentRoot) {
  const fs::path root = fresh_temp_dir("run_root");
  ::setenv("LESION_RUN_ROOT", root.c_str(), 1);
  const Captured a = invoke({"ingest", "--dataset", dataset().string(), "--quiet"});
  const Captured b = invoke({"ingest", "--dataset", dataset().string(), "--quiet"});
  ::unsetenv("LESION_RUN_ROOT");
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  std::size_t runs = 0;
  for (const auto& e : fs::directory_iterator(root)) {
    ++runs;
    EXPECT_EQ(e.path().filename().string().rfind("ingest-", 0), 0u);
    EXPECT_TRUE(fs::exists(e.path() / "manifest.json"));
  }
  EXPECT_EQ(runs, 2u);
}

TEST(Run, PreprocessDumpsEveryStage) {
  const fs::path dir = fresh_temp_dir("run_pre");
  const fs::path image = dataset() / "melanoma" / "mel_0.jpg";
  const Captured c = invoke({"preprocess", "--image", image.string(), "--run-dir", dir.string(), "--reduced",
                             "--dump-stages", "--variant", "canny"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_TRUE(fs::exists(dir / "sla.png"));
  EXPECT_TRUE(fs::exists(dir / "canny.png"));
  std::size_t stages = 0;
  for (const auto& e : fs::directory_iterator(dir / "stages")) {
    ++stages;
    EXPECT_EQ(e.path().extension(), ".png");
  }
  EXPECT_EQ(stages, 14u);
  EXPECT_TRUE(fs::exists(dir / "stages" / "12_ive.png"));
  const RasterImage sla = img::read_image(dir / "sla.png");
  EXPECT_EQ(sla.width(), 64);
  EXPECT_GT(manifest(dir)["lesion_pixels"].get<int>(), 0);
}

TEST(Run, TrainThenPredict) {
  const fs::path tdir = fresh_temp_dir("run_train"), pdir = fresh_temp_dir("run_predict");
  const Captured t = invoke(with({"train", "--dataset", dataset().string(), "--run-dir", tdir.string()}, fast()));
  ASSERT_EQ(t.code, 0) << t.err;
  ASSERT_TRUE(fs::exists(tdir / "weights.bin"));
  EXPECT_EQ(manifest(tdir)["history"].size(), 1u);

  const fs::path image = dataset() / "naevus" / "nev_1.jpg";
  const Captured p = invoke({"predict", "--weights", (tdir / "weights.bin").string(), "--image",
                             image.string(), "--reduced", "--run-dir", pdir.string()});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_TRUE(p.out.rfind("melanoma p(nevus)=", 0) == 0 || p.out.rfind("nevus p(nevus)=", 0) == 0) << p.out;
  const json pred = manifest(pdir)["prediction"];
  EXPECT_NEAR(pred["p_nevus"].get<double>() + pred["p_melanoma"].get<double>(), 1.0, 1e-6);

  // Weights trained for the reduced network do not load into the full one.
  const Captured wrong = invoke({"predict", "--weights", (tdir / "weights.bin").string(), "--image",
                                 image.string(), "--run-dir", fresh_temp_dir("run_predict_bad").string()});
  EXPECT_EQ(wrong.code, 1);
  EXPECT_EQ(json::parse(wrong.err)["error"]["kind"], "SpecMismatch");
}

TEST(Run, CrossvalIsReproducibleFromItsRunDirectory) {
  const fs::path a = fresh_temp_dir("run_cv_a"), b = fresh_temp_dir("run_cv_b");
  const Captured first =
      invoke(with({"crossval", "--dataset", dataset().string(), "--run-dir", a.string(), "--seed", "3"}, fast()));
  ASSERT_EQ(first.code, 0) << first.err;
  const std::string csv = slurp(a / "metrics_ive.csv");
  EXPECT_EQ(csv.rfind("Metric,Fold-1,Fold-2,Fold-3,Fold-4,Fold-5,Average\n", 0), 0u);
  EXPECT_TRUE(fs::exists(a / "metrics_ive.svg"));
  const json m = manifest(a);
  EXPECT_EQ(m["folds"].size(), 5u);
  EXPECT_EQ(m["network"]["layers"], nn::reduced_spec().describe());

  // Re-execute from the recorded config alone.
  const Captured second = invoke({"crossval", "--dataset", dataset().string(), "--run-dir", b.string(),
                                  "--config", (a / "config.ini").string(), "--quiet"});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(slurp(b / "metrics_ive.csv"), csv);
  EXPECT_EQ(manifest(b)["dataset"]["fingerprint"], m["dataset"]["fingerprint"]);
}

TEST(Run, HistogramAndSweep) {
  const fs::path hdir = fresh_temp_dir("run_hist"), sdir = fresh_temp_dir("run_sweep");
  const Captured h = invoke({"histogram", "--image", (dataset() / "melanoma" / "mel_0.jpg").string(), "--image",
                             (dataset() / "naevus" / "nev_0.jpg").string(), "--reduced", "--run-dir",
                             hdir.string()});
  ASSERT_EQ(h.code, 0) << h.err;
  const std::string csv = slurp(hdir / "histogram.csv");
  EXPECT_NE(csv.find("mel_0:ive,"), std::string::npos);
  EXPECT_NE(csv.find("nev_0:canny,255,"), std::string::npos);
  EXPECT_TRUE(fs::exists(hdir / "histogram.svg"));

  const Captured s = invoke(
      with({"sweep-threshold", "--dataset", dataset().string(), "--grid", "100:140:40", "--run-dir", sdir.string()},
           fast()));
  ASSERT_EQ(s.code, 0) << s.err;
  const std::string sweep = slurp(sdir / "sweep.csv");
  EXPECT_EQ(sweep.rfind("threshold,accuracy\n100.0000,", 0), 0u) << sweep;
  EXPECT_NE(sweep.find("\n140.0000,"), std::string::npos);
}
