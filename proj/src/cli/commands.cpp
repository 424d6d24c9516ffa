#include <chrono>
#include <cstdio>
#include <ctime>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "lesion/cli.hpp"
#include "lesion/codec.hpp"
#include "lesion/error.hpp"
#include "lesion/random.hpp"

namespace lesion::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string_view class_name(int label) { return label == eval::kMelanoma ? "melanoma" : "nevus"; }

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string variant;
  bool reduced = false;
  std::string run_dir;
  bool quiet = false;
};

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.sets, "Override one config key (key=value), repeatable");
  sub->add_option("--seed", c.seed, "Root seed for every random stream");
  sub->add_option("--variant", c.variant, "Feature variant: ive or canny");
  sub->add_flag("--reduced", c.reduced, "Use the 64x64 reduced network");
  sub->add_option("--run-dir", c.run_dir, "Run directory (default: $LESION_RUN_ROOT/<command>-<time>)");
  sub->add_flag("--quiet", c.quiet, "Suppress progress output");
}

RunConfig build_config(const CommonOptions& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) {
    const auto bytes = img::read_file(c.config_path);
    apply_ini(cfg, std::string(bytes.begin(), bytes.end()), c.config_path);
  }
  for (const std::string& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(ErrorKind::ConfigError, "--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  if (!c.variant.empty()) cfg.set("variant", c.variant);
  if (c.reduced) cfg.set("network", "reduced");
  cfg.finalize();
  return cfg;
}

fs::path make_run_dir(const CommonOptions& c, const std::string& command, std::uint64_t seed) {
  fs::path dir;
  if (!c.run_dir.empty()) {
    dir = c.run_dir;
  } else {
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", std::gmtime(&now));
    const fs::path base = default_run_root() / (command + "-" + stamp + "-s" + std::to_string(seed));
    dir = base;
    for (int i = 2; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create run directory " + dir.string() + ": " + ec.message());
  return dir;
}

json dataset_json(const DatasetManifest& m) {
  json entries = json::array();
  for (const ManifestEntry& e : m.entries)
    entries.push_back({{"id", e.id}, {"label", class_name(e.label)}, {"path", e.path.string()}});
  return {{"root", m.root.string()},
          {"fingerprint", hex64(m.fingerprint)},
          {"melanoma", m.count(eval::kMelanoma)},
          {"nevus", m.count(eval::kNevus)},
          {"skipped", m.skipped},
          {"entries", entries}};
}

/// Shared state of one command invocation.
struct Run {
  std::string command;
  std::vector<std::string> argv;
  RunConfig cfg;
  fs::path dir;
  json manifest;
  std::map<std::string, double> timings;
  std::vector<std::string> artifacts;
  const Streams* io = nullptr;
  bool quiet = false;

  void progress(const std::string& msg) const {
    if (!quiet && io->err) io->err(msg);
  }
  void say(const std::string& msg) const {
    if (io->out) io->out(msg);
  }
  fs::path artifact(const std::string& name) {
    artifacts.push_back(name);
    return dir / name;
  }
  template <typename F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings[stage] += std::chrono::duration<double>(Clock::now() - t0).count();
    } else {
      auto r = f();
      timings[stage] += std::chrono::duration<double>(Clock::now() - t0).count();
      return r;
    }
  }

  void write_manifest(const std::string& status) {
    json m;
    m["command"] = command;
    m["argv"] = argv;
    m["status"] = status;
    m["config"] = cfg.values();
    m["seeds"] = {{"root", cfg.cv.seed},
                  {"streams", {"folds", "init", "shuffle", "augment"}},
                  {"train_shuffle", cfg.cv.train.rng_seed}};
    m["network"] = {{"fingerprint", hex64(cfg.cv.network.fingerprint())},
                    {"layers", cfg.cv.network.describe()}};
    for (auto it = manifest.begin(); it != manifest.end(); ++it) m[it.key()] = it.value();
    m["timings_seconds"] = timings;
    m["artifacts"] = artifacts;
    eval::write_text(dir / "manifest.json", m.dump(2) + "\n");
  }
};

std::vector<eval::PreparedSample> prepare_dataset(Run& run, const DatasetManifest& data) {
  run.progress("preprocessing " + std::to_string(data.entries.size()) + " images");
  return run.timed("preprocess", [&] { return eval::prepare(data.samples(), run.cfg.cv.preprocess); });
}

DatasetManifest ingest_logged(Run& run, const std::string& root) {
  DatasetManifest m = run.timed("ingest", [&] { return ingest(root); });
  for (const std::string& s : m.skipped) run.progress("warning: skipped " + s);
  run.manifest["dataset"] = dataset_json(m);
  return m;
}

json folds_json(const eval::CrossvalResult& r) {
  json folds = json::array();
  for (const eval::FoldRecord& f : r.folds) {
    json history = json::array();
    for (const nn::EpochStats& s : f.history) history.push_back({{"loss", s.mean_loss}, {"accuracy", s.accuracy}});
    folds.push_back({{"test", f.test_ids},
                     {"train", f.train_ids},
                     {"training_items", f.training_items},
                     {"predictions", f.predictions},
                     {"labels", f.labels},
                     {"history", history}});
  }
  return folds;
}

void cmd_ingest(Run& run, const std::string& root) {
  const DatasetManifest m = ingest_logged(run, root);
  run.say(std::to_string(m.entries.size()) + " images (" + std::to_string(m.count(eval::kMelanoma)) +
          " melanoma, " + std::to_string(m.count(eval::kNevus)) + " nevus), " +
          std::to_string(m.skipped.size()) + " skipped, fingerprint " + hex64(m.fingerprint));
}

void cmd_preprocess(Run& run, const std::string& image, bool dump) {
  const auto& pc = run.cfg.cv.preprocess;
  const RasterImage decoded = run.timed("decode", [&] { return img::read_image(image); });
  pipeline::Preprocessed p = run.timed("segment", [&] { return pipeline::segment_lesion(decoded, pc, dump); });
  const RasterImage feature =
      run.timed("feature", [&] { return pipeline::feature_image(p.sla, run.cfg.cv.variant, pc); });
  img::write_png(p.sla, run.artifact("sla.png"));
  img::write_png(feature, run.artifact(std::string(pipeline::to_string(run.cfg.cv.variant)) + ".png"));
  if (dump) {
    pipeline::trace_features(p, pc);
    for (std::size_t i = 0; i < p.trace.size(); ++i) {
      char prefix[8];
      std::snprintf(prefix, sizeof prefix, "%02zu_", i);
      img::write_png(p.trace[i].image,
                     run.artifact("stages/" + std::string(prefix) +
                                  std::string(pipeline::to_string(p.trace[i].stage)) + ".png"));
    }
  }
  run.manifest["image"] = image;
  run.manifest["otsu_threshold"] = p.otsu_threshold;
  run.manifest["lesion_pixels"] = p.mask.count();
  run.say("otsu threshold " + std::to_string(p.otsu_threshold) + ", lesion pixels " +
          std::to_string(p.mask.count()) + ", outputs in " + run.dir.string());
}

void cmd_train(Run& run, const std::string& root, std::string weights_out) {
  const DatasetManifest m = ingest_logged(run, root);
  const auto data = prepare_dataset(run, m);
  const auto& cv = run.cfg.cv;
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto items = run.timed("augment_and_features", [&] { return eval::build_training_set(data, all, cv); });
  nn::LabeledSet set;
  for (const auto& item : items) {
    set.inputs.push_back(eval::to_input(item.feature));
    set.labels.push_back(item.label);
  }
  nn::Network net = nn::build_network(cv.network, derive_stream(cv.seed, "init").next());
  run.progress("training on " + std::to_string(items.size()) + " items, " +
               std::to_string(net.parameter_count()) + " parameters");
  json history = json::array();
  run.timed("train", [&] {
    nn::train(net, set, cv.train, [&](int epoch, const nn::EpochStats& s) {
      history.push_back({{"loss", s.mean_loss}, {"accuracy", s.accuracy}});
      run.progress("epoch " + std::to_string(epoch + 1) + " loss " + fixed(s.mean_loss, 4) + " acc " +
                   fixed(s.accuracy, 4));
      return true;
    });
  });
  const fs::path out = weights_out.empty() ? run.artifact("weights.bin") : fs::path(weights_out);
  if (!weights_out.empty()) run.artifacts.push_back(out.string());
  img::write_file(out, nn::save_weights(net));
  run.manifest["history"] = history;
  run.manifest["weights"] = out.string();
  run.say("weights written to " + out.string());
}

void cmd_crossval(Run& run, const std::string& root) {
  const DatasetManifest m = ingest_logged(run, root);
  const auto data = prepare_dataset(run, m);
  const eval::CrossvalResult r =
      eval::crossval_run(data, run.cfg.cv, [&](const std::string& s) { run.progress(s); });
  for (const auto& [k, v] : r.timings) run.timings[k] += v;
  const std::string stem = "metrics_" + std::string(pipeline::to_string(run.cfg.cv.variant));
  const std::string title = run.cfg.cv.variant == pipeline::Variant::Ive ? "IVE with CNN" : "Canny edge detection with CNN";
  const auto files = eval::write_metrics_report(r.report, run.dir, stem, title);
  run.artifacts.push_back(files.csv.filename().string());
  run.artifacts.push_back(files.svg.filename().string());
  run.manifest["folds"] = folds_json(r);
  run.say(eval::render_metrics_csv(r.report));
}

void cmd_predict(Run& run, const std::string& weights, const std::string& image) {
  const auto bytes = img::read_file(weights);
  nn::Network net = nn::load_weights(bytes, run.cfg.cv.network);
  const auto& pc = run.cfg.cv.preprocess;
  const RasterImage feature = run.timed("preprocess", [&] {
    const auto p = pipeline::segment_lesion(img::read_image(image), pc);
    return pipeline::feature_image(p.sla, run.cfg.cv.variant, pc);
  });
  const nn::Tensor probs = run.timed("predict", [&] { return nn::predict(net, eval::to_input(feature)); });
  const int cls = nn::predicted_class(probs);
  run.manifest["image"] = image;
  run.manifest["weights"] = weights;
  run.manifest["prediction"] = {{"class", class_name(cls)}, {"p_nevus", probs[0]}, {"p_melanoma", probs[1]}};
  run.say(std::string(class_name(cls)) + " p(nevus)=" + fixed(probs[0], 6) +
          " p(melanoma)=" + fixed(probs[1], 6));
}

void cmd_histogram(Run& run, const std::vector<std::string>& images) {
  const auto& pc = run.cfg.cv.preprocess;
  std::vector<std::pair<std::string, RasterImage>> stages;
  for (const std::string& path : images) {
    pipeline::Preprocessed p = run.timed("preprocess", [&] {
      auto r = pipeline::segment_lesion(img::read_image(path), pc, true);
      pipeline::trace_features(r, pc);
      return r;
    });
    const std::string stem = fs::path(path).stem().string();
    for (auto s : {pipeline::Stage::ResizedGfi, pipeline::Stage::Canny, pipeline::Stage::UnsignedIntensity,
                   pipeline::Stage::Ive})
      stages.emplace_back(stem + ":" + std::string(pipeline::to_string(s)), *p.find(s));
  }
  const auto report = ive::compare_histograms(stages);
  const auto files = eval::write_histogram_report(report, run.dir, "histogram", "Lesion histogram comparison");
  run.artifacts.push_back(files.csv.filename().string());
  run.artifacts.push_back(files.svg.filename().string());
  run.say(std::to_string(report.entries.size()) + " histograms for " + std::to_string(images.size()) +
          (images.size() == 1 ? " image in " : " images in ") + run.dir.string());
}

void cmd_sweep(Run& run, const std::string& root, const std::string& grid) {
  const std::vector<double> thresholds = parse_grid(grid);
  const DatasetManifest m = ingest_logged(run, root);
  const auto data = prepare_dataset(run, m);
  const auto points = run.timed("sweep", [&] {
    return eval::sweep_threshold(data, run.cfg.cv, thresholds, [&](const std::string& s) { run.progress(s); });
  });
  const std::string csv = eval::render_sweep_csv(points);
  eval::write_text(run.artifact("sweep.csv"), csv);
  run.manifest["grid"] = thresholds;
  run.say(csv);
}

int report_error(const Streams& io, std::string_view kind, const std::string& message, int code) {
  if (io.err) io.err(json{{"error", {{"kind", kind}, {"message", message}}}}.dump());
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, const Streams& io) {
  CLI::App app{"Melanoma/nevus classification with intensity value estimation and a CNN", "lesion"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string dataset, image, weights, weights_out, grid;
  std::vector<std::string> images;
  bool dump = false;

  auto* ingest_cmd = app.add_subcommand("ingest", "Scan a dataset directory");
  ingest_cmd->add_option("--dataset", dataset, "Root with melanoma/ and naevus/")->required();
  auto* pre_cmd = app.add_subcommand("preprocess", "Segment one image and compute its feature map");
  pre_cmd->add_option("--image", image, "Input photograph")->required();
  pre_cmd->add_flag("--dump-stages", dump, "Write every intermediate stage as PNG");
  auto* train_cmd = app.add_subcommand("train", "Train on a whole dataset and save weights");
  train_cmd->add_option("--dataset", dataset, "Root with melanoma/ and naevus/")->required();
  train_cmd->add_option("--weights-out", weights_out, "Weight file (default: run directory)");
  auto* cv_cmd = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  cv_cmd->add_option("--dataset", dataset, "Root with melanoma/ and naevus/")->required();
  auto* predict_cmd = app.add_subcommand("predict", "Classify one image");
  predict_cmd->add_option("--weights", weights, "Weight file written by train")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--image", image, "Input photograph")->required();
  auto* hist_cmd = app.add_subcommand("histogram", "Stage histograms for one or more images");
  hist_cmd->add_option("--image", images, "Input photograph, repeatable")->required();
  auto* sweep_cmd = app.add_subcommand("sweep-threshold", "Cross-validated accuracy per IVE threshold");
  sweep_cmd->add_option("--dataset", dataset, "Root with melanoma/ and naevus/")->required();
  sweep_cmd->add_option("--grid", grid, "start:stop:step")->required();
  for (auto* sub : app.get_subcommands({})) add_common(sub, common);

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      if (io.out) io.out(app.help());
      return 0;
    }
    return report_error(io, "ConfigError", e.what(), 2);
  }

  Run run;
  run.io = &io;
  run.argv = args;
  run.quiet = common.quiet;
  run.command = app.get_subcommands().front()->get_name();
  try {
    run.cfg = build_config(common);
    run.dir = make_run_dir(common, run.command, run.cfg.cv.seed);
    eval::write_text(run.dir / "config.ini", render_ini(run.cfg));
    run.artifacts.push_back("config.ini");

    if (run.command == "ingest") cmd_ingest(run, dataset);
    else if (run.command == "preprocess") cmd_preprocess(run, image, dump);
    else if (run.command == "train") cmd_train(run, dataset, weights_out);
    else if (run.command == "crossval") cmd_crossval(run, dataset);
    else if (run.command == "predict") cmd_predict(run, weights, image);
    else if (run.command == "histogram") cmd_histogram(run, images);
    else cmd_sweep(run, dataset, grid);

    run.write_manifest("ok");
    return 0;
  } catch (const Error& e) {
    run.manifest["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    if (!run.dir.empty()) {
      try {
        run.write_manifest("failed");
      } catch (const Error&) {
      }
    }
    return report_error(io, to_string(e.kind()), e.what(), e.kind() == ErrorKind::ConfigError ? 2 : 1);
  } catch (const std::exception& e) {
    return report_error(io, "InternalError", e.what(), 1);
  }
}

}  // namespace lesion::cli
