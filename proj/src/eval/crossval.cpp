#include <chrono>
#include <set>
#include <string>

#include "lesion/codec.hpp"
#include "lesion/error.hpp"
#include "lesion/eval.hpp"
#include "lesion/random.hpp"

namespace lesion::eval {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

[[noreturn]] void rethrow_with_fold(const Error& e, std::size_t fold) {
  throw Error(e.kind(), "fold " + std::to_string(fold + 1) + ": " + e.what());
}

}  // namespace

RasterImage load_from_path(const Sample& s) { return img::read_image(s.path); }

void CrossvalConfig::validate() const {
  preprocess.validate();
  augment.validate();
  train.validate();
  const auto& in = network.input_shape;
  if (in.size() != 3 || in[0] != static_cast<std::size_t>(preprocess.image.canvas_rows) ||
      in[1] != static_cast<std::size_t>(preprocess.image.canvas_cols) || in[2] != 1)
    fail(ErrorKind::ConfigError, "network input " + nn::to_string(in) +
                                     " does not match the canvas " +
                                     std::to_string(preprocess.image.canvas_rows) + "x" +
                                     std::to_string(preprocess.image.canvas_cols) + "x1");
  network.propagate();
  if (folds < 2) fail(ErrorKind::ConfigError, "folds must be >= 2");
}

std::vector<PreparedSample> prepare(const std::vector<Sample>& samples,
                                    const pipeline::PreprocessConfig& cfg,
                                    const ImageLoader& loader) {
  std::vector<PreparedSample> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    try {
      out.push_back({s, pipeline::segment_lesion(loader(s), cfg).sla});
    } catch (const Error& e) {
      throw Error(e.kind(), "sample " + s.id + ": " + e.what());
    }
  }
  return out;
}

nn::Tensor to_input(const RasterImage& feature) {
  if (feature.channels() != 1) fail(ErrorKind::ChannelError, "network input must be single-channel");
  std::vector<float> data(feature.data().begin(), feature.data().end());
  for (float& v : data) v /= 255.0f;
  return nn::Tensor({static_cast<std::size_t>(feature.height()),
                     static_cast<std::size_t>(feature.width()), 1},
                    std::move(data));
}

std::vector<TrainingItem> build_training_set(const std::vector<PreparedSample>& data,
                                             std::span<const std::size_t> indices,
                                             const CrossvalConfig& cfg) {
  std::vector<TrainingItem> items;
  items.reserve(indices.size() * static_cast<std::size_t>(1 + cfg.augment.multiplier));
  for (std::size_t idx : indices) {
    const PreparedSample& p = data.at(idx);
    items.push_back({p.sample.id, p.sample.label, false,
                     pipeline::feature_image(p.sla, cfg.variant, cfg.preprocess)});
    // The augmentation stream is keyed by the sample's dataset index, so a
    // sample gets the same copies whichever fold it trains in.
    if (cfg.augment_stage == AugmentStage::Sla) {
      for (RasterImage& a : aug::augment_sample(p.sla, cfg.augment, idx))
        items.push_back({p.sample.id, p.sample.label, true,
                         pipeline::feature_image(a, cfg.variant, cfg.preprocess)});
    } else {
      for (RasterImage& a : aug::augment_sample(items.back().feature, cfg.augment, idx))
        items.push_back({p.sample.id, p.sample.label, true, std::move(a)});
    }
  }
  return items;
}

void assert_no_leakage(const std::vector<TrainingItem>& train,
                       const std::vector<PreparedSample>& data,
                       std::span<const std::size_t> test_indices) {
  std::set<std::string> test_ids;
  for (std::size_t idx : test_indices) test_ids.insert(data.at(idx).sample.id);
  for (const TrainingItem& item : train)
    if (test_ids.count(item.source_id))
      fail(ErrorKind::InvalidArgument,
           "leakage: training item derived from test sample " + item.source_id);
}

CrossvalResult crossval_run(const std::vector<PreparedSample>& data, const CrossvalConfig& cfg,
                            const ProgressFn& progress) {
  cfg.validate();
  if (data.empty()) fail(ErrorKind::EmptyDataset, "no samples to cross-validate");
  std::vector<int> labels;
  for (const PreparedSample& p : data) labels.push_back(p.sample.label);

  CrossvalResult result;
  result.plan = make_folds(labels, cfg.folds, cfg.seed);
  std::vector<ConfusionMatrix> matrices;

  for (std::size_t f = 0; f < result.plan.folds.size(); ++f) {
    try {
      const auto& test = result.plan.folds[f];
      std::vector<std::size_t> train_idx;
      const std::set<std::size_t> test_set(test.begin(), test.end());
      for (std::size_t i = 0; i < data.size(); ++i)
        if (!test_set.count(i)) train_idx.push_back(i);

      FoldRecord record;
      for (std::size_t i : train_idx) record.train_ids.push_back(data[i].sample.id);
      for (std::size_t i : test) record.test_ids.push_back(data[i].sample.id);

      auto t0 = Clock::now();
      const std::vector<TrainingItem> items = build_training_set(data, train_idx, cfg);
      assert_no_leakage(items, data, test);
      result.timings["augment_and_features"] += seconds_since(t0);
      record.training_items = items.size();

      nn::LabeledSet set;
      for (const TrainingItem& item : items) {
        set.inputs.push_back(to_input(item.feature));
        set.labels.push_back(item.label);
      }

      t0 = Clock::now();
      nn::Network net =
          nn::build_network(cfg.network, derive_stream(cfg.seed, "init", f).next());
      nn::TrainConfig tc = cfg.train;
      tc.rng_seed = derive_stream(cfg.seed, "shuffle", f).next();
      if (progress)
        progress("fold " + std::to_string(f + 1) + "/" + std::to_string(result.plan.folds.size()) +
                 ": training on " + std::to_string(items.size()) + " items");
      record.history = nn::train(net, set, tc, [&](int epoch, const nn::EpochStats& s) {
        if (progress)
          progress("  epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(s.mean_loss) +
                   " acc " + std::to_string(s.accuracy));
        return true;
      });
      result.timings["train"] += seconds_since(t0);

      t0 = Clock::now();
      for (std::size_t i : test) {
        const RasterImage feature = pipeline::feature_image(data[i].sla, cfg.variant, cfg.preprocess);
        record.predictions.push_back(nn::predicted_class(nn::predict(net, to_input(feature))));
        record.labels.push_back(data[i].sample.label);
      }
      result.timings["evaluate"] += seconds_since(t0);
      matrices.push_back(confusion(record.predictions, record.labels));
      result.folds.push_back(std::move(record));
    } catch (const Error& e) {
      rethrow_with_fold(e, f);
    }
  }
  result.report = make_report(std::move(matrices));
  return result;
}

CrossvalResult crossval_run(const std::vector<Sample>& samples, const CrossvalConfig& cfg,
                            const ImageLoader& loader, const ProgressFn& progress) {
  cfg.validate();
  const auto t0 = Clock::now();
  const std::vector<PreparedSample> data = prepare(samples, cfg.preprocess, loader);
  const double prep = seconds_since(t0);
  CrossvalResult result = crossval_run(data, cfg, progress);
  result.timings["preprocess"] = prep;
  return result;
}

std::vector<SweepPoint> sweep_threshold(const std::vector<PreparedSample>& data,
                                        const CrossvalConfig& cfg,
                                        std::span<const double> thresholds,
                                        const ProgressFn& progress) {
  std::vector<SweepPoint> points;
  for (double t : thresholds) {
    CrossvalConfig c = cfg;
    c.variant = pipeline::Variant::Ive;
    c.preprocess.ive.threshold = t;
    if (progress) progress("threshold " + std::to_string(t));
    const CrossvalResult r = crossval_run(data, c, progress);
    points.push_back({t, r.report.average_of(Metric::Accuracy)});
  }
  return points;
}

}  // namespace lesion::eval
