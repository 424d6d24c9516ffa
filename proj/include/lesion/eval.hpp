#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesion/augment.hpp"
#include "lesion/ive.hpp"
#include "lesion/nn/network.hpp"
#include "lesion/nn/train.hpp"
#include "lesion/pipeline.hpp"

namespace lesion::eval {

constexpr int kNevus = 0;
constexpr int kMelanoma = 1;

// ---- folds ----------------------------------------------------------------

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;  // test indices per fold, ascending
};

/// Stratified, disjoint folds: each class is shuffled (stream "folds") and
/// dealt round-robin, continuing across classes, so fold sizes differ by at
/// most one and per-class counts per fold differ by at most one.
FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed);

// ---- metrics --------------------------------------------------------------

/// Melanoma is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0, fn = 0, tn = 0, fp = 0;
  std::uint64_t total() const { return tp + fn + tn + fp; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels);

struct Fraction {
  std::uint64_t num = 0, den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

enum class Metric { Sensitivity, Specificity, Ppv, Npv, Accuracy };
constexpr std::array<Metric, 5> kAllMetrics = {Metric::Sensitivity, Metric::Specificity,
                                               Metric::Ppv, Metric::Npv, Metric::Accuracy};
std::string_view metric_name(Metric m);

/// One metric row. A metric whose denominator is zero is absent.
struct MetricsRow {
  std::array<std::optional<Fraction>, 5> values;

  const std::optional<Fraction>& operator[](Metric m) const {
    return values[static_cast<std::size_t>(m)];
  }
};

MetricsRow metrics(const ConfusionMatrix& cm);

struct MetricsReport {
  std::vector<ConfusionMatrix> matrices;
  std::vector<MetricsRow> folds;
  /// Mean over the folds where the metric is defined; absent if none.
  std::array<std::optional<double>, 5> average;

  std::optional<double> average_of(Metric m) const { return average[static_cast<std::size_t>(m)]; }
};

MetricsReport make_report(std::vector<ConfusionMatrix> matrices);

// ---- cross-validation -----------------------------------------------------

struct Sample {
  std::string id;
  int label = kNevus;
  std::filesystem::path path;
};

using ImageLoader = std::function<RasterImage(const Sample&)>;

/// Decodes from Sample::path.
RasterImage load_from_path(const Sample& s);

enum class AugmentStage { Sla, Feature };

struct CrossvalConfig {
  pipeline::PreprocessConfig preprocess;
  aug::AugmentParams augment;
  AugmentStage augment_stage = AugmentStage::Sla;
  nn::TrainConfig train;
  nn::NetworkSpec network = nn::full_spec();
  pipeline::Variant variant = pipeline::Variant::Ive;
  int folds = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A sample after segmentation; the SLA is shared by both variants.
struct PreparedSample {
  Sample sample;
  RasterImage sla;
};

std::vector<PreparedSample> prepare(const std::vector<Sample>& samples,
                                    const pipeline::PreprocessConfig& cfg,
                                    const ImageLoader& loader = load_from_path);

/// Network input: feature image scaled to [0, 1], shape (rows, cols, 1).
nn::Tensor to_input(const RasterImage& feature);

struct TrainingItem {
  std::string source_id;
  int label = kNevus;
  bool augmented = false;
  RasterImage feature;
};

/// Originals plus `multiplier` augmented copies of every sample in `indices`.
std::vector<TrainingItem> build_training_set(const std::vector<PreparedSample>& data,
                                             std::span<const std::size_t> indices,
                                             const CrossvalConfig& cfg);

/// Throws if any training item's source id belongs to the test fold.
void assert_no_leakage(const std::vector<TrainingItem>& train,
                       const std::vector<PreparedSample>& data,
                       std::span<const std::size_t> test_indices);

struct FoldRecord {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::size_t training_items = 0;
  std::vector<nn::EpochStats> history;
  std::vector<int> predictions;
  std::vector<int> labels;
};

struct CrossvalResult {
  MetricsReport report;
  FoldPlan plan;
  std::vector<FoldRecord> folds;
  std::map<std::string, double> timings;  // seconds per stage
};

using ProgressFn = std::function<void(const std::string&)>;

CrossvalResult crossval_run(const std::vector<PreparedSample>& data, const CrossvalConfig& cfg,
                            const ProgressFn& progress = {});

CrossvalResult crossval_run(const std::vector<Sample>& samples, const CrossvalConfig& cfg,
                            const ImageLoader& loader = load_from_path,
                            const ProgressFn& progress = {});

struct SweepPoint {
  double threshold = 0.0;
  std::optional<double> accuracy;
};

/// Cross-validated accuracy of the IVE variant for every threshold.
std::vector<SweepPoint> sweep_threshold(const std::vector<PreparedSample>& data,
                                        const CrossvalConfig& cfg,
                                        std::span<const double> thresholds,
                                        const ProgressFn& progress = {});

// ---- reports --------------------------------------------------------------

/// "Metric,Fold-1,...,Fold-k,Average"; values with 4 decimals, absent as NA.
std::string render_metrics_csv(const MetricsReport& report);
std::string render_metrics_svg(const MetricsReport& report, const std::string& title);

struct ParsedTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> rows;
};
ParsedTable parse_metrics_csv(const std::string& csv);

/// "label,bin,count" rows.
std::string render_histogram_csv(const ive::HistogramReport& report);
std::string render_histogram_svg(const ive::HistogramReport& report, const std::string& title);

std::string render_sweep_csv(std::span<const SweepPoint> points);

struct ReportFiles {
  std::filesystem::path csv;
  std::filesystem::path svg;
};

ReportFiles write_metrics_report(const MetricsReport& report, const std::filesystem::path& dir,
                                 const std::string& stem, const std::string& title);
ReportFiles write_histogram_report(const ive::HistogramReport& report,
                                   const std::filesystem::path& dir, const std::string& stem,
                                   const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lesion::eval
