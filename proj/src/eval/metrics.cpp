#include <string>

#include "lesion/error.hpp"
#include "lesion/eval.hpp"

namespace lesion::eval {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Sensitivity: return "Sensitivity";
    case Metric::Specificity: return "Specificity";
    case Metric::Ppv: return "PPV";
    case Metric::Npv: return "NPV";
    case Metric::Accuracy: return "Accuracy";
  }
  return "";
}

ConfusionMatrix confusion(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size())
    fail(ErrorKind::LengthMismatch, "predictions and labels differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int p = predictions[i], y = labels[i];
    if ((p != kNevus && p != kMelanoma) || (y != kNevus && y != kMelanoma))
      fail(ErrorKind::LabelOutOfRange, "classes must be 0 or 1");
    if (y == kMelanoma) {
      (p == kMelanoma ? cm.tp : cm.fn) += 1;
    } else {
      (p == kNevus ? cm.tn : cm.fp) += 1;
    }
  }
  return cm;
}

namespace {

std::optional<Fraction> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return Fraction{num, den};
}

}  // namespace

MetricsRow metrics(const ConfusionMatrix& cm) {
  MetricsRow row;
  row.values = {ratio(cm.tp, cm.tp + cm.fn), ratio(cm.tn, cm.tn + cm.fp),
                ratio(cm.tp, cm.tp + cm.fp), ratio(cm.tn, cm.tn + cm.fn),
                ratio(cm.tp + cm.tn, cm.total())};
  return row;
}

MetricsReport make_report(std::vector<ConfusionMatrix> matrices) {
  MetricsReport report;
  report.matrices = std::move(matrices);
  for (const ConfusionMatrix& cm : report.matrices) report.folds.push_back(metrics(cm));
  for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const MetricsRow& row : report.folds) {
      if (row.values[m]) {
        sum += row.values[m]->value();
        ++n;
      }
    }
    if (n > 0) report.average[m] = sum / static_cast<double>(n);
  }
  return report;
}

}  // namespace lesion::eval
