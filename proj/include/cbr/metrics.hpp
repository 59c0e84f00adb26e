#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "cbr/data.hpp"

namespace cbr::metrics {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// The seven reported measures, in report order.
inline constexpr std::array<std::string_view, 7> kMeasureNames = {
    "accuracy", "precision", "recall", "specificity", "f1", "roc_auc", "g_mean"};

struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double g_mean = 0.0;
  /// Set when a ratio had a zero denominator and was reported as 0.
  bool undefined_ratio = false;

  /// Measure by index into kMeasureNames.
  double measure(std::size_t index) const;
};

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels);

/// Mann-Whitney AUC over class-1 scores; ties count one half.
double rank_auc(std::span<const double> scores, std::span<const Label> labels);

/// precision = tp/(tp+fp), recall = tp/(tp+fn), specificity = tn/(tn+fp),
/// f1 = harmonic mean of precision and recall, g_mean = sqrt(recall *
/// specificity). roc_auc comes from `scores` when given, else it is the
/// balanced accuracy (recall + specificity) / 2.
MetricReport compute_metrics(const ConfusionMatrix& cm,
                             std::optional<std::span<const double>> scores = std::nullopt,
                             std::span<const Label> labels = {});

/// The ratio-level formulas, for callers holding published rates rather than counts.
double f1_score(double precision, double recall);
double g_mean(double recall, double specificity);
double balanced_auc(double recall, double specificity);

}  // namespace cbr::metrics
