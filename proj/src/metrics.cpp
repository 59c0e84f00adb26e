#include "cbr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace cbr::metrics {

double MetricReport::measure(std::size_t index) const {
  switch (index) {
    case 0: return accuracy;
    case 1: return precision;
    case 2: return recall;
    case 3: return specificity;
    case 4: return f1;
    case 5: return roc_auc;
    case 6: return g_mean;
    default: throw std::out_of_range("metrics: measure index");
  }
}

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("confusion: length mismatch");
  if (labels.empty()) throw std::invalid_argument("confusion: no cases");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == 1;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++cm.tp;
    else if (!predicted && !actual) ++cm.tn;
    else if (predicted) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

double rank_auc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("rank_auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return scores[x] < scores[y]; });

  // Average ranks (1-based) over tied groups.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("rank_auc: need both classes");
  const double np = static_cast<double>(positives);
  const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(negatives));
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

double g_mean(double recall, double specificity) { return std::sqrt(recall * specificity); }

double balanced_auc(double recall, double specificity) { return (recall + specificity) / 2.0; }

MetricReport compute_metrics(const ConfusionMatrix& cm,
                             std::optional<std::span<const double>> scores,
                             std::span<const Label> labels) {
  if (cm.total() == 0) throw std::invalid_argument("metrics: empty confusion matrix");
  MetricReport r;
  auto ratio = [&r](std::size_t num, std::size_t den) {
    if (den == 0) {
      r.undefined_ratio = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.accuracy = ratio(cm.tp + cm.tn, cm.total());
  r.precision = ratio(cm.tp, cm.tp + cm.fp);
  r.recall = ratio(cm.tp, cm.tp + cm.fn);
  r.specificity = ratio(cm.tn, cm.tn + cm.fp);
  if (r.precision + r.recall == 0.0) r.undefined_ratio = true;
  r.f1 = f1_score(r.precision, r.recall);
  r.g_mean = g_mean(r.recall, r.specificity);

  const bool both_classes = cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0;
  if (scores && both_classes) {
    r.roc_auc = rank_auc(*scores, labels);
  } else {
    r.roc_auc = balanced_auc(r.recall, r.specificity);
  }
  return r;
}

}  // namespace cbr::metrics
