#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cbr/metrics.hpp"

namespace cbr::evaluation {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Two-tailed p-value of Student's t with `df` degrees of freedom.
double t_two_tailed_p(double t, double df);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  double mean_difference = 0.0;
};

/// Paired t-test on d = a - b with n - 1 degrees of freedom. With zero
/// spread in d: p = 0 (t = +-inf) for a nonzero mean, p = 1 (t = 0) otherwise.
TTest paired_t(std::span<const double> a, std::span<const double> b);

/// One evaluated (dataset, classifier, sample) triple.
struct SampleResult {
  std::string dataset;
  std::string classifier;
  std::size_t sample = 0;
  metrics::MetricReport report;
};

/// Win/loss tallies: rows follow `classifiers`, columns follow
/// metrics::kMeasureNames.
struct PerformanceScoreMatrix {
  std::vector<std::string> classifiers;
  std::vector<std::vector<int>> scores;
};

/// For every dataset, measure and unordered classifier pair, a significant
/// paired t-test (p < alpha) gives +1 to the better classifier and -1 to the
/// other. Entries sum over datasets and opponents. Classifier order is first
/// appearance. Throws DataError unless every (dataset, classifier) has the
/// same sample set of size >= 2.
PerformanceScoreMatrix performance_scores(const std::vector<SampleResult>& results,
                                          double alpha = 0.05);

struct TopsisRanking {
  std::vector<std::vector<double>> normalized;
  std::vector<std::vector<double>> weighted;
  std::vector<double> weights;
  std::vector<double> ideal;
  std::vector<double> anti_ideal;
  std::vector<double> d_plus;
  std::vector<double> d_minus;
  std::vector<double> relative;
  /// Alternative indices by descending R+, ties by index.
  std::vector<std::size_t> ranking;
  /// All-zero columns, left out of both distances.
  std::vector<std::size_t> skipped_columns;
};

/// Vector-normalized TOPSIS. Empty `weights` means equal weights; empty
/// `benefit` means every criterion is a benefit. R+ = D- / (D- + D+), 0.5
/// when both distances vanish.
TopsisRanking topsis(const std::vector<std::vector<double>>& matrix,
                     std::vector<double> weights = {}, std::vector<bool> benefit = {});

/// Entropy weights of the decision matrix. Each column is shifted to a zero
/// minimum first, so signed score matrices are accepted.
std::vector<double> entropy_weights(const std::vector<std::vector<double>>& matrix);

}  // namespace cbr::evaluation
