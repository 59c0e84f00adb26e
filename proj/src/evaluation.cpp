#include "cbr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cbr/error.hpp"

namespace cbr::evaluation {

namespace {

// Continued fraction for I_x(a, b), modified Lentz. Converges for x < (a+1)/(a+b+2).
double beta_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("incomplete_beta: need a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("t distribution: df must be positive");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) throw std::invalid_argument("t distribution: NaN statistic");
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTest paired_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("paired_t: need at least two pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTest out;
  out.mean_difference = mean;
  if (sd == 0.0) {
    if (mean == 0.0) return out;
    out.t = mean > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
    out.p = 0.0;
    return out;
  }
  out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  out.p = t_two_tailed_p(out.t, static_cast<double>(n - 1));
  return out;
}

PerformanceScoreMatrix performance_scores(const std::vector<SampleResult>& results,
                                          double alpha) {
  PerformanceScoreMatrix out;
  std::vector<std::string> datasets;
  // (dataset, classifier) -> sample -> report
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, metrics::MetricReport>> cells;
  for (const auto& r : results) {
    if (std::find(out.classifiers.begin(), out.classifiers.end(), r.classifier) ==
        out.classifiers.end()) {
      out.classifiers.push_back(r.classifier);
    }
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) {
      datasets.push_back(r.dataset);
    }
    if (!cells[{r.dataset, r.classifier}].emplace(r.sample, r.report).second) {
      throw DataError("performance scores: duplicate sample " + std::to_string(r.sample) +
                      " for " + r.dataset + "/" + r.classifier);
    }
  }
  if (out.classifiers.size() < 2) throw DataError("performance scores: need two classifiers");

  const std::size_t C = out.classifiers.size();
  const std::size_t M = metrics::kMeasureNames.size();
  out.scores.assign(C, std::vector<int>(M, 0));

  for (const auto& ds : datasets) {
    std::set<std::size_t> reference;
    for (const auto& [s, _] : cells[{ds, out.classifiers[0]}]) reference.insert(s);
    for (const auto& c : out.classifiers) {
      const auto it = cells.find({ds, c});
      std::set<std::size_t> samples;
      if (it != cells.end()) {
        for (const auto& [s, _] : it->second) samples.insert(s);
      }
      if (samples != reference || samples.size() < 2) {
        throw DataError("performance scores: missing samples for " + ds + "/" + c);
      }
    }
    for (std::size_t x = 0; x < C; ++x) {
      for (std::size_t y = x + 1; y < C; ++y) {
        const auto& cx = cells[{ds, out.classifiers[x]}];
        const auto& cy = cells[{ds, out.classifiers[y]}];
        for (std::size_t m = 0; m < M; ++m) {
          std::vector<double> vx, vy;
          for (const auto& [s, rep] : cx) vx.push_back(rep.measure(m));
          for (const auto& [s, rep] : cy) vy.push_back(rep.measure(m));
          const auto test = paired_t(vx, vy);
          if (!(test.p < alpha) || test.mean_difference == 0.0) continue;
          const int sign = test.mean_difference > 0 ? 1 : -1;
          out.scores[x][m] += sign;
          out.scores[y][m] -= sign;
        }
      }
    }
  }
  return out;
}

TopsisRanking topsis(const std::vector<std::vector<double>>& matrix, std::vector<double> weights,
                     std::vector<bool> benefit) {
  const std::size_t n = matrix.size();
  if (n < 2) throw std::invalid_argument("topsis: need at least two alternatives");
  const std::size_t m = matrix.front().size();
  if (m == 0) throw std::invalid_argument("topsis: no criteria");
  for (const auto& row : matrix) {
    if (row.size() != m) throw std::invalid_argument("topsis: ragged matrix");
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("topsis: non-finite entry");
    }
  }
  if (weights.empty()) weights.assign(m, 1.0 / static_cast<double>(m));
  if (benefit.empty()) benefit.assign(m, true);
  if (weights.size() != m || benefit.size() != m) {
    throw std::invalid_argument("topsis: weights or flags do not match the criteria");
  }

  TopsisRanking r;
  r.weights = weights;
  r.normalized.assign(n, std::vector<double>(m, 0.0));
  r.weighted.assign(n, std::vector<double>(m, 0.0));
  r.ideal.assign(m, 0.0);
  r.anti_ideal.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += matrix[i][j] * matrix[i][j];
    if (ss == 0.0) {
      r.skipped_columns.push_back(j);
      std::cerr << "warning: topsis: criterion " << j << " is all zero and is skipped\n";
      continue;
    }
    const double norm = std::sqrt(ss);
    for (std::size_t i = 0; i < n; ++i) {
      r.normalized[i][j] = matrix[i][j] / norm;
      r.weighted[i][j] = weights[j] * r.normalized[i][j];
    }
    double hi = r.weighted[0][j], lo = r.weighted[0][j];
    for (std::size_t i = 1; i < n; ++i) {
      hi = std::max(hi, r.weighted[i][j]);
      lo = std::min(lo, r.weighted[i][j]);
    }
    r.ideal[j] = benefit[j] ? hi : lo;
    r.anti_ideal[j] = benefit[j] ? lo : hi;
  }
  if (r.skipped_columns.size() == m) throw std::invalid_argument("topsis: every column is zero");

  for (std::size_t i = 0; i < n; ++i) {
    double dp = 0.0, dm = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double up = r.weighted[i][j] - r.ideal[j];
      const double down = r.weighted[i][j] - r.anti_ideal[j];
      dp += up * up;
      dm += down * down;
    }
    r.d_plus.push_back(std::sqrt(dp));
    r.d_minus.push_back(std::sqrt(dm));
    const double total = r.d_plus.back() + r.d_minus.back();
    r.relative.push_back(total == 0.0 ? 0.5 : r.d_minus.back() / total);
  }
  r.ranking.resize(n);
  std::iota(r.ranking.begin(), r.ranking.end(), 0);
  std::stable_sort(r.ranking.begin(), r.ranking.end(),
                   [&](auto x, auto y) { return r.relative[x] > r.relative[y]; });
  return r;
}

std::vector<double> entropy_weights(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  if (n < 2) throw std::invalid_argument("entropy weights: need at least two alternatives");
  const std::size_t m = matrix.front().size();
  std::vector<double> divergence(m, 0.0);
  const double k = 1.0 / std::log(static_cast<double>(n));
  for (std::size_t j = 0; j < m; ++j) {
    double lo = matrix[0][j];
    for (const auto& row : matrix) lo = std::min(lo, row.at(j));
    double total = 0.0;
    for (const auto& row : matrix) total += row[j] - lo;
    if (total == 0.0) continue;
    double e = 0.0;
    for (const auto& row : matrix) {
      const double p = (row[j] - lo) / total;
      if (p > 0.0) e -= k * p * std::log(p);
    }
    divergence[j] = 1.0 - e;
  }
  const double sum = std::accumulate(divergence.begin(), divergence.end(), 0.0);
  if (sum <= 0.0) return std::vector<double>(m, 1.0 / static_cast<double>(m));
  for (double& d : divergence) d /= sum;
  return divergence;
}

}  // namespace cbr::evaluation
