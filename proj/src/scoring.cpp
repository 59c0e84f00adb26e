#include "cbr/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cbr/error.hpp"
#include "cbr/random.hpp"

namespace cbr::scoring {

namespace {

const std::vector<std::string> kSchemeOrder = {"gini", "entropy", "mutual_info",
                                               "chi2", "anova",   "relieff"};

double param(const WeightingScheme& s, const std::string& key, double fallback) {
  const auto it = s.parameters.find(key);
  return it == s.parameters.end() ? fallback : it->second;
}

std::vector<double> column(const Dataset& d, std::size_t j) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const auto& r : d.rows) out.push_back(r.features[j]);
  return out;
}

// counts[bin][label]
using Table = std::vector<std::array<double, 2>>;

Table contingency(const Dataset& d, std::size_t j, std::size_t bins) {
  const auto idx = equal_width_bins(column(d, j), bins);
  Table t(bins, {0.0, 0.0});
  for (std::size_t i = 0; i < d.size(); ++i) t[idx[i]][d.rows[i].label] += 1.0;
  return t;
}

double gini_impurity(double n0, double n1) {
  const double n = n0 + n1;
  if (n == 0.0) return 0.0;
  const double p = n1 / n;
  return 2.0 * p * (1.0 - p);
}

double entropy_bits(double n0, double n1) {
  const double n = n0 + n1;
  double h = 0.0;
  for (double c : {n0, n1}) {
    if (c > 0.0) h -= (c / n) * std::log2(c / n);
  }
  return h;
}

double gini_gain(const Table& t) {
  double n0 = 0.0, n1 = 0.0;
  for (const auto& row : t) n0 += row[0], n1 += row[1];
  const double n = n0 + n1;
  double child = 0.0;
  for (const auto& row : t) child += (row[0] + row[1]) / n * gini_impurity(row[0], row[1]);
  return std::max(0.0, gini_impurity(n0, n1) - child);
}

double information_gain(const Table& t) {
  double n0 = 0.0, n1 = 0.0;
  for (const auto& row : t) n0 += row[0], n1 += row[1];
  const double n = n0 + n1;
  double child = 0.0;
  for (const auto& row : t) child += (row[0] + row[1]) / n * entropy_bits(row[0], row[1]);
  return std::max(0.0, entropy_bits(n0, n1) - child);
}

double mutual_information(const Table& t) {
  double n = 0.0;
  std::array<double, 2> col{0.0, 0.0};
  for (const auto& row : t) {
    col[0] += row[0];
    col[1] += row[1];
  }
  n = col[0] + col[1];
  double mi = 0.0;
  for (const auto& row : t) {
    const double rsum = row[0] + row[1];
    for (int c = 0; c < 2; ++c) {
      if (row[c] > 0.0) mi += row[c] / n * std::log(row[c] * n / (rsum * col[c]));
    }
  }
  return std::max(0.0, mi);
}

double chi_squared(const Table& t) {
  std::array<double, 2> col{0.0, 0.0};
  for (const auto& row : t) {
    col[0] += row[0];
    col[1] += row[1];
  }
  const double n = col[0] + col[1];
  double chi = 0.0;
  for (const auto& row : t) {
    const double rsum = row[0] + row[1];
    if (rsum == 0.0) continue;
    for (int c = 0; c < 2; ++c) {
      const double expected = rsum * col[c] / n;
      if (expected > 0.0) chi += (row[c] - expected) * (row[c] - expected) / expected;
    }
  }
  return chi;
}

std::vector<double> anova_scores(const Dataset& d) {
  const std::size_t L = d.feature_count();
  std::vector<double> f(L, 0.0);
  const auto [n0, n1] = d.class_counts();
  const double n = static_cast<double>(d.size());
  for (std::size_t j = 0; j < L; ++j) {
    std::array<double, 2> sum{0.0, 0.0};
    for (const auto& r : d.rows) sum[r.label] += r.features[j];
    const std::array<double, 2> mean{sum[0] / static_cast<double>(n0),
                                     sum[1] / static_cast<double>(n1)};
    const double grand = (sum[0] + sum[1]) / n;
    const double between = static_cast<double>(n0) * (mean[0] - grand) * (mean[0] - grand) +
                           static_cast<double>(n1) * (mean[1] - grand) * (mean[1] - grand);
    double within = 0.0;
    for (const auto& r : d.rows) {
      const double dev = r.features[j] - mean[r.label];
      within += dev * dev;
    }
    if (between <= 0.0) {
      f[j] = 0.0;
    } else if (within <= 0.0 || n <= 2.0) {
      f[j] = std::numeric_limits<double>::infinity();
    } else {
      f[j] = between / (within / (n - 2.0));
    }
  }
  double max_finite = 0.0;
  bool any_finite = false;
  for (double v : f) {
    if (std::isfinite(v) && v > 0.0) {
      max_finite = std::max(max_finite, v);
      any_finite = true;
    }
  }
  for (double& v : f) {
    if (std::isinf(v)) v = any_finite ? max_finite : 1.0;
  }
  return f;
}

std::vector<double> relieff_scores(const Dataset& d, std::size_t neighbors, std::size_t samples,
                                   std::uint64_t seed) {
  const std::size_t L = d.feature_count();
  const std::size_t N = d.size();
  std::vector<double> width(L);
  for (std::size_t j = 0; j < L; ++j) {
    const auto col = column(d, j);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    width[j] = *hi - *lo;
  }
  auto diff = [&](std::size_t j, std::size_t x, std::size_t y) {
    if (width[j] <= 0.0) return 0.0;
    return std::fabs(d.rows[x].features[j] - d.rows[y].features[j]) / width[j];
  };

  std::vector<std::size_t> picks(N);
  std::iota(picks.begin(), picks.end(), 0);
  if (samples > 0 && samples < N) {
    Rng rng(seed);
    rng.shuffle(picks.begin(), picks.end());
    picks.resize(samples);
    std::sort(picks.begin(), picks.end());
  }

  std::vector<double> w(L, 0.0);
  std::vector<std::pair<double, std::size_t>> hits;
  std::vector<std::pair<double, std::size_t>> misses;
  const double m = static_cast<double>(picks.size());
  for (auto r : picks) {
    hits.clear();
    misses.clear();
    for (std::size_t i = 0; i < N; ++i) {
      if (i == r) continue;
      double dist = 0.0;
      for (std::size_t j = 0; j < L; ++j) dist += diff(j, r, i);
      (d.rows[i].label == d.rows[r].label ? hits : misses).push_back({dist, i});
    }
    const std::size_t kh = std::min(neighbors, hits.size());
    const std::size_t km = std::min(neighbors, misses.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(kh), hits.end());
    std::partial_sort(misses.begin(), misses.begin() + static_cast<std::ptrdiff_t>(km),
                      misses.end());
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t h = 0; h < kh; ++h) w[j] -= diff(j, r, hits[h].second) / (m * kh);
      for (std::size_t h = 0; h < km; ++h) w[j] += diff(j, r, misses[h].second) / (m * km);
    }
  }
  for (double& v : w) v = std::max(0.0, v);
  return w;
}

}  // namespace

void WeightingScheme::validate() const {
  if (std::find(kSchemeOrder.begin(), kSchemeOrder.end(), name) == kSchemeOrder.end()) {
    throw std::invalid_argument("scoring: unknown scheme '" + name + "'");
  }
  if (param(*this, "bins", 10.0) < 2.0) throw std::invalid_argument("scoring: bins must be >= 2");
  if (param(*this, "neighbors", 10.0) < 1.0) {
    throw std::invalid_argument("scoring: relieff neighbors must be >= 1");
  }
  if (param(*this, "samples", 0.0) < 0.0) {
    throw std::invalid_argument("scoring: relieff samples must be >= 0");
  }
}

std::vector<WeightingScheme> available_schemes() {
  std::vector<WeightingScheme> out;
  for (const auto& n : kSchemeOrder) out.push_back(scheme(n));
  return out;
}

WeightingScheme scheme(const std::string& name) {
  WeightingScheme s{name, {}};
  if (name == "relieff") {
    s.parameters = {{"neighbors", 10.0}, {"samples", 0.0}};
  } else if (name != "anova") {
    s.parameters = {{"bins", 10.0}};
  }
  s.validate();
  return s;
}

std::vector<std::size_t> equal_width_bins(const std::vector<double>& values, std::size_t bins) {
  std::vector<std::size_t> out(values.size(), 0);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double width = *hi_it - lo;
  if (width <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto b = static_cast<std::size_t>((values[i] - lo) / width * static_cast<double>(bins));
    out[i] = std::min(b, bins - 1);
  }
  return out;
}

std::vector<double> raw_scores(const Dataset& d, const WeightingScheme& s, std::uint64_t seed) {
  s.validate();
  const auto [n0, n1] = d.class_counts();
  if (n0 == 0 || n1 == 0) throw DataError("scoring: dataset needs both classes");

  const std::size_t L = d.feature_count();
  if (s.name == "anova") return anova_scores(d);
  if (s.name == "relieff") {
    return relieff_scores(d, static_cast<std::size_t>(param(s, "neighbors", 10.0)),
                          static_cast<std::size_t>(param(s, "samples", 0.0)), seed);
  }

  const auto bins = static_cast<std::size_t>(param(s, "bins", 10.0));
  std::vector<double> out(L);
  for (std::size_t j = 0; j < L; ++j) {
    const auto t = contingency(d, j, bins);
    if (s.name == "gini") out[j] = gini_gain(t);
    else if (s.name == "entropy") out[j] = information_gain(t);
    else if (s.name == "mutual_info") out[j] = mutual_information(t);
    else out[j] = chi_squared(t);
  }
  return out;
}

GlobalWeights score_features(const Dataset& d, const WeightingScheme& s, std::uint64_t seed) {
  const auto scores = raw_scores(d, s, seed);
  if (std::all_of(scores.begin(), scores.end(), [](double v) { return v <= 0.0; })) {
    std::cerr << "warning: scheme " << s.name << " scored every feature 0; using uniform weights\n";
  }
  return GlobalWeights::from_scores(scores);
}

}  // namespace cbr::scoring
