#include "cbr/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cbr/error.hpp"
#include "cbr/pso.hpp"

namespace cbr::probability {

namespace {

double log_sum_exp(std::span<const double> v) {
  const double peak = *std::max_element(v.begin(), v.end());
  if (std::isinf(peak)) return peak;
  double total = 0.0;
  for (double x : v) total += std::exp(x - peak);
  return peak + std::log(total);
}

}  // namespace

NeighborWeights NeighborWeights::from_omega(std::vector<double> omega) {
  if (omega.size() < 2) throw std::invalid_argument("neighbor weights: need K + 1 >= 2 entries");
  for (std::size_t i = 1; i < omega.size(); ++i) {
    if (omega[i] > omega[i - 1]) throw std::invalid_argument("neighbor weights: omega must be non-increasing");
  }
  NeighborWeights out;
  out.p = softmax(omega);
  out.omega = std::move(omega);
  return out;
}

NeighborWeights NeighborWeights::from_probabilities(std::vector<double> p) {
  if (p.size() < 2) throw std::invalid_argument("neighbor weights: need K + 1 >= 2 entries");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0)) throw std::invalid_argument("neighbor weights: negative probability");
    if (i > 0 && p[i] > p[i - 1]) throw std::invalid_argument("neighbor weights: p must be non-increasing");
    total += p[i];
  }
  if (std::fabs(total - 1.0) > 1e-6) throw std::invalid_argument("neighbor weights: p must sum to 1");
  NeighborWeights out;
  for (double x : p) out.omega.push_back(std::log(x));
  out.p = std::move(p);
  return out;
}

NeighborWeights NeighborWeights::uniform(std::size_t k) {
  return from_omega(std::vector<double>(k + 1, 0.0));
}

std::vector<double> softmax(std::span<const double> omega) {
  if (omega.empty()) return {};
  const double peak = *std::max_element(omega.begin(), omega.end());
  std::vector<double> out(omega.size());
  double total = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    out[i] = std::exp(omega[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

double naive_probability(std::span<const int> b) {
  if (b.empty()) throw std::invalid_argument("naive_probability: K must be positive");
  double ones = 0.0;
  for (int x : b) ones += x == 1 ? 1.0 : 0.0;
  return ones / static_cast<double>(b.size());
}

double weighted_probability(const NeighborWeights& weights, const NeighborEvidence& evidence) {
  if (weights.p.size() != evidence.b.size() + 1) {
    throw std::invalid_argument("weighted_probability: expected K + 1 weights for K neighbors");
  }
  double out = 0.0;
  for (std::size_t i = 0; i < evidence.b.size(); ++i) out += evidence.b[i] * weights.p[i];
  return out + NeighborEvidence::virtual_value * weights.p.back();
}

double log_likelihood(std::span<const double> omega, const std::vector<NeighborEvidence>& rows) {
  const std::size_t K = omega.size() - 1;
  const double log_norm = log_sum_exp(omega);
  const double log_half = std::log(NeighborEvidence::virtual_value);
  std::vector<double> terms;
  double total = 0.0;
  for (const auto& row : rows) {
    if (row.b.size() != K) throw std::invalid_argument("log_likelihood: evidence length mismatch");
    terms.clear();
    for (std::size_t i = 0; i < K; ++i) {
      if (row.b[i] == 1) terms.push_back(omega[i]);
    }
    terms.push_back(omega[K] + log_half);
    total += log_sum_exp(terms) - log_norm;
  }
  return total;
}

std::vector<NeighborEvidence> agreement_evidence(const CbrModel& model, const Dataset& train,
                                                 std::size_t workers) {
  if (train.empty()) throw DataError("probability: empty training set");
  const auto results = batch_retrieve(model, train.rows, workers, {.exclude_same_id = true});
  std::vector<NeighborEvidence> out(train.size());
  for (std::size_t n = 0; n < train.size(); ++n) {
    for (const auto& nb : results[n].neighbors) {
      out[n].b.push_back(nb.label == train.rows[n].label ? 1 : 0);
    }
  }
  return out;
}

std::vector<double> omega_from_deltas(std::span<const double> deltas) {
  std::vector<double> omega(deltas.size() + 1, 0.0);
  for (std::size_t i = 0; i < deltas.size(); ++i) omega[i + 1] = omega[i] - std::max(0.0, deltas[i]);
  return omega;
}

NeighborWeights fit_from_evidence(const std::vector<NeighborEvidence>& rows, std::size_t k,
                                  std::uint64_t seed, const FitOptions& options) {
  if (rows.empty()) throw DataError("probability: no fitting cases");
  if (k == 0) throw std::invalid_argument("probability: K must be positive");

  pso::Config config;
  config.swarm_size = options.swarm_size;
  config.iterations = options.iterations;
  config.bounds.assign(k, {options.delta_low, options.delta_high});
  config.seed = seed;
  config.maximize = true;
  const auto fitted = pso::optimize(
      [&](std::span<const double> deltas) { return log_likelihood(omega_from_deltas(deltas), rows); },
      config);

  auto omega = omega_from_deltas(fitted.best_position);
  const std::vector<double> flat(k + 1, 0.0);
  if (log_likelihood(flat, rows) > log_likelihood(omega, rows)) omega = flat;
  return NeighborWeights::from_omega(std::move(omega));
}

NeighborWeights fit_neighbor_weights(const CbrModel& model, const Dataset& train,
                                     std::uint64_t seed, const FitOptions& options) {
  const auto [n0, n1] = train.class_counts();
  if (n0 == 0 || n1 == 0) throw DataError("probability: training data needs both classes");
  return fit_from_evidence(agreement_evidence(model, train), model.k, seed, options);
}

void attach_probability(RetrievalResult& result, const NeighborWeights& weights) {
  NeighborEvidence evidence;
  for (const auto& nb : result.neighbors) evidence.b.push_back(nb.label == 1 ? 1 : 0);
  result.probability_default = weighted_probability(weights, evidence);
}

}  // namespace cbr::probability
