#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cbr/data.hpp"
#include "cbr/similarity.hpp"

namespace cbr::probability {

/// Monotone probabilities over the K ranked neighbors plus one virtual
/// neighbor of class value 1/2 (index K). p = softmax(omega).
struct NeighborWeights {
  std::vector<double> omega;
  std::vector<double> p;

  std::size_t k() const { return p.empty() ? 0 : p.size() - 1; }
  /// Probability mass of the virtual neighbor.
  double regularizer_mass() const { return p.empty() ? 0.0 : p.back(); }

  /// Throws std::invalid_argument unless omega is non-increasing.
  static NeighborWeights from_omega(std::vector<double> omega);
  /// Direct construction from probabilities (omega = log p). p must be
  /// non-negative, non-increasing and sum to one within 1e-6.
  static NeighborWeights from_probabilities(std::vector<double> p);
  static NeighborWeights uniform(std::size_t k);
};

/// Class-1 indicators of the K ranked neighbors. The virtual neighbor's
/// value 1/2 is implicit.
struct NeighborEvidence {
  std::vector<int> b;

  static constexpr double virtual_value = 0.5;
};

std::vector<double> softmax(std::span<const double> omega);

/// K'/K.
double naive_probability(std::span<const int> b);

/// sum_{i<=K} B_i p_i + p_{K+1} / 2.
double weighted_probability(const NeighborWeights& weights, const NeighborEvidence& evidence);

/// Log-likelihood of the fitting data:
/// sum_n log( sum_i B_i(n) e^{omega_i} / sum_j e^{omega_j} ).
double log_likelihood(std::span<const double> omega, const std::vector<NeighborEvidence>& rows);

/// For each training case, 1 where a leave-one-out neighbor shares that
/// case's own class.
std::vector<NeighborEvidence> agreement_evidence(const CbrModel& model, const Dataset& train,
                                                 std::size_t workers = 1);

/// omega_1 = 0, omega_{i+1} = omega_i - max(0, delta_i).
std::vector<double> omega_from_deltas(std::span<const double> deltas);

struct FitOptions {
  std::size_t swarm_size = 20;
  std::size_t iterations = 50;
  double delta_low = -5.0;
  double delta_high = 5.0;
};

/// Maximizes log_likelihood over monotone omega with PSO. The uniform
/// weighting is always a candidate, so the result never scores below it.
NeighborWeights fit_from_evidence(const std::vector<NeighborEvidence>& rows, std::size_t k,
                                  std::uint64_t seed, const FitOptions& options = {});

NeighborWeights fit_neighbor_weights(const CbrModel& model, const Dataset& train,
                                     std::uint64_t seed, const FitOptions& options = {});

/// Sets result.probability_default from its neighbors' labels.
void attach_probability(RetrievalResult& result, const NeighborWeights& weights);

}  // namespace cbr::probability
