#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cbr/data.hpp"
#include "cbr/similarity.hpp"

namespace cbr::scoring {

/// One of: gini, entropy, mutual_info, chi2, anova, relieff.
///
/// Parameters: "bins" (histogram schemes, default 10), "neighbors" and
/// "samples" (relieff; samples = 0 means every row).
struct WeightingScheme {
  std::string name;
  std::map<std::string, double> parameters;

  void validate() const;
};

/// The six schemes in their fixed evaluation order, with default parameters.
std::vector<WeightingScheme> available_schemes();

/// Default-parameter scheme by name. Throws std::invalid_argument if unknown.
WeightingScheme scheme(const std::string& name);

/// Non-negative importance of each feature before scaling.
std::vector<double> raw_scores(const Dataset& d, const WeightingScheme& scheme,
                               std::uint64_t seed);

/// raw_scores scaled to sum to one; all-zero scores fall back to uniform
/// weights with a warning on stderr.
GlobalWeights score_features(const Dataset& d, const WeightingScheme& scheme,
                             std::uint64_t seed);

/// Equal-width bin index of each value over [lo, hi]. A constant column
/// lands in bin 0.
std::vector<std::size_t> equal_width_bins(const std::vector<double>& values, std::size_t bins);

}  // namespace cbr::scoring
