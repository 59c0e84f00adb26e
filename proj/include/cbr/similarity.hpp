#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbr/data.hpp"

namespace cbr {

/// Per-feature exponents of the asymmetric polynomial local similarity:
/// `a` applies when the query value is at or below the case value, `b` when
/// it is above.
struct LocalParams {
  std::vector<double> a;
  std::vector<double> b;

  static LocalParams uniform(std::size_t features, double value = 1.0) {
    return {std::vector<double>(features, value), std::vector<double>(features, value)};
  }
};

/// Non-negative feature weights summing to one.
struct GlobalWeights {
  std::vector<double> w;

  static GlobalWeights uniform(std::size_t features) {
    return {std::vector<double>(features, 1.0 / static_cast<double>(features))};
  }
  /// Scales non-negative scores to sum to one. An all-zero vector maps to
  /// uniform weights.
  static GlobalWeights from_scores(std::span<const double> scores);
};

/// Immutable similarity model over a case base.
///
/// `bounds` are expressed in the same units as the stored case features
/// (normalized units for a normalized case base). Queries are clamped into
/// them, and `bounds[j].width()` is the range D_j of the local similarity.
struct CbrModel {
  Dataset case_base;
  std::size_t k = 1;
  GlobalWeights weights;
  LocalParams locals;
  std::vector<FeatureRange> bounds;

  std::size_t feature_count() const { return weights.w.size(); }
  std::vector<double> ranges_diff() const;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// Builds a model whose bounds follow the case base: [0,1] per informative
/// feature when normalized (a constant feature gets a zero-width range), the
/// raw ranges otherwise.
CbrModel make_model(Dataset case_base, std::size_t k, GlobalWeights weights, LocalParams locals);

/// Clamp bounds that `make_model` would choose for a dataset.
std::vector<FeatureRange> model_bounds(const Dataset& d);

/// log((D - |q - c|) / D) for a query already clamped into range; 0 when D = 0.
inline double log_similarity_base(double q, double c, double range) {
  if (range <= 0.0) return 0.0;
  return std::log((range - std::fabs(q - c)) / range);
}

/// w * sim^2 from the log base. Retrieval ranks by the sum of these terms,
/// which is the squared global similarity.
inline double weighted_square_term(double weight, double exponent, double log_base) {
  return weight * std::exp(2.0 * exponent * log_base);
}

/// Asymmetric polynomial similarity of one feature, in [0, 1].
/// Requires a, b > 0, D >= 0, |q - c| <= D. Returns 1 when D = 0.
double local_sim(double q, double c, double a, double b, double range);

/// sqrt(sum_j w_j * local_sim_j^2) with the query clamped into model bounds.
double global_sim(std::span<const double> query, std::span<const double> stored,
                  const CbrModel& model);
double global_sim(const Case& query, const Case& stored, const CbrModel& model);

struct Neighbor {
  CaseId id = 0;
  double similarity = 0.0;
  Label label = 0;

  bool operator==(const Neighbor&) const = default;
};

struct RetrievalResult {
  std::vector<Neighbor> neighbors;
  Label predicted_label = 0;
  std::optional<double> probability_default;

  /// Fraction of neighbors labelled 1.
  double vote_fraction() const;
  bool operator==(const RetrievalResult&) const = default;
};

struct RetrieveOptions {
  /// Skip a stored case whose id equals the query id (leave-one-out).
  bool exclude_same_id = true;
};

/// Positions of the k best entries: score descending, then id ascending.
/// `skip` (if set) is an id that must not be selected.
std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const CaseId> ids,
                               std::size_t k, std::optional<CaseId> skip = std::nullopt);

/// Majority vote over labels given in rank order. A tie (even k) goes to the
/// first, most similar, label.
Label majority_vote(std::span<const Label> ranked_labels);

/// The `count` most similar stored cases in retrieval order.
std::vector<Neighbor> ranked_neighbors(const CbrModel& model, const Case& query,
                                       std::size_t count, const RetrieveOptions& options = {});

/// Exact k most similar cases and their majority vote.
RetrievalResult retrieve(const CbrModel& model, const Case& query,
                         const RetrieveOptions& options = {});

/// Raised by batch_retrieve; carries the index of the failing query.
class BatchQueryError : public std::runtime_error {
 public:
  BatchQueryError(std::size_t index, const std::string& what)
      : std::runtime_error("query " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Element i equals retrieve(model, queries[i]) for any worker count
/// (0 = default worker count).
std::vector<RetrievalResult> batch_retrieve(const CbrModel& model, std::span<const Case> queries,
                                            std::size_t workers = 0,
                                            const RetrieveOptions& options = {});

/// Amdahl's law: 1 / ((1 - p) + p / s).
double amdahl_speedup(double parallel_fraction, std::size_t processors);

}  // namespace cbr
