#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbr/data.hpp"
#include "cbr/pso.hpp"
#include "cbr/scoring.hpp"
#include "cbr/similarity.hpp"

namespace cbr::designer {

/// Everything a CBR classifier needs except the case base.
struct ModelTemplate {
  std::size_t k = 1;
  GlobalWeights weights;
  LocalParams locals;
};

struct CvOptions {
  bool exclude_same_id = true;
};

/// Cached similarity geometry of one fold partition of a dataset.
///
/// For every (validation case, training case, feature) triple it stores an
/// index into a per-feature table of distinct (log similarity base, exponent
/// side) pairs. Scoring a template evaluates each table once and then sums
/// lookups. Rankings and votes match retrieve() on a
/// model built from each training fold exactly.
class CvGeometry {
 public:
  CvGeometry(const Dataset& data, std::size_t folds, std::uint64_t seed,
             CvOptions options = {});

  /// Predicted labels for every row of the dataset, each from the fold in
  /// which it was held out.
  std::vector<Label> predictions(const ModelTemplate& tmpl) const;

  /// Pooled accuracy over all held-out rows.
  double accuracy(const ModelTemplate& tmpl) const;

  std::size_t feature_count() const { return features_; }
  /// Smallest training-fold size.
  std::size_t min_train_size() const;
  const std::vector<Label>& truth() const { return truth_; }

 private:
  struct FoldBlock {
    std::vector<std::size_t> validation;  // dataset row indices
    std::vector<std::size_t> train;       // dataset row indices
    std::vector<CaseId> train_ids;
    std::vector<Label> train_labels;
    std::vector<std::uint32_t> entry;     // [v][t][j] -> index into feature j's table
    std::vector<bool> skip_self;          // per validation row: own id present in train
  };

  /// Distinct (log base, exponent side) pairs seen for one feature.
  struct FeatureTable {
    std::vector<double> log_base;
    std::vector<unsigned char> above;  // 1 if query value > case value
  };

  std::size_t features_ = 0;
  std::vector<FoldBlock> blocks_;
  std::vector<FeatureTable> tables_;
  std::vector<Label> truth_;
  std::vector<CaseId> ids_;
};

/// Stratified k-fold pooled accuracy of `tmpl`. Equals the accuracy of the
/// concatenated held-out predictions.
double evaluate_cv(const ModelTemplate& tmpl, const Dataset& train, std::size_t folds,
                   std::uint64_t seed, CvOptions options = {});

/// k from `grid` maximizing CV accuracy of the equal-weight, unit-exponent
/// classifier; ties go to the smallest k.
std::size_t select_k(const Dataset& train, const std::vector<std::size_t>& grid,
                     std::size_t folds, std::uint64_t seed);
std::size_t select_k(const CvGeometry& geometry, const std::vector<std::size_t>& grid);

std::vector<std::size_t> default_k_grid();

struct Options {
  std::vector<std::size_t> k_grid = default_k_grid();
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  /// Root of the PSO seed stream; defaults to `seed`.
  std::optional<std::uint64_t> pso_seed;
  std::size_t pso_swarm = 20;
  std::size_t pso_iterations = 50;
  double pso_inertia = 0.7;
  double pso_c1 = 1.5;
  double pso_c2 = 1.5;
  double exponent_low = 0.1;
  double exponent_high = 5.0;
  /// Worker threads for particle evaluation (0 = default).
  std::size_t workers = 1;
  std::vector<scoring::WeightingScheme> schemes = scoring::available_schemes();
};

struct SchemeOutcome {
  std::string scheme;
  double cv_accuracy = 0.0;
  GlobalWeights weights;
  LocalParams locals;
  std::size_t evaluations = 0;
  double seconds = 0.0;
};

struct DesignReport {
  std::size_t chosen_k = 1;
  std::vector<SchemeOutcome> per_scheme;
  std::string winner;
  CbrModel model;
};

/// Exponent vector layout used by the swarm: [a_1..a_L, b_1..b_L].
LocalParams unpack_exponents(std::span<const double> position);

/// Data-driven design: fix k by grid search, then for each weighting scheme
/// fit the local exponents with PSO against CV accuracy, and keep the
/// best-validated scheme (first in scheme order on ties). All schemes share
/// one fold partition.
DesignReport design(const Dataset& train, const Options& options);

}  // namespace cbr::designer
