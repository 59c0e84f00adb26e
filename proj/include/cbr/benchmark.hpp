#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cbr/data.hpp"
#include "cbr/designer.hpp"
#include "cbr/evaluation.hpp"
#include "cbr/similarity.hpp"

namespace cbr::benchmark {

enum class Kind { lr, knn, dt, gnb, mlp, lasso, cbr_ew, cbr_e };

std::string to_string(Kind kind);
/// Throws std::invalid_argument for an unknown name.
Kind kind_from_string(const std::string& name);
/// All kinds in report order.
std::vector<Kind> all_kinds();

using Hyperparameters = std::map<std::string, double>;

struct Predictions {
  std::vector<Label> labels;
  /// Class-1 score in [0, 1]; label is 1 exactly when score >= 0.5.
  std::vector<double> scores;
};

struct ClassifierOptions {
  /// When set, grid search is skipped.
  std::optional<Hyperparameters> fixed;
  std::size_t cv_folds = 5;
  /// Designer settings for cbr_e (its seed is overridden by fit's seed).
  designer::Options design;
};

/// Common train/predict interface. fit() picks hyperparameters by pooled
/// k-fold CV accuracy over the kind's grid (first grid entry wins ties),
/// then refits on the full training set.
class Classifier {
 public:
  explicit Classifier(ClassifierOptions options) : options_(std::move(options)) {}
  virtual ~Classifier() = default;

  virtual Kind kind() const = 0;
  /// Candidate hyperparameters in search order.
  virtual std::vector<Hyperparameters> grid() const = 0;

  void fit(const Dataset& train, std::uint64_t seed);
  /// Throws std::logic_error before fit().
  Predictions predict(std::span<const Case> cases) const;

  bool fitted() const { return fitted_; }
  const Hyperparameters& hyperparameters() const { return chosen_; }

 protected:
  virtual void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t seed) = 0;
  /// Class-1 scores; labels follow from the 0.5 threshold.
  virtual std::vector<double> score(std::span<const Case> cases) const = 0;

  ClassifierOptions options_;

 private:
  bool fitted_ = false;
  Hyperparameters chosen_;
};

std::unique_ptr<Classifier> make_classifier(Kind kind, ClassifierOptions options = {});

/// Equal-weight, unit-exponent CBR over `train`: w_j = 1/L, a = b = 1.
CbrModel cbr_ew(const Dataset& train, std::size_t k);

// Concrete kinds with state that tests inspect directly.

class GaussianNb final : public Classifier {
 public:
  using Classifier::Classifier;
  Kind kind() const override { return Kind::gnb; }
  std::vector<Hyperparameters> grid() const override { return {{}}; }

  /// Per class (index = label): feature means and variances (population,
  /// floored at 1e-9), and priors.
  std::vector<std::vector<double>> means, variances;
  std::vector<double> priors;

 protected:
  void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t seed) override;
  std::vector<double> score(std::span<const Case> cases) const override;
};

class Lasso final : public Classifier {
 public:
  using Classifier::Classifier;
  Kind kind() const override { return Kind::lasso; }
  std::vector<Hyperparameters> grid() const override;

  std::vector<double> coefficients;
  double intercept = 0.0;
  /// Unclamped linear output.
  double linear(std::span<const double> x) const;

 protected:
  void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t seed) override;
  std::vector<double> score(std::span<const Case> cases) const override;
};

/// Coordinate descent for (1/(2n)) ||y - Xw - b||^2 + lambda ||w||_1 with an
/// unpenalized intercept. Returns (w, b).
std::pair<std::vector<double>, double> lasso_solve(const std::vector<std::vector<double>>& x,
                                                   const std::vector<double>& y, double lambda,
                                                   std::size_t max_sweeps = 10000,
                                                   double tolerance = 1e-12);

/// L2-regularized logistic regression, objective
/// 0.5 ||w||^2 + C sum_i logloss_i with an unpenalized intercept, solved by
/// damped Newton steps. Returns (w, b).
std::pair<std::vector<double>, double> logistic_solve(const std::vector<std::vector<double>>& x,
                                                      const std::vector<Label>& y, double c);

struct BenchmarkOptions {
  std::vector<Kind> kinds = all_kinds();
  std::size_t samples = 10;
  double test_fraction = 0.2;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  designer::Options design;
  /// Invoked after every fitted classifier (for progress output).
  std::function<void(const evaluation::SampleResult&, double seconds)> on_result;
};

struct NamedDataset {
  std::string name;
  Dataset data;
};

/// For each dataset and sample: normalize, under-sample to balance, split,
/// fit every requested classifier on the training part and score it on the
/// test part with rank AUC.
std::vector<evaluation::SampleResult> run_benchmark(const std::vector<NamedDataset>& datasets,
                                                    const BenchmarkOptions& options);

}  // namespace cbr::benchmark
