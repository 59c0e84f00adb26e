#include "cbr/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "cbr/error.hpp"
#include "cbr/explain.hpp"
#include "cbr/metrics.hpp"
#include "cbr/random.hpp"

namespace cbr::benchmark {

namespace {

constexpr const char* kNames[] = {"lr", "knn", "dt", "gnb", "mlp", "lasso", "cbr_ew", "cbr_e"};

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<std::vector<double>> feature_rows(std::span<const Case> cases) {
  std::vector<std::vector<double>> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(c.features);
  return out;
}

std::vector<Hyperparameters> k_grid(const std::vector<std::size_t>& ks) {
  std::vector<Hyperparameters> out;
  for (auto k : ks) out.push_back({{"k", static_cast<double>(k)}});
  return out;
}

std::size_t min_train_size(const std::vector<std::vector<std::size_t>>& parts, std::size_t n) {
  std::size_t largest = 0;
  for (const auto& p : parts) largest = std::max(largest, p.size());
  return n - largest;
}

// ------------------------------------------------------------------- LR

class LogisticRegression final : public Classifier {
 public:
  using Classifier::Classifier;
  Kind kind() const override { return Kind::lr; }
  std::vector<Hyperparameters> grid() const override {
    return {{{"C", 0.01}}, {{"C", 0.1}}, {{"C", 1.0}}, {{"C", 10.0}}};
  }

 protected:
  void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t) override {
    std::vector<Label> y;
    for (const auto& r : train.rows) y.push_back(r.label);
    std::tie(w_, b_) = logistic_solve(feature_rows(train.rows), y, hp.at("C"));
  }
  std::vector<double> score(std::span<const Case> cases) const override {
    std::vector<double> out;
    for (const auto& c : cases) {
      double z = b_;
      for (std::size_t j = 0; j < w_.size(); ++j) z += w_[j] * c.features[j];
      out.push_back(sigmoid(z));
    }
    return out;
  }

 private:
  std::vector<double> w_;
  double b_ = 0.0;
};

// ------------------------------------------------------------------ KNN

class Knn final : public Classifier {
 public:
  using Classifier::Classifier;
  Kind kind() const override { return Kind::knn; }
  std::vector<Hyperparameters> grid() const override { return k_grid(designer::default_k_grid()); }

 protected:
  void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t) override {
    k_ = static_cast<std::size_t>(hp.at("k"));
    if (k_ == 0 || k_ > train.size()) throw DataError("knn: k out of range");
    rows_ = train.rows;
  }
  std::vector<double> score(std::span<const Case> cases) const override {
    std::vector<double> out;
    std::vector<double> neg_dist(rows_.size());
    std::vector<CaseId> ids(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) ids[i] = rows_[i].id;
    for (const auto& c : cases) {
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        double d = 0.0;
        for (std::size_t j = 0; j < c.features.size(); ++j) {
          const double diff = c.features[j] - rows_[i].features[j];
          d += diff * diff;
        }
        neg_dist[i] = -d;
      }
      const auto picked = top_k(neg_dist, ids, k_);
      double ones = 0.0;
      for (auto i : picked) ones += rows_[i].label == 1 ? 1.0 : 0.0;
      out.push_back(ones / static_cast<double>(k_));
    }
    return out;
  }

 private:
  std::size_t k_ = 1;
  std::vector<Case> rows_;
};

// ------------------------------------------------------------------- DT

class DecisionTree final : public Classifier {
 public:
  using Classifier::Classifier;
  Kind kind() const override { return Kind::dt; }
  std::vector<Hyperparameters> grid() const override {
    return {{{"max_depth", 3}}, {{"max_depth", 5}}, {{"max_depth", 8}}};
  }

 protected:
  void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t) override {
    tree_ = explain::build_tree(train, {static_cast<std::size_t>(hp.at("max_depth")), 5});
  }
  std::vector<double> score(std::span<const Case> cases) const override {
    std::vector<double> out;
    for (const auto& c : cases) {
      const explain::TreeNode* node = &tree_;
      while (!node->is_leaf()) {
        node = &node->children[c.features[*node->feature] <= node->threshold ? 0 : 1];
      }
      out.push_back(static_cast<double>(node->defaults) / static_cast<double>(node->size()));
    }
    return out;
  }

 private:
  explain::TreeNode tree_;
};

// ------------------------------------------------------------------ MLP

class Mlp final : public Classifier {
 public:
  using Classifier::Classifier;
  Kind kind() const override { return Kind::mlp; }
  std::vector<Hyperparameters> grid() const override {
    return {{{"hidden", 8}}, {{"hidden", 16}}, {{"hidden", 32}}};
  }

  static constexpr std::size_t kEpochs = 500;
  static constexpr double kLearningRate = 0.1;
  static constexpr std::size_t kBatch = 32;

 protected:
  void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t seed) override {
    const auto H = static_cast<Eigen::Index>(hp.at("hidden"));
    const auto L = static_cast<Eigen::Index>(train.feature_count());
    const auto n = static_cast<Eigen::Index>(train.size());
    Rng rng(seed);
    const double r1 = 1.0 / std::sqrt(static_cast<double>(L));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(H));
    w1_.resize(L, H);
    for (Eigen::Index j = 0; j < H; ++j)
      for (Eigen::Index i = 0; i < L; ++i) w1_(i, j) = rng.uniform(-r1, r1);
    b1_ = Eigen::VectorXd::Zero(H);
    w2_.resize(H);
    for (Eigen::Index j = 0; j < H; ++j) w2_(j) = rng.uniform(-r2, r2);
    b2_ = 0.0;

    Eigen::MatrixXd x(n, L);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) x(i, j) = train.rows[i].features[j];
      y(i) = train.rows[i].label;
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < kEpochs; ++epoch) {
      rng.shuffle(order.begin(), order.end());
      for (std::size_t start = 0; start < order.size(); start += kBatch) {
        const std::size_t stop = std::min(order.size(), start + kBatch);
        const auto m = static_cast<Eigen::Index>(stop - start);
        Eigen::MatrixXd xb(m, L);
        Eigen::VectorXd yb(m);
        for (Eigen::Index r = 0; r < m; ++r) {
          xb.row(r) = x.row(order[start + static_cast<std::size_t>(r)]);
          yb(r) = y(order[start + static_cast<std::size_t>(r)]);
        }
        Eigen::MatrixXd a = ((xb * w1_).rowwise() + b1_.transpose()).unaryExpr(&sigmoid);
        Eigen::VectorXd out = ((a * w2_).array() + b2_).unaryExpr(&sigmoid);
        const Eigen::VectorXd dz2 = (out - yb) / static_cast<double>(m);
        const Eigen::VectorXd g_w2 = a.transpose() * dz2;
        const double g_b2 = dz2.sum();
        const Eigen::MatrixXd dz1 =
            ((dz2 * w2_.transpose()).array() * a.array() * (1.0 - a.array())).matrix();
        w1_ -= kLearningRate * (xb.transpose() * dz1);
        b1_ -= kLearningRate * dz1.colwise().sum().transpose();
        w2_ -= kLearningRate * g_w2;
        b2_ -= kLearningRate * g_b2;
      }
    }
  }
  std::vector<double> score(std::span<const Case> cases) const override {
    std::vector<double> out;
    for (const auto& c : cases) {
      const Eigen::Map<const Eigen::RowVectorXd> x(c.features.data(),
                                                   static_cast<Eigen::Index>(c.features.size()));
      const Eigen::RowVectorXd a = (x * w1_ + b1_.transpose()).unaryExpr(&sigmoid);
      out.push_back(sigmoid(a.dot(w2_) + b2_));
    }
    return out;
  }

 private:
  Eigen::MatrixXd w1_;
  Eigen::VectorXd b1_;
  Eigen::VectorXd w2_;
  double b2_ = 0.0;
};

// ------------------------------------------------------------------ CBR

class CbrClassifier final : public Classifier {
 public:
  CbrClassifier(ClassifierOptions options, bool designed)
      : Classifier(std::move(options)), designed_(designed) {}
  Kind kind() const override { return designed_ ? Kind::cbr_e : Kind::cbr_ew; }
  std::vector<Hyperparameters> grid() const override {
    if (designed_) return {{}};
    return k_grid(designer::default_k_grid());
  }

 protected:
  void fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t seed) override {
    if (!designed_) {
      model_ = cbr_ew(train, static_cast<std::size_t>(hp.at("k")));
      return;
    }
    auto opts = options_.design;
    opts.seed = seed;
    const auto parts =
        fold_indices(train, opts.folds, derive_seed(seed, seed_stream::folds));
    const std::size_t limit = min_train_size(parts, train.size());
    std::erase_if(opts.k_grid, [&](std::size_t k) { return k >= limit; });
    if (opts.k_grid.empty()) throw DataError("cbr_e: training set too small for the k grid");
    model_ = designer::design(train, opts).model;
  }
  std::vector<double> score(std::span<const Case> cases) const override {
    const auto results = batch_retrieve(model_, cases, 1, {.exclude_same_id = false});
    std::vector<double> out;
    for (const auto& r : results) out.push_back(r.vote_fraction());
    return out;
  }

 private:
  bool designed_;
  CbrModel model_;
};

}  // namespace

std::string to_string(Kind kind) { return kNames[static_cast<int>(kind)]; }

Kind kind_from_string(const std::string& name) {
  for (int i = 0; i < 8; ++i) {
    if (name == kNames[i]) return static_cast<Kind>(i);
  }
  throw std::invalid_argument("unknown classifier: " + name);
}

std::vector<Kind> all_kinds() {
  return {Kind::lr, Kind::knn, Kind::dt, Kind::gnb, Kind::mlp, Kind::lasso, Kind::cbr_ew, Kind::cbr_e};
}

void Classifier::fit(const Dataset& train, std::uint64_t seed) {
  const auto [n0, n1] = train.class_counts();
  if (n0 == 0 || n1 == 0) throw DataError(to_string(kind()) + ": training data needs both classes");

  std::vector<Hyperparameters> candidates =
      options_.fixed ? std::vector<Hyperparameters>{*options_.fixed} : grid();
  if (candidates.size() > 1) {
    const auto parts =
        fold_indices(train, options_.cv_folds, derive_seed(seed, seed_stream::folds));
    const std::size_t limit = min_train_size(parts, train.size());
    std::erase_if(candidates, [&](const Hyperparameters& hp) {
      const auto it = hp.find("k");
      return it != hp.end() && it->second >= static_cast<double>(limit);
    });
    if (candidates.empty()) throw DataError(to_string(kind()) + ": no feasible grid entry");

    std::size_t best = 0;
    std::size_t best_correct = 0;
    for (std::size_t g = 0; g < candidates.size() && candidates.size() > 1; ++g) {
      std::size_t correct = 0;
      for (const auto& validation : parts) {
        std::vector<bool> held(train.size(), false);
        for (auto i : validation) held[i] = true;
        std::vector<Case> fit_rows, val_rows;
        for (std::size_t i = 0; i < train.size(); ++i) {
          (held[i] ? val_rows : fit_rows).push_back(train.rows[i]);
        }
        fit_with(train.with_rows(std::move(fit_rows)), candidates[g], seed);
        const auto scores = score(val_rows);
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
          correct += (scores[i] >= 0.5 ? 1 : 0) == val_rows[i].label ? 1 : 0;
        }
      }
      if (g == 0 || correct > best_correct) {
        best = g;
        best_correct = correct;
      }
    }
    candidates = {candidates[best]};
  }
  fit_with(train, candidates.front(), seed);
  chosen_ = candidates.front();
  fitted_ = true;
}

Predictions Classifier::predict(std::span<const Case> cases) const {
  if (!fitted_) throw std::logic_error(to_string(kind()) + ": predict before fit");
  Predictions out;
  out.scores = score(cases);
  for (double& s : out.scores) {
    s = std::clamp(s, 0.0, 1.0);
    out.labels.push_back(s >= 0.5 ? 1 : 0);
  }
  return out;
}

CbrModel cbr_ew(const Dataset& train, std::size_t k) {
  const std::size_t L = train.feature_count();
  return make_model(train, k, GlobalWeights::uniform(L), LocalParams::uniform(L));
}

// ------------------------------------------------------------------ GNB

void GaussianNb::fit_with(const Dataset& train, const Hyperparameters&, std::uint64_t) {
  const std::size_t L = train.feature_count();
  means.assign(2, std::vector<double>(L, 0.0));
  variances.assign(2, std::vector<double>(L, 0.0));
  std::vector<double> counts(2, 0.0);
  for (const auto& r : train.rows) {
    counts[r.label] += 1.0;
    for (std::size_t j = 0; j < L; ++j) means[r.label][j] += r.features[j];
  }
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < L; ++j) means[c][j] /= counts[c];
  for (const auto& r : train.rows) {
    for (std::size_t j = 0; j < L; ++j) {
      const double d = r.features[j] - means[r.label][j];
      variances[r.label][j] += d * d;
    }
  }
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < L; ++j) variances[c][j] = std::max(variances[c][j] / counts[c], 1e-9);
  const double n = counts[0] + counts[1];
  priors = {counts[0] / n, counts[1] / n};
}

std::vector<double> GaussianNb::score(std::span<const Case> cases) const {
  constexpr double kLog2Pi = 1.8378770664093453;
  std::vector<double> out;
  for (const auto& c : cases) {
    double log_joint[2];
    for (int k = 0; k < 2; ++k) {
      double lj = std::log(priors[k]);
      for (std::size_t j = 0; j < c.features.size(); ++j) {
        const double d = c.features[j] - means[k][j];
        lj -= 0.5 * (kLog2Pi + std::log(variances[k][j]) + d * d / variances[k][j]);
      }
      log_joint[k] = lj;
    }
    out.push_back(sigmoid(log_joint[1] - log_joint[0]));
  }
  return out;
}

// ---------------------------------------------------------------- LASSO

std::vector<Hyperparameters> Lasso::grid() const {
  return {{{"lambda", 1e-3}}, {{"lambda", 1e-2}}, {{"lambda", 1e-1}}, {{"lambda", 1.0}}};
}

double Lasso::linear(std::span<const double> x) const {
  double z = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) z += coefficients[j] * x[j];
  return z;
}

void Lasso::fit_with(const Dataset& train, const Hyperparameters& hp, std::uint64_t) {
  std::vector<double> y;
  for (const auto& r : train.rows) y.push_back(r.label);
  std::tie(coefficients, intercept) = lasso_solve(feature_rows(train.rows), y, hp.at("lambda"));
}

std::vector<double> Lasso::score(std::span<const Case> cases) const {
  std::vector<double> out;
  for (const auto& c : cases) out.push_back(std::clamp(linear(c.features), 0.0, 1.0));
  return out;
}

std::pair<std::vector<double>, double> lasso_solve(const std::vector<std::vector<double>>& x,
                                                   const std::vector<double>& y, double lambda,
                                                   std::size_t max_sweeps, double tolerance) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) throw std::invalid_argument("lasso: bad input sizes");
  if (lambda < 0.0) throw std::invalid_argument("lasso: lambda must be non-negative");
  const std::size_t L = x.front().size();
  const double dn = static_cast<double>(n);

  std::vector<double> x_mean(L, 0.0);
  double y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y_mean += y[i];
    for (std::size_t j = 0; j < L; ++j) x_mean[j] += x[i][j];
  }
  y_mean /= dn;
  for (double& m : x_mean) m /= dn;

  std::vector<std::vector<double>> xc(L, std::vector<double>(n));  // column-major, centered
  std::vector<double> col_sq(L, 0.0);
  for (std::size_t j = 0; j < L; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      xc[j][i] = x[i][j] - x_mean[j];
      col_sq[j] += xc[j][i] * xc[j][i];
    }
    col_sq[j] /= dn;
  }
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - y_mean;

  std::vector<double> w(L, 0.0);
  bool converged = false;
  for (std::size_t sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      if (col_sq[j] == 0.0) continue;
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) rho += xc[j][i] * residual[i];
      rho = rho / dn + col_sq[j] * w[j];
      const double shrunk = std::copysign(std::max(std::fabs(rho) - lambda, 0.0), rho);
      const double updated = shrunk / col_sq[j];
      const double change = updated - w[j];
      if (change != 0.0) {
        for (std::size_t i = 0; i < n; ++i) residual[i] -= change * xc[j][i];
        w[j] = updated;
      }
      max_change = std::max(max_change, std::fabs(change));
    }
    converged = max_change < tolerance;
  }
  if (!converged) {
    double loss = 0.0;
    for (double r : residual) loss += r * r;
    std::cerr << "warning: lasso did not converge; final loss " << loss / (2.0 * dn) << "\n";
  }
  double b = y_mean;
  for (std::size_t j = 0; j < L; ++j) b -= w[j] * x_mean[j];
  return {w, b};
}

std::pair<std::vector<double>, double> logistic_solve(const std::vector<std::vector<double>>& x,
                                                      const std::vector<Label>& y, double c) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n == 0 || y.size() != x.size()) throw std::invalid_argument("logistic: bad input sizes");
  if (!(c > 0.0)) throw std::invalid_argument("logistic: C must be positive");
  const auto L = static_cast<Eigen::Index>(x.front().size());
  Eigen::MatrixXd X(n, L + 1);
  Eigen::VectorXd Y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < L; ++j) X(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    X(i, L) = 1.0;
    Y(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Ones(L + 1);
  penalty(L) = 0.0;

  auto objective = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd z = X * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += softplus(z(i)) - Y(i) * z(i);
    return 0.5 * beta.cwiseProduct(penalty).squaredNorm() + c * total;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(L + 1);
  double f = objective(beta);
  bool converged = false;
  for (int it = 0; it < 100 && !converged; ++it) {
    const Eigen::VectorXd z = X * beta;
    Eigen::VectorXd p(n), s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(z(i));
      s(i) = p(i) * (1.0 - p(i));
    }
    const Eigen::VectorXd grad = beta.cwiseProduct(penalty) + c * X.transpose() * (p - Y);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-10 * std::max(1.0, f)) {
      converged = true;
      break;
    }
    Eigen::MatrixXd hessian = c * X.transpose() * s.asDiagonal() * X;
    hessian.diagonal() += penalty;
    hessian(L, L) += 1e-12;
    const Eigen::VectorXd step = hessian.ldlt().solve(grad);
    double t = 1.0;
    Eigen::VectorXd next = beta - step;
    double f_next = objective(next);
    while (f_next > f - 1e-4 * t * grad.dot(step) && t > 1e-10) {
      t *= 0.5;
      next = beta - t * step;
      f_next = objective(next);
    }
    if (f - f_next <= 1e-14 * std::max(1.0, std::fabs(f))) converged = true;
    if (f_next <= f) {
      beta = next;
      f = f_next;
    }
  }
  if (!converged) std::cerr << "warning: logistic regression did not converge; final loss " << f << "\n";
  std::vector<double> w(beta.data(), beta.data() + L);
  return {w, beta(L)};
}

std::unique_ptr<Classifier> make_classifier(Kind kind, ClassifierOptions options) {
  switch (kind) {
    case Kind::lr: return std::make_unique<LogisticRegression>(std::move(options));
    case Kind::knn: return std::make_unique<Knn>(std::move(options));
    case Kind::dt: return std::make_unique<DecisionTree>(std::move(options));
    case Kind::gnb: return std::make_unique<GaussianNb>(std::move(options));
    case Kind::mlp: return std::make_unique<Mlp>(std::move(options));
    case Kind::lasso: return std::make_unique<Lasso>(std::move(options));
    case Kind::cbr_ew: return std::make_unique<CbrClassifier>(std::move(options), false);
    case Kind::cbr_e: return std::make_unique<CbrClassifier>(std::move(options), true);
  }
  throw std::invalid_argument("unknown classifier kind");
}

std::vector<evaluation::SampleResult> run_benchmark(const std::vector<NamedDataset>& datasets,
                                                    const BenchmarkOptions& options) {
  std::vector<evaluation::SampleResult> out;
  for (const auto& named : datasets) {
    const Dataset normalized = normalize(named.data);
    for (std::size_t s = 0; s < options.samples; ++s) {
      const std::uint64_t sample_seed = derive_seed(options.seed, s);
      const Dataset balanced =
          undersample(normalized, derive_seed(sample_seed, seed_stream::undersample));
      const auto parts = split(balanced, {options.test_fraction, options.folds,
                                          derive_seed(sample_seed, seed_stream::split)});
      std::vector<Label> truth;
      for (const auto& r : parts.test.rows) truth.push_back(r.label);

      for (auto kind : options.kinds) {
        const auto started = std::chrono::steady_clock::now();
        ClassifierOptions copts;
        copts.cv_folds = options.folds;
        copts.design = options.design;
        copts.design.folds = options.folds;
        auto clf = make_classifier(kind, copts);
        clf->fit(parts.train,
                 derive_seed(derive_seed(sample_seed, seed_stream::classifier),
                             static_cast<std::uint64_t>(kind)));
        const auto pred = clf->predict(parts.test.rows);
        const auto cm = metrics::confusion(pred.labels, truth);
        evaluation::SampleResult result{named.name, to_string(kind), s,
                                        metrics::compute_metrics(cm, pred.scores, truth)};
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (options.on_result) options.on_result(result, seconds);
        out.push_back(std::move(result));
      }
    }
  }
  return out;
}

}  // namespace cbr::benchmark
