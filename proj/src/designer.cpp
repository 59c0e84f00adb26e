#include "cbr/designer.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <stdexcept>
#include <unordered_map>

#include "cbr/error.hpp"
#include "cbr/random.hpp"

namespace cbr::designer {

CvGeometry::CvGeometry(const Dataset& data, std::size_t folds, std::uint64_t seed,
                       CvOptions options)
    : features_(data.feature_count()) {
  const auto parts = fold_indices(data, folds, seed);
  const auto bounds = model_bounds(data);
  for (const auto& row : data.rows) {
    truth_.push_back(row.label);
    ids_.push_back(row.id);
  }

  const std::size_t L = features_;
  tables_.resize(L);
  // Per feature and side: bit pattern of the log base -> table index.
  std::vector<std::array<std::unordered_map<std::uint64_t, std::uint32_t>, 2>> seen(L);
  auto intern = [&](std::size_t j, double lb, unsigned char above) {
    auto& map = seen[j][above];
    const auto [it, fresh] = map.try_emplace(std::bit_cast<std::uint64_t>(lb),
                                             static_cast<std::uint32_t>(tables_[j].log_base.size()));
    if (fresh) {
      tables_[j].log_base.push_back(lb);
      tables_[j].above.push_back(above);
    }
    return it->second;
  };

  for (const auto& validation : parts) {
    FoldBlock block;
    block.validation = validation;
    std::vector<bool> held_out(data.size(), false);
    for (auto i : validation) held_out[i] = true;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (held_out[i]) continue;
      block.train.push_back(i);
      block.train_ids.push_back(data.rows[i].id);
      block.train_labels.push_back(data.rows[i].label);
    }
    const std::size_t T = block.train.size();
    block.entry.resize(validation.size() * T * L);
    for (std::size_t v = 0; v < validation.size(); ++v) {
      const auto& q_raw = data.rows[validation[v]].features;
      std::vector<double> q(L);
      for (std::size_t j = 0; j < L; ++j) q[j] = std::clamp(q_raw[j], bounds[j].min, bounds[j].max);
      bool self = false;
      for (std::size_t t = 0; t < T; ++t) {
        const auto& c = data.rows[block.train[t]].features;
        const std::size_t base = (v * T + t) * L;
        for (std::size_t j = 0; j < L; ++j) {
          block.entry[base + j] = intern(j, log_similarity_base(q[j], c[j], bounds[j].width()),
                                         q[j] <= c[j] ? 0 : 1);
        }
        self = self || block.train_ids[t] == data.rows[validation[v]].id;
      }
      block.skip_self.push_back(options.exclude_same_id && self);
    }
    blocks_.push_back(std::move(block));
  }
}

std::size_t CvGeometry::min_train_size() const {
  std::size_t out = ids_.size();
  for (const auto& b : blocks_) out = std::min(out, b.train.size());
  return out;
}

std::vector<Label> CvGeometry::predictions(const ModelTemplate& tmpl) const {
  const std::size_t L = features_;
  if (tmpl.weights.w.size() != L || tmpl.locals.a.size() != L || tmpl.locals.b.size() != L) {
    throw std::invalid_argument("cv: template dimension mismatch");
  }
  std::vector<std::vector<double>> terms(L);
  for (std::size_t j = 0; j < L; ++j) {
    const auto& table = tables_[j];
    terms[j].resize(table.log_base.size());
    for (std::size_t e = 0; e < table.log_base.size(); ++e) {
      const double exponent = table.above[e] ? tmpl.locals.b[j] : tmpl.locals.a[j];
      terms[j][e] = weighted_square_term(tmpl.weights.w[j], exponent, table.log_base[e]);
    }
  }

  std::vector<Label> out(truth_.size(), 0);
  std::vector<double> scores;
  std::vector<Label> ranked;
  for (const auto& block : blocks_) {
    const std::size_t T = block.train.size();
    scores.resize(T);
    for (std::size_t v = 0; v < block.validation.size(); ++v) {
      for (std::size_t t = 0; t < T; ++t) {
        const std::uint32_t* entry = &block.entry[(v * T + t) * L];
        double total = 0.0;
        for (std::size_t j = 0; j < L; ++j) total += terms[j][entry[j]];
        scores[t] = total;
      }
      const std::size_t row = block.validation[v];
      const auto picked =
          top_k(scores, block.train_ids, tmpl.k,
                block.skip_self[v] ? std::optional<CaseId>(ids_[row]) : std::nullopt);
      ranked.clear();
      for (auto i : picked) ranked.push_back(block.train_labels[i]);
      out[row] = majority_vote(ranked);
    }
  }
  return out;
}

double CvGeometry::accuracy(const ModelTemplate& tmpl) const {
  const auto predicted = predictions(tmpl);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == truth_[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double evaluate_cv(const ModelTemplate& tmpl, const Dataset& train, std::size_t folds,
                   std::uint64_t seed, CvOptions options) {
  return CvGeometry(train, folds, seed, options).accuracy(tmpl);
}

std::vector<std::size_t> default_k_grid() { return {1, 3, 5, 7, 9, 11, 13, 15}; }

std::size_t select_k(const CvGeometry& geometry, const std::vector<std::size_t>& grid) {
  if (grid.empty()) throw std::invalid_argument("select_k: empty grid");
  for (auto k : grid) {
    if (k % 2 == 0) throw std::invalid_argument("select_k: grid values must be odd");
    if (k >= geometry.min_train_size()) {
      throw DataError("select_k: k = " + std::to_string(k) + " is not below the fold size");
    }
  }
  const std::size_t L = geometry.feature_count();
  ModelTemplate tmpl{0, GlobalWeights::uniform(L), LocalParams::uniform(L)};
  std::size_t best_k = 0;
  double best_acc = -1.0;
  for (auto k : grid) {
    tmpl.k = k;
    const double acc = geometry.accuracy(tmpl);
    if (acc > best_acc || (acc == best_acc && k < best_k)) {
      best_acc = acc;
      best_k = k;
    }
  }
  return best_k;
}

std::size_t select_k(const Dataset& train, const std::vector<std::size_t>& grid,
                     std::size_t folds, std::uint64_t seed) {
  return select_k(CvGeometry(train, folds, seed), grid);
}

LocalParams unpack_exponents(std::span<const double> position) {
  const std::size_t L = position.size() / 2;
  LocalParams out;
  out.a.assign(position.begin(), position.begin() + static_cast<std::ptrdiff_t>(L));
  out.b.assign(position.begin() + static_cast<std::ptrdiff_t>(L), position.end());
  return out;
}

DesignReport design(const Dataset& train, const Options& options) {
  const auto [n0, n1] = train.class_counts();
  if (n0 == 0 || n1 == 0) throw DataError("design: training data needs both classes");
  if (options.schemes.empty()) throw std::invalid_argument("design: no weighting schemes");

  const CvGeometry geometry(train, options.folds, derive_seed(options.seed, seed_stream::folds));
  DesignReport report;
  report.chosen_k = select_k(geometry, options.k_grid);

  const std::size_t L = train.feature_count();
  std::size_t best = 0;
  for (std::size_t s = 0; s < options.schemes.size(); ++s) {
    const auto& scheme = options.schemes[s];
    const auto started = std::chrono::steady_clock::now();

    SchemeOutcome outcome;
    outcome.scheme = scheme.name;
    outcome.weights = scoring::score_features(
        train, scheme, derive_seed(derive_seed(options.seed, seed_stream::scoring), s));

    pso::Config config;
    config.swarm_size = options.pso_swarm;
    config.iterations = options.pso_iterations;
    config.inertia = options.pso_inertia;
    config.c1 = options.pso_c1;
    config.c2 = options.pso_c2;
    config.bounds.assign(2 * L, {options.exponent_low, options.exponent_high});
    config.seed = derive_seed(derive_seed(options.pso_seed.value_or(options.seed), seed_stream::pso), s);
    config.workers = options.workers;

    const std::size_t k = report.chosen_k;
    const GlobalWeights& weights = outcome.weights;
    auto cost = [&](std::span<const double> position) {
      return 1.0 - geometry.accuracy({k, weights, unpack_exponents(position)});
    };
    const auto fitted = pso::optimize(cost, config);

    outcome.locals = unpack_exponents(fitted.best_position);
    outcome.cv_accuracy = geometry.accuracy({k, weights, outcome.locals});
    outcome.evaluations = fitted.evaluations;
    outcome.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.per_scheme.push_back(std::move(outcome));
    if (report.per_scheme.back().cv_accuracy > report.per_scheme[best].cv_accuracy) best = s;
  }

  const auto& winner = report.per_scheme[best];
  report.winner = winner.scheme;
  report.model = make_model(train, report.chosen_k, winner.weights, winner.locals);
  return report;
}

}  // namespace cbr::designer
