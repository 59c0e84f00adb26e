#include "cbr/similarity.hpp"

#include <algorithm>
#include <numeric>

#include "cbr/parallel.hpp"

namespace cbr {

GlobalWeights GlobalWeights::from_scores(std::span<const double> scores) {
  double total = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("weights: scores must be finite and non-negative");
    }
    total += s;
  }
  if (total <= 0.0) return uniform(scores.size());
  GlobalWeights out;
  out.w.reserve(scores.size());
  for (double s : scores) out.w.push_back(s / total);
  return out;
}

std::vector<double> CbrModel::ranges_diff() const {
  std::vector<double> out;
  out.reserve(bounds.size());
  for (const auto& r : bounds) out.push_back(r.width());
  return out;
}

void CbrModel::validate() const {
  const std::size_t L = weights.w.size();
  if (case_base.empty()) throw std::invalid_argument("model: empty case base");
  if (case_base.feature_count() != L || locals.a.size() != L || locals.b.size() != L ||
      bounds.size() != L) {
    throw std::invalid_argument("model: inconsistent feature dimensions");
  }
  if (k == 0 || k > case_base.size()) throw std::invalid_argument("model: k out of range");
  double total = 0.0;
  for (double w : weights.w) {
    if (!(w >= 0.0)) throw std::invalid_argument("model: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("model: weights do not sum to 1");
  for (std::size_t j = 0; j < L; ++j) {
    if (!(locals.a[j] > 0.0) || !(locals.b[j] > 0.0) || !std::isfinite(locals.a[j]) ||
        !std::isfinite(locals.b[j])) {
      throw std::invalid_argument("model: exponents must be positive and finite");
    }
    if (!(bounds[j].min <= bounds[j].max)) throw std::invalid_argument("model: bad bounds");
  }
  for (const auto& row : case_base.rows) {
    if (row.features.size() != L) throw std::invalid_argument("model: case width mismatch");
  }
}

std::vector<FeatureRange> model_bounds(const Dataset& d) {
  if (!d.normalized) return d.ranges;
  std::vector<FeatureRange> out;
  out.reserve(d.ranges.size());
  for (const auto& r : d.ranges) out.push_back({0.0, r.width() > 0.0 ? 1.0 : 0.0});
  return out;
}

CbrModel make_model(Dataset case_base, std::size_t k, GlobalWeights weights, LocalParams locals) {
  CbrModel m;
  m.bounds = model_bounds(case_base);
  m.case_base = std::move(case_base);
  m.k = k;
  m.weights = std::move(weights);
  m.locals = std::move(locals);
  m.validate();
  return m;
}

double local_sim(double q, double c, double a, double b, double range) {
  if (!std::isfinite(q) || !std::isfinite(c) || !std::isfinite(a) || !std::isfinite(b) ||
      !std::isfinite(range)) {
    throw std::invalid_argument("local_sim: non-finite input");
  }
  if (!(a > 0.0) || !(b > 0.0) || range < 0.0) {
    throw std::invalid_argument("local_sim: exponents must be positive and range non-negative");
  }
  if (range == 0.0) return 1.0;
  if (std::fabs(q - c) > range) {
    throw std::invalid_argument("local_sim: |q - c| exceeds the feature range");
  }
  const double exponent = q <= c ? a : b;
  return std::exp(exponent * log_similarity_base(q, c, range));
}

namespace {

double squared_similarity(std::span<const double> query, std::span<const double> stored,
                          const CbrModel& model) {
  const auto& w = model.weights.w;
  const auto& a = model.locals.a;
  const auto& b = model.locals.b;
  double total = 0.0;
  for (std::size_t j = 0; j < query.size(); ++j) {
    const double range = model.bounds[j].width();
    const double exponent = query[j] <= stored[j] ? a[j] : b[j];
    total += weighted_square_term(w[j], exponent, log_similarity_base(query[j], stored[j], range));
  }
  return total;
}

std::vector<double> clamped(std::span<const double> query, const CbrModel& model) {
  if (query.size() != model.feature_count()) {
    throw std::invalid_argument("similarity: query dimension mismatch");
  }
  std::vector<double> q(query.begin(), query.end());
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (!std::isfinite(q[j])) throw std::invalid_argument("similarity: non-finite query value");
    q[j] = std::clamp(q[j], model.bounds[j].min, model.bounds[j].max);
  }
  return q;
}

}  // namespace

double global_sim(std::span<const double> query, std::span<const double> stored,
                  const CbrModel& model) {
  if (stored.size() != model.feature_count()) {
    throw std::invalid_argument("similarity: case dimension mismatch");
  }
  const auto q = clamped(query, model);
  return std::sqrt(squared_similarity(q, stored, model));
}

double global_sim(const Case& query, const Case& stored, const CbrModel& model) {
  return global_sim(query.features, stored.features, model);
}

double RetrievalResult::vote_fraction() const {
  if (neighbors.empty()) return 0.0;
  std::size_t ones = 0;
  for (const auto& n : neighbors) ones += n.label == 1 ? 1 : 0;
  return static_cast<double>(ones) / static_cast<double>(neighbors.size());
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const CaseId> ids,
                               std::size_t k, std::optional<CaseId> skip) {
  std::vector<std::size_t> order;
  order.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!skip || ids[i] != *skip) order.push_back(i);
  }
  if (k > order.size()) throw std::invalid_argument("retrieve: k exceeds available cases");
  auto better = [&](std::size_t x, std::size_t y) {
    if (scores[x] != scores[y]) return scores[x] > scores[y];
    return ids[x] < ids[y];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    better);
  order.resize(k);
  return order;
}

Label majority_vote(std::span<const Label> ranked_labels) {
  if (ranked_labels.empty()) throw std::invalid_argument("vote: no neighbors");
  std::size_t ones = 0;
  for (Label l : ranked_labels) ones += l == 1 ? 1 : 0;
  const std::size_t zeros = ranked_labels.size() - ones;
  if (ones == zeros) return ranked_labels.front();
  return ones > zeros ? 1 : 0;
}

std::vector<Neighbor> ranked_neighbors(const CbrModel& model, const Case& query,
                                       std::size_t count, const RetrieveOptions& options) {
  if (model.case_base.empty()) throw std::invalid_argument("retrieve: empty case base");
  const auto q = clamped(query.features, model);
  const auto& rows = model.case_base.rows;

  std::vector<double> scores(rows.size());
  std::vector<CaseId> ids(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    scores[i] = squared_similarity(q, rows[i].features, model);
    ids[i] = rows[i].id;
  }
  const auto picked = top_k(scores, ids, count,
                            options.exclude_same_id ? std::optional<CaseId>(query.id)
                                                    : std::nullopt);
  std::vector<Neighbor> out;
  out.reserve(picked.size());
  for (auto i : picked) out.push_back({ids[i], std::sqrt(scores[i]), rows[i].label});
  return out;
}

RetrievalResult retrieve(const CbrModel& model, const Case& query,
                         const RetrieveOptions& options) {
  RetrievalResult out;
  out.neighbors = ranked_neighbors(model, query, model.k, options);
  std::vector<Label> labels;
  labels.reserve(out.neighbors.size());
  for (const auto& n : out.neighbors) labels.push_back(n.label);
  out.predicted_label = majority_vote(labels);
  return out;
}

std::vector<RetrievalResult> batch_retrieve(const CbrModel& model, std::span<const Case> queries,
                                            std::size_t workers,
                                            const RetrieveOptions& options) {
  std::vector<RetrievalResult> out(queries.size());
  parallel_for(queries.size(), workers, [&](std::size_t i) {
    try {
      out[i] = retrieve(model, queries[i], options);
    } catch (const std::exception& e) {
      throw BatchQueryError(i, e.what());
    }
  });
  return out;
}

double amdahl_speedup(double parallel_fraction, std::size_t processors) {
  if (!(parallel_fraction >= 0.0 && parallel_fraction <= 1.0) || processors == 0) {
    throw std::invalid_argument("amdahl: p must lie in [0,1] and s must be positive");
  }
  return 1.0 / ((1.0 - parallel_fraction) +
                parallel_fraction / static_cast<double>(processors));
}

}  // namespace cbr
