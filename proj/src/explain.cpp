#include "cbr/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cbr/error.hpp"
#include "cbr/random.hpp"

namespace cbr::explain {

namespace {

std::vector<double> raw_values(const Dataset& schema, std::span<const double> values) {
  std::vector<double> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) out[j] = schema.denormalize(j, values[j]);
  return out;
}

ExplainedCase explained(const CbrModel& model, const Neighbor& n,
                        const std::vector<std::size_t>& row_of_id) {
  const auto& row = model.case_base.rows[row_of_id.at(n.id)];
  return {n.id, n.similarity, n.label, raw_values(model.case_base, row.features)};
}

double entropy(std::size_t d, std::size_t n) {
  const double total = static_cast<double>(d + n);
  double h = 0.0;
  for (std::size_t c : {d, n}) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

CaseExplanation explain_case(const CbrModel& model,
                             const std::optional<probability::NeighborWeights>& weights,
                             const Case& query, std::size_t n_good,
                             const RetrieveOptions& options) {
  if (model.case_base.empty()) throw DataError("explain: empty case base");
  const auto& rows = model.case_base.rows;
  std::size_t max_id = 0;
  for (const auto& r : rows) max_id = std::max(max_id, r.id);
  std::vector<std::size_t> row_of_id(max_id + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) row_of_id[rows[i].id] = i;

  const bool self_present =
      options.exclude_same_id &&
      std::any_of(rows.begin(), rows.end(), [&](const Case& c) { return c.id == query.id; });
  const std::size_t available = rows.size() - (self_present ? 1 : 0);
  const auto ranked = ranked_neighbors(model, query, available, options);

  CaseExplanation out;
  out.query_id = query.id;
  out.query_raw = raw_values(model.case_base, query.features);
  const RetrievalResult result = retrieve(model, query, options);
  for (const auto& n : result.neighbors) out.neighbors.push_back(explained(model, n, row_of_id));
  for (std::size_t i = model.k; i < ranked.size() && out.extra_good.size() < n_good; ++i) {
    if (ranked[i].label == 0) out.extra_good.push_back(explained(model, ranked[i], row_of_id));
  }
  out.predicted_label = result.predicted_label;
  out.vote_fraction = result.vote_fraction();
  if (weights) {
    RetrievalResult with_p = result;
    probability::attach_probability(with_p, *weights);
    out.probability_default = with_p.probability_default;
    out.regularizer_mass = weights->regularizer_mass();
  }
  return out;
}

std::vector<FeatureRelevance> relevance_report(const GlobalWeights& weights,
                                               std::span<const std::string> names) {
  if (names.size() != weights.w.size()) throw std::invalid_argument("relevance: name count mismatch");
  std::vector<FeatureRelevance> out;
  for (std::size_t j = 0; j < names.size(); ++j) out.push_back({names[j], 100.0 * weights.w[j]});
  return out;
}

std::string format_fixed2(double value) {
  if (std::isinf(value)) return value > 0 ? "∞" : "-∞";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::optional<SplitChoice> best_split(std::span<const Case> rows, std::size_t features,
                                      std::size_t min_leaf) {
  const std::size_t n = rows.size();
  std::size_t d_total = 0;
  for (const auto& r : rows) d_total += r.label == 1 ? 1 : 0;
  const double parent_h = entropy(d_total, n - d_total);
  const double total = static_cast<double>(n);
  const std::size_t floor_leaf = std::max<std::size_t>(min_leaf, 1);

  // Per feature: the threshold of highest information gain.
  struct Candidate {
    SplitChoice choice;
    double gain;
  };
  std::vector<Candidate> candidates;
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < features; ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
      return rows[x].features[j] < rows[y].features[j];
    });
    std::optional<Candidate> best_here;
    std::size_t d_left = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      d_left += rows[order[i]].label == 1 ? 1 : 0;
      const double v = rows[order[i]].features[j];
      const double next = rows[order[i + 1]].features[j];
      if (v == next) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = n - n_left;
      if (n_left < floor_leaf || n_right < floor_leaf) continue;
      const double wl = static_cast<double>(n_left) / total;
      const double wr = static_cast<double>(n_right) / total;
      const double gain = parent_h - wl * entropy(d_left, n_left - d_left) -
                          wr * entropy(d_total - d_left, n_right - (d_total - d_left));
      if (!(gain > 1e-12) || (best_here && gain <= best_here->gain)) continue;
      const double split_info = -(wl * std::log2(wl) + wr * std::log2(wr));
      best_here = Candidate{{j, (v + next) / 2.0, gain / split_info}, gain};
    }
    if (best_here) candidates.push_back(*best_here);
  }
  if (candidates.empty()) return std::nullopt;

  double mean_gain = 0.0;
  for (const auto& c : candidates) mean_gain += c.gain;
  mean_gain /= static_cast<double>(candidates.size());
  std::optional<SplitChoice> best;
  for (const auto& c : candidates) {
    if (c.gain < mean_gain) continue;
    if (!best || c.choice.gain_ratio > best->gain_ratio) best = c.choice;
  }
  return best;
}

namespace {

TreeNode grow(std::vector<Case> rows, std::size_t features, std::size_t depth,
              const TreeOptions& options) {
  TreeNode node;
  for (const auto& r : rows) (r.label == 1 ? node.defaults : node.non_defaults) += 1;
  if (node.defaults == 0 || node.non_defaults == 0 || depth >= options.max_depth) return node;
  const auto split = best_split(rows, features, options.min_leaf);
  if (!split) return node;

  node.feature = split->feature;
  node.threshold = split->threshold;
  node.gain_ratio = split->gain_ratio;
  std::vector<Case> left, right;
  for (auto& r : rows) {
    (r.features[split->feature] <= split->threshold ? left : right).push_back(std::move(r));
  }
  node.children.push_back(grow(std::move(left), features, depth + 1, options));
  node.children.push_back(grow(std::move(right), features, depth + 1, options));
  return node;
}

void collect_cid(const TreeNode& node, std::size_t depth, const Dataset* schema,
                 std::vector<CidScore>& out) {
  if (node.is_leaf()) return;
  const std::size_t j = *node.feature;
  const std::string name =
      schema && j < schema->feature_names.size() ? schema->feature_names[j] : "x" + std::to_string(j);
  const double shown = schema ? schema->denormalize(j, node.threshold) : node.threshold;
  std::ostringstream threshold_text;
  threshold_text.precision(6);
  threshold_text << shown;
  for (std::size_t side = 0; side < 2; ++side) {
    const TreeNode& p = node.children[side];
    const TreeNode& s = node.children[1 - side];
    CidScore score;
    score.feature = j;
    score.upper = side == 1;
    score.threshold = node.threshold;
    score.depth = depth + 1;
    score.node = name + (side == 0 ? " <= " : " > ") + threshold_text.str();
    score.d_p = p.defaults;
    score.n_p = p.non_defaults;
    score.d_s = s.defaults;
    score.n_s = s.non_defaults;
    score.score = cid_score(score.d_p, score.n_p, score.d_s, score.n_s);
    out.push_back(std::move(score));
  }
  for (const auto& child : node.children) collect_cid(child, depth + 1, schema, out);
}

}  // namespace

TreeNode build_tree(const Dataset& d, const TreeOptions& options) {
  if (d.empty()) throw DataError("tree: empty dataset");
  return grow(d.rows, d.feature_count(), 0, options);
}

double cid_score(std::size_t d_p, std::size_t n_p, std::size_t d_s, std::size_t n_s) {
  if (n_p == 0 || d_s == 0) return std::numeric_limits<double>::infinity();
  if (d_p == 0 || n_s == 0) return 0.0;
  const double num = static_cast<double>(d_p) * static_cast<double>(n_s);
  const double den = static_cast<double>(n_p) * static_cast<double>(d_s);
  return (num * num) / (den * den);
}

std::vector<CidScore> cid_scores(const TreeNode& tree, const Dataset* schema) {
  std::vector<CidScore> out;
  collect_cid(tree, 0, schema, out);
  std::stable_sort(out.begin(), out.end(),
                   [](const CidScore& x, const CidScore& y) { return x.score > y.score; });
  return out;
}

namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    total += diff * diff;
  }
  return total;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t max_iters) {
  if (k == 0 || k > points.size()) throw std::invalid_argument("kmeans: k must lie in [1, |points|]");
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw std::invalid_argument("kmeans: ragged points");
  }

  std::vector<std::size_t> pick(n);
  std::iota(pick.begin(), pick.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) std::swap(pick[i], pick[i + rng.below(n - i)]);

  KMeansResult out;
  for (std::size_t c = 0; c < k; ++c) out.centroids.push_back(points[pick[c]]);
  out.assignments.assign(n, 0);
  std::vector<double> dist(n, 0.0);

  auto assign = [&] {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points[i], out.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], out.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed = changed || best != out.assignments[i];
      out.assignments[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    out.inertia_history.push_back(inertia);
    return changed;
  };

  assign();
  for (std::size_t it = 0; it < max_iters; ++it) {
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[out.assignments[i]];
      for (std::size_t t = 0; t < dim; ++t) sums[out.assignments[i]][t] += points[i][t];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t t = 0; t < dim; ++t) {
        out.centroids[c][t] = sums[c][t] / static_cast<double>(counts[c]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = squared_distance(points[i], out.centroids[out.assignments[i]]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      const auto far = static_cast<std::size_t>(
          std::max_element(dist.begin(), dist.end()) - dist.begin());
      out.centroids[c] = points[far];
      dist[far] = 0.0;
    }
    ++out.iterations;
    if (!assign()) break;
  }
  return out;
}

Segmentation segment_by_score(const Dataset& d, std::span<const std::size_t> salient,
                              std::uint64_t seed, const SegmentOptions& options) {
  if (salient.empty()) throw std::invalid_argument("segmentation: empty feature selection");
  if (!d.normalized) throw DataError("segmentation: dataset must be normalized");
  for (auto j : salient) {
    if (j >= d.feature_count()) throw std::invalid_argument("segmentation: feature index out of range");
  }
  if (d.size() < options.groups) throw DataError("segmentation: fewer cases than groups");
  if (options.buckets_per_unit == 0) throw std::invalid_argument("segmentation: no buckets");

  Segmentation out;
  out.salient_features.assign(salient.begin(), salient.end());
  const std::size_t n = d.size();
  const std::size_t bucket_count = salient.size() * options.buckets_per_unit;
  std::vector<std::size_t> bucket(n);
  std::vector<std::size_t> bucket_total(bucket_count, 0), bucket_good(bucket_count, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double score = 0.0;
    for (auto j : salient) score += d.rows[i].features[j];
    out.overall_scores.push_back(score);
    const auto b = static_cast<std::size_t>(
        std::floor(score * static_cast<double>(options.buckets_per_unit)));
    bucket[i] = std::min(b, bucket_count - 1);
    ++bucket_total[bucket[i]];
    bucket_good[bucket[i]] += d.rows[i].label == 0 ? 1 : 0;
  }
  std::vector<std::vector<double>> points;
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = static_cast<double>(bucket_good[bucket[i]]) /
                        static_cast<double>(bucket_total[bucket[i]]);
    out.bucket_good_rates.push_back(rate);
    points.push_back({out.overall_scores[i], rate});
  }

  const auto km = kmeans(points, options.groups, seed, options.max_iters);
  out.inertia_history = km.inertia_history;

  std::vector<std::size_t> order(options.groups);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
    return km.centroids[x][0] < km.centroids[y][0];
  });
  std::vector<std::size_t> rank_of(options.groups);
  for (std::size_t r = 0; r < order.size(); ++r) rank_of[order[r]] = r;

  static const char* kNames[] = {"low", "moderate", "high"};
  for (std::size_t r = 0; r < order.size(); ++r) {
    GroupStats g;
    g.name = options.groups == 3 ? kNames[r] : "group_" + std::to_string(r);
    g.centroid_score = km.centroids[order[r]][0];
    out.groups.push_back(g);
    out.centroids.push_back(km.centroids[order[r]]);
  }
  std::vector<std::size_t> good(options.groups, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t g = rank_of[km.assignments[i]];
    out.assignments.push_back(g);
    ++out.groups[g].count;
    good[g] += d.rows[i].label == 0 ? 1 : 0;
  }
  for (std::size_t g = 0; g < options.groups; ++g) {
    if (out.groups[g].count > 0) {
      out.groups[g].good_rate =
          static_cast<double>(good[g]) / static_cast<double>(out.groups[g].count);
    }
  }

  auto pairs = options.scatter_pairs;
  if (pairs.empty()) {
    std::size_t partner = d.feature_count();
    std::size_t most = 0;
    for (std::size_t j = 0; j < d.feature_count(); ++j) {
      if (std::find(salient.begin(), salient.end(), j) != salient.end()) continue;
      std::set<double> distinct;
      for (const auto& r : d.rows) distinct.insert(r.features[j]);
      if (distinct.size() > most) {
        most = distinct.size();
        partner = j;
      }
    }
    if (partner < d.feature_count()) {
      for (auto j : salient) pairs.emplace_back(partner, j);
    }
  }
  const std::size_t middle = options.groups / 2;
  for (const auto& [x, y] : pairs) {
    if (x >= d.feature_count() || y >= d.feature_count()) {
      throw std::invalid_argument("segmentation: scatter feature out of range");
    }
    ScatterSeries s{x, y, d.feature_names[x], d.feature_names[y], {}};
    for (std::size_t i = 0; i < n; ++i) {
      if (out.assignments[i] != middle) continue;
      s.points.push_back({d.denormalize(x, d.rows[i].features[x]),
                          d.denormalize(y, d.rows[i].features[y]),
                          static_cast<double>(d.rows[i].label)});
    }
    out.scatter.push_back(std::move(s));
  }
  return out;
}

std::vector<std::size_t> salient_from_cid(std::span<const CidScore> scores,
                                          const GlobalWeights& weights, std::size_t count) {
  std::vector<std::size_t> out;
  for (const auto& s : scores) {
    if (out.size() == count) break;
    if (std::find(out.begin(), out.end(), s.feature) == out.end()) out.push_back(s.feature);
  }
  std::vector<std::size_t> by_weight(weights.w.size());
  std::iota(by_weight.begin(), by_weight.end(), 0);
  std::stable_sort(by_weight.begin(), by_weight.end(),
                   [&](auto x, auto y) { return weights.w[x] > weights.w[y]; });
  for (auto j : by_weight) {
    if (out.size() >= count) break;
    if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
  }
  return out;
}

ExplanationReport build_report(const CbrModel& model,
                               const std::optional<probability::NeighborWeights>& weights,
                               const Case& query, const ReportOptions& options) {
  ExplanationReport r;
  r.feature_names = model.case_base.feature_names;
  r.leave_one_out = options.retrieval.exclude_same_id;
  r.case_explanation = explain_case(model, weights, query, options.n_good, options.retrieval);
  r.relevance = relevance_report(model.weights, r.feature_names);
  r.tree = build_tree(model.case_base, options.tree);
  r.cid = cid_scores(r.tree, &model.case_base);
  const auto salient =
      options.salient.empty() ? salient_from_cid(r.cid, model.weights) : options.salient;
  r.segmentation = segment_by_score(model.case_base, salient,
                                    derive_seed(options.seed, seed_stream::kmeans),
                                    options.segmentation);
  return r;
}

namespace {

nlohmann::json case_json(const ExplainedCase& c, const std::vector<std::string>& names,
                         const char* role) {
  nlohmann::json values = nlohmann::json::object();
  for (std::size_t j = 0; j < names.size(); ++j) values[names[j]] = c.raw_values[j];
  return {{"id", c.id}, {"role", role}, {"similarity", c.similarity},
          {"label", c.label}, {"values", values}};
}

nlohmann::json score_json(double v) {
  if (std::isinf(v)) return format_fixed2(v);
  return v;
}

}  // namespace

nlohmann::json to_json(const ExplanationReport& report) {
  using nlohmann::json;
  const auto& names = report.feature_names;
  const auto& ce = report.case_explanation;

  json query_values = json::object();
  for (std::size_t j = 0; j < names.size(); ++j) query_values[names[j]] = ce.query_raw[j];
  json cases = json::array();
  for (const auto& c : ce.neighbors) cases.push_back(case_json(c, names, "neighbor"));
  for (const auto& c : ce.extra_good) cases.push_back(case_json(c, names, "extra_good"));

  json probability = {{"predicted_label", ce.predicted_label},
                      {"vote_fraction", ce.vote_fraction}};
  if (ce.probability_default) {
    probability["probability_default"] = *ce.probability_default;
    probability["percent"] = format_fixed2(100.0 * *ce.probability_default);
    probability["regularizer_mass"] = *ce.regularizer_mass;
  } else {
    probability["probability_default"] = nullptr;
  }

  json relevance = json::array();
  for (const auto& f : report.relevance) {
    relevance.push_back({{"feature", f.feature}, {"percent", f.percent},
                         {"text", format_fixed2(f.percent)}});
  }

  json cid = json::array();
  for (const auto& s : report.cid) {
    cid.push_back({{"node", s.node}, {"feature", names.at(s.feature)}, {"depth", s.depth},
                   {"D_p", s.d_p}, {"N_p", s.n_p}, {"D_s", s.d_s}, {"N_s", s.n_s},
                   {"score", score_json(s.score)}, {"text", format_fixed2(s.score)}});
  }

  const auto& seg = report.segmentation;
  json salient = json::array();
  for (auto j : seg.salient_features) salient.push_back(names.at(j));
  json groups = json::array();
  for (std::size_t g = 0; g < seg.groups.size(); ++g) {
    groups.push_back({{"name", seg.groups[g].name}, {"count", seg.groups[g].count},
                      {"good_rate", seg.groups[g].good_rate},
                      {"centroid", seg.centroids[g]}});
  }
  json scatter = json::array();
  for (const auto& s : seg.scatter) {
    scatter.push_back({{"x", s.x_name}, {"y", s.y_name}, {"points", s.points.size()}});
  }

  return {{"leave_one_out", report.leave_one_out},
          {"neighbors", {{"query", {{"id", ce.query_id}, {"values", query_values}}},
                         {"cases", cases}}},
          {"probability", probability},
          {"relevance", relevance},
          {"cid", cid},
          {"segmentation", {{"salient_features", salient},
                            {"groups", groups},
                            {"inertia_history", seg.inertia_history},
                            {"scatter", scatter}}}};
}

std::string scatter_csv(const ScatterSeries& series) {
  std::ostringstream out;
  out.precision(17);
  out << series.x_name << ',' << series.y_name << ",label\n";
  for (const auto& p : series.points) {
    out << p[0] << ',' << p[1] << ',' << static_cast<int>(p[2]) << '\n';
  }
  return out.str();
}

}  // namespace cbr::explain
