#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbr/data.hpp"
#include "cbr/probability.hpp"
#include "cbr/similarity.hpp"

namespace cbr::explain {

// ---------------------------------------------------------------- cases

struct ExplainedCase {
  CaseId id = 0;
  double similarity = 0.0;
  Label label = 0;
  std::vector<double> raw_values;
};

struct CaseExplanation {
  CaseId query_id = 0;
  std::vector<double> query_raw;
  /// The k retrieved neighbors, in retrieval order.
  std::vector<ExplainedCase> neighbors;
  /// Next most similar label-0 cases outside the neighbor set.
  std::vector<ExplainedCase> extra_good;
  Label predicted_label = 0;
  double vote_fraction = 0.0;
  std::optional<double> probability_default;
  std::optional<double> regularizer_mass;
};

/// Side-by-side comparison of a query with its most similar cases, in raw
/// feature units. Neighbor order equals retrieve().
CaseExplanation explain_case(const CbrModel& model,
                             const std::optional<probability::NeighborWeights>& weights,
                             const Case& query, std::size_t n_good,
                             const RetrieveOptions& options = {});

// ------------------------------------------------------------ relevance

struct FeatureRelevance {
  std::string feature;
  double percent = 0.0;
};

/// 100 * w_j per feature, in feature order.
std::vector<FeatureRelevance> relevance_report(const GlobalWeights& weights,
                                               std::span<const std::string> names);

/// Fixed two-decimal rendering ("13.84"); infinity renders as "∞".
std::string format_fixed2(double value);

// ----------------------------------------------------------------- tree

/// Binary C4.5 node. Counts: D = label 1, N = label 0. Left child holds
/// x[feature] <= threshold.
struct TreeNode {
  std::optional<std::size_t> feature;
  double threshold = 0.0;
  std::size_t defaults = 0;
  std::size_t non_defaults = 0;
  double gain_ratio = 0.0;
  std::vector<TreeNode> children;

  bool is_leaf() const { return children.empty(); }
  std::size_t size() const { return defaults + non_defaults; }
};

struct TreeOptions {
  std::size_t max_depth = 3;
  std::size_t min_leaf = 5;
};

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain_ratio = 0.0;
};

/// C4.5 split choice. Thresholds are midpoints of sorted distinct values with
/// at least `min_leaf` rows per side. Each feature proposes its threshold of
/// highest positive information gain (lowest threshold on ties); among
/// proposals with gain at or above their mean gain, the highest gain ratio
/// wins (lowest feature index on ties).
std::optional<SplitChoice> best_split(std::span<const Case> rows, std::size_t features,
                                      std::size_t min_leaf);

TreeNode build_tree(const Dataset& d, const TreeOptions& options = {});

// ------------------------------------------------------------------ CID

struct CidScore {
  std::string node;
  std::size_t feature = 0;
  /// True for the `>` side of the split.
  bool upper = false;
  double threshold = 0.0;
  std::size_t depth = 0;
  std::size_t d_p = 0, n_p = 0, d_s = 0, n_s = 0;
  double score = 0.0;
};

/// (D_p^2 N_s^2) / (N_p^2 D_s^2). N_p = 0 or D_s = 0 gives +inf; otherwise
/// D_p = 0 or N_s = 0 gives 0.
double cid_score(std::size_t d_p, std::size_t n_p, std::size_t d_s, std::size_t n_s);

/// One score per non-root node against its sibling, sorted by descending
/// score (stable in pre-order). `schema`, when given, names features and
/// prints thresholds in raw units.
std::vector<CidScore> cid_scores(const TreeNode& tree, const Dataset* schema = nullptr);

// -------------------------------------------------------------- k-means

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignments;
  /// Inertia after each assignment step.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm from k distinct seeded points, squared Euclidean
/// distance, nearest-centroid ties to the lower index. A cluster left empty
/// is reseeded to the point farthest from its centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t max_iters = 100);

// --------------------------------------------------------- segmentation

struct GroupStats {
  std::string name;
  std::size_t count = 0;
  double good_rate = 0.0;
  double centroid_score = 0.0;
};

struct ScatterSeries {
  std::size_t x_feature = 0;
  std::size_t y_feature = 0;
  std::string x_name;
  std::string y_name;
  /// (x, y, label) in raw units.
  std::vector<std::array<double, 3>> points;
};

struct Segmentation {
  std::vector<std::size_t> salient_features;
  std::vector<double> overall_scores;
  /// Good-case rate of each case's score bucket.
  std::vector<double> bucket_good_rates;
  std::vector<std::vector<double>> centroids;
  /// Group index per case; groups are ordered by ascending centroid score.
  std::vector<std::size_t> assignments;
  std::vector<GroupStats> groups;
  std::vector<double> inertia_history;
  /// Middle group's cases, per feature pair.
  std::vector<ScatterSeries> scatter;
};

struct SegmentOptions {
  std::size_t groups = 3;
  /// Score buckets per unit of overall score.
  std::size_t buckets_per_unit = 10;
  std::size_t max_iters = 100;
  /// Empty: pair each salient feature with the non-salient feature that has
  /// the most distinct values.
  std::vector<std::pair<std::size_t, std::size_t>> scatter_pairs;
};

Segmentation segment_by_score(const Dataset& d, std::span<const std::size_t> salient,
                              std::uint64_t seed, const SegmentOptions& options = {});

/// First `count` distinct features in CID order, padded with the highest
/// weights.
std::vector<std::size_t> salient_from_cid(std::span<const CidScore> scores,
                                          const GlobalWeights& weights, std::size_t count = 3);

// --------------------------------------------------------------- report

struct ReportOptions {
  std::size_t n_good = 1;
  TreeOptions tree;
  SegmentOptions segmentation;
  /// Empty: top three CID features.
  std::vector<std::size_t> salient;
  std::uint64_t seed = 0;
  RetrieveOptions retrieval;
};

struct ExplanationReport {
  std::vector<std::string> feature_names;
  CaseExplanation case_explanation;
  std::vector<FeatureRelevance> relevance;
  TreeNode tree;
  std::vector<CidScore> cid;
  Segmentation segmentation;
  bool leave_one_out = true;
};

/// All four explanation outputs for one query against the model's case base.
ExplanationReport build_report(const CbrModel& model,
                               const std::optional<probability::NeighborWeights>& weights,
                               const Case& query, const ReportOptions& options = {});

/// JSON with sections neighbors, probability, relevance, cid, segmentation.
nlohmann::json to_json(const ExplanationReport& report);

/// CSV with header "<x name>,<y name>,label", one row per point.
std::string scatter_csv(const ScatterSeries& series);

}  // namespace cbr::explain
