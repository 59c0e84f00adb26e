#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cbr {

using CaseId = std::size_t;

/// Binary class: 1 = positive (default / bad risk), 0 = negative.
using Label = int;

struct Case {
  std::vector<double> features;
  Label label = 0;
  CaseId id = 0;
};

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;

  double width() const { return max - min; }
  bool operator==(const FeatureRange&) const = default;
};

/// Tabular cases with binary labels.
///
/// `ranges` are always expressed in raw feature units. Once `normalized` is
/// set, feature values are in [0, 1] and `denormalize` recovers raw values
/// from them.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<Case> rows;
  std::string label_name;
  std::vector<FeatureRange> ranges;
  bool normalized = false;

  std::size_t feature_count() const { return feature_names.size(); }
  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  /// Counts of label 0 and label 1.
  std::pair<std::size_t, std::size_t> class_counts() const;

  /// Dataset with the same schema and the given rows.
  Dataset with_rows(std::vector<Case> rows) const;

  /// Raw value of feature j for a stored (possibly normalized) value.
  double denormalize(std::size_t j, double value) const;

  /// Throws DataError if any documented invariant is broken.
  void validate() const;
};

struct SplitSpec {
  double test_fraction = 0.2;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
};

struct CsvOptions {
  std::string label_column;
  /// Label token mapped to class 1. With the default "1", only "0" and "1"
  /// are accepted. With any other token, every other value maps to class 0
  /// provided the column has at most two distinct values.
  std::string positive_token = "1";
};

struct CsvLoad {
  Dataset dataset;
  std::size_t dropped_rows = 0;
};

/// Reads a header-first CSV. Rows with an empty or non-numeric feature value,
/// or an empty label, are dropped and counted. Ranges come from retained rows.
CsvLoad load_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Same as load_csv but reads from an in-memory string.
CsvLoad parse_csv(const std::string& text, const CsvOptions& options);

/// RFC-4180 records of a CSV text (quoted fields, doubled quotes, CRLF).
std::vector<std::vector<std::string>> csv_records(const std::string& text);

/// Min-max scaling to [0, 1] using `ranges`. Constant columns map to 0.
/// A dataset that is already normalized is returned unchanged.
Dataset normalize(const Dataset& d);

/// Random under-sampling of the majority class down to the minority count.
/// Rows keep their relative order.
Dataset undersample(const Dataset& d, std::uint64_t seed);

struct TrainTest {
  Dataset train;
  Dataset test;
};

/// Stratified split. Each class contributes round(test_fraction * n_class)
/// rows to the test side.
TrainTest split(const Dataset& d, const SplitSpec& spec);

struct Fold {
  Dataset train;
  Dataset validation;
};

/// Stratified k-fold partition: every row lands in exactly one validation set.
std::vector<Fold> folds(const Dataset& d, std::size_t k, std::uint64_t seed);

/// Index form of `folds`: validation row indices per fold, into d.rows.
std::vector<std::vector<std::size_t>> fold_indices(const Dataset& d, std::size_t k,
                                                   std::uint64_t seed);

}  // namespace cbr
