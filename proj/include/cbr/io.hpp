#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbr/designer.hpp"
#include "cbr/evaluation.hpp"
#include "cbr/probability.hpp"
#include "cbr/similarity.hpp"

namespace cbr::io {

struct StoredModel {
  CbrModel model;
  std::optional<probability::NeighborWeights> neighbor_weights;
};

/// Keys: k, weights, a, b, feature_names, label_name, normalized, ranges
/// (similarity bounds), raw_ranges, cases, labels, ids, and optionally
/// neighbor_weights {omega, p}. Doubles are written with round-trip
/// precision, so from_json(to_json(m)) reproduces m exactly.
nlohmann::json to_json(const StoredModel& stored);
/// Throws DataError on a malformed document or a model that fails validation.
StoredModel model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const designer::DesignReport& report);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Header then one row per (dataset, classifier, sample).
std::string metrics_csv(const std::vector<evaluation::SampleResult>& rows);
std::vector<evaluation::SampleResult> parse_metrics_csv(const std::string& text);

struct LabeledMatrix {
  std::vector<std::string> row_names;
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> values;
};

/// First column holds row names, first row holds column names.
LabeledMatrix parse_matrix_csv(const std::string& text);
std::string matrix_csv(const LabeledMatrix& m);

}  // namespace cbr::io
