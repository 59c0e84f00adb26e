#include "cbr/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cbr/error.hpp"
#include "cbr/random.hpp"

namespace cbr {

namespace {

// RFC-4180 record splitter: quoted fields, doubled quotes, CRLF line ends.
std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record.front().empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started) in_quotes = true;
        else field.push_back(c);
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool parse_number(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return false;
  out = v;
  return true;
}

std::vector<FeatureRange> compute_ranges(const std::vector<Case>& rows, std::size_t width) {
  std::vector<FeatureRange> ranges(width);
  for (std::size_t j = 0; j < width; ++j) {
    double lo = rows.front().features[j];
    double hi = lo;
    for (const auto& r : rows) {
      lo = std::min(lo, r.features[j]);
      hi = std::max(hi, r.features[j]);
    }
    ranges[j] = {lo, hi};
  }
  return ranges;
}

}  // namespace

std::pair<std::size_t, std::size_t> Dataset::class_counts() const {
  std::size_t pos = 0;
  for (const auto& r : rows) pos += r.label == 1 ? 1 : 0;
  return {rows.size() - pos, pos};
}

Dataset Dataset::with_rows(std::vector<Case> new_rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.label_name = label_name;
  out.ranges = ranges;
  out.normalized = normalized;
  out.rows = std::move(new_rows);
  return out;
}

double Dataset::denormalize(std::size_t j, double value) const {
  if (!normalized) return value;
  return ranges.at(j).min + value * ranges.at(j).width();
}

void Dataset::validate() const {
  const std::size_t width = feature_names.size();
  if (ranges.size() != width) throw DataError("dataset: ranges do not match feature count");
  for (const auto& r : ranges) {
    if (!(r.min <= r.max)) throw DataError("dataset: range with min > max");
  }
  std::set<CaseId> ids;
  for (const auto& row : rows) {
    if (row.features.size() != width) throw DataError("dataset: row width mismatch");
    if (row.label != 0 && row.label != 1) throw DataError("dataset: non-binary label");
    if (!ids.insert(row.id).second) throw DataError("dataset: duplicate case id");
    if (normalized) {
      for (double v : row.features) {
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("dataset: normalized value outside [0,1]");
      }
    }
  }
}

std::vector<std::vector<std::string>> csv_records(const std::string& text) {
  return parse_records(text);
}

CsvLoad parse_csv(const std::string& text, const CsvOptions& options) {
  auto records = parse_records(text);
  if (records.empty()) throw DataError("csv: missing header row");

  const auto& header = records.front();
  std::size_t label_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == options.label_column) label_col = c;
  }
  if (label_col == header.size()) {
    throw DataError("csv: label column '" + options.label_column + "' not found");
  }

  CsvLoad out;
  Dataset& d = out.dataset;
  d.label_name = options.label_column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) d.feature_names.push_back(trim(header[c]));
  }

  std::set<std::string> label_values;
  const bool strict_binary = options.positive_token == "1";
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      ++out.dropped_rows;
      continue;
    }
    Case row;
    bool ok = true;
    for (std::size_t c = 0; c < rec.size() && ok; ++c) {
      if (c == label_col) continue;
      double v = 0.0;
      ok = parse_number(rec[c], v);
      row.features.push_back(v);
    }
    const std::string token = trim(rec[label_col]);
    if (!ok || token.empty()) {
      ++out.dropped_rows;
      continue;
    }
    if (strict_binary && token != "0" && token != "1") {
      throw DataError("csv: non-binary label '" + token + "' in row " + std::to_string(r + 1));
    }
    label_values.insert(token);
    row.label = token == options.positive_token ? 1 : 0;
    row.id = d.rows.size();
    d.rows.push_back(std::move(row));
  }
  if (label_values.size() > 2) throw DataError("csv: label column has more than two values");
  if (d.rows.empty()) throw DataError("csv: every data row was dropped");

  d.ranges = compute_ranges(d.rows, d.feature_names.size());
  return out;
}

CsvLoad load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options);
}

Dataset normalize(const Dataset& d) {
  if (d.normalized) return d;
  Dataset out = d;
  for (auto& row : out.rows) {
    for (std::size_t j = 0; j < row.features.size(); ++j) {
      const double width = d.ranges[j].width();
      row.features[j] = width > 0.0
                            ? std::clamp((row.features[j] - d.ranges[j].min) / width, 0.0, 1.0)
                            : 0.0;
    }
  }
  out.normalized = true;
  return out;
}

Dataset undersample(const Dataset& d, std::uint64_t seed) {
  const auto [neg, pos] = d.class_counts();
  if (neg == 0 || pos == 0) throw DataError("undersample: one class is empty");
  const Label majority = pos > neg ? 1 : 0;
  const std::size_t keep = std::min(neg, pos);

  std::vector<std::size_t> majority_idx;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.rows[i].label == majority) majority_idx.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(majority_idx.begin(), majority_idx.end());
  majority_idx.resize(keep);
  std::vector<bool> selected(d.rows.size(), false);
  for (auto i : majority_idx) selected[i] = true;

  std::vector<Case> rows;
  rows.reserve(2 * keep);
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.rows[i].label != majority || selected[i]) rows.push_back(d.rows[i]);
  }
  return d.with_rows(std::move(rows));
}

TrainTest split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument("split: test_fraction must lie in (0,1)");
  }
  if (d.size() < 5) throw DataError("split: need at least 5 rows");

  Rng rng(spec.seed);
  std::vector<bool> is_test(d.size(), false);
  for (Label cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.rows[i].label == cls) idx.push_back(i);
    }
    if (idx.size() < 2) throw DataError("split: a class has fewer than 2 rows");
    rng.shuffle(idx.begin(), idx.end());
    auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * idx.size()));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    for (std::size_t t = 0; t < n_test; ++t) is_test[idx[t]] = true;
  }

  std::vector<Case> train;
  std::vector<Case> test;
  for (std::size_t i = 0; i < d.size(); ++i) {
    (is_test[i] ? test : train).push_back(d.rows[i]);
  }
  return {d.with_rows(std::move(train)), d.with_rows(std::move(test))};
}

std::vector<std::vector<std::size_t>> fold_indices(const Dataset& d, std::size_t k,
                                                   std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("folds: k must be at least 2");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> out(k);
  std::size_t offset = 0;
  for (Label cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.rows[i].label == cls) idx.push_back(i);
    }
    if (idx.size() < k) throw DataError("folds: a class has fewer rows than folds");
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t t = 0; t < idx.size(); ++t) out[(offset + t) % k].push_back(idx[t]);
    offset = (offset + idx.size()) % k;
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::vector<Fold> folds(const Dataset& d, std::size_t k, std::uint64_t seed) {
  const auto parts = fold_indices(d, k, seed);
  std::vector<Fold> out;
  out.reserve(k);
  for (const auto& validation : parts) {
    std::vector<bool> in_validation(d.size(), false);
    for (auto i : validation) in_validation[i] = true;
    std::vector<Case> train;
    std::vector<Case> val;
    for (std::size_t i = 0; i < d.size(); ++i) {
      (in_validation[i] ? val : train).push_back(d.rows[i]);
    }
    out.push_back({d.with_rows(std::move(train)), d.with_rows(std::move(val))});
  }
  return out;
}

}  // namespace cbr
