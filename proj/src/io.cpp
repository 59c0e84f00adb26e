#include "cbr/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cbr/error.hpp"

namespace cbr::io {

using nlohmann::json;

namespace {

std::vector<double> number_list(const json& doc, const char* key) {
  return doc.at(key).get<std::vector<double>>();
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw DataError("csv: bad number '" + text + "' in " + what);
  return v;
}

std::string number_text(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

json to_json(const StoredModel& stored) {
  const auto& m = stored.model;
  json ranges = json::array(), raw = json::array(), cases = json::array(), labels = json::array(),
       ids = json::array();
  for (const auto& r : m.bounds) ranges.push_back({r.min, r.max});
  for (const auto& r : m.case_base.ranges) raw.push_back({r.min, r.max});
  for (const auto& c : m.case_base.rows) {
    cases.push_back(c.features);
    labels.push_back(c.label);
    ids.push_back(c.id);
  }
  json doc = {{"k", m.k},
              {"weights", m.weights.w},
              {"a", m.locals.a},
              {"b", m.locals.b},
              {"feature_names", m.case_base.feature_names},
              {"label_name", m.case_base.label_name},
              {"normalized", m.case_base.normalized},
              {"ranges", ranges},
              {"raw_ranges", raw},
              {"cases", cases},
              {"labels", labels},
              {"ids", ids}};
  if (stored.neighbor_weights) {
    doc["neighbor_weights"] = {{"omega", stored.neighbor_weights->omega},
                               {"p", stored.neighbor_weights->p}};
  }
  return doc;
}

StoredModel model_from_json(const json& doc) {
  try {
    StoredModel out;
    auto& m = out.model;
    auto& d = m.case_base;
    d.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    d.label_name = doc.value("label_name", std::string{});
    d.normalized = doc.value("normalized", true);
    for (const auto& r : doc.at("raw_ranges")) d.ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    for (const auto& r : doc.at("ranges")) m.bounds.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
    const auto& cases = doc.at("cases");
    const auto& labels = doc.at("labels");
    const auto& ids = doc.at("ids");
    if (cases.size() != labels.size() || cases.size() != ids.size()) {
      throw DataError("model: cases, labels and ids differ in length");
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
      d.rows.push_back({cases[i].get<std::vector<double>>(), labels[i].get<Label>(),
                        ids[i].get<CaseId>()});
    }
    m.k = doc.at("k").get<std::size_t>();
    m.weights.w = number_list(doc, "weights");
    m.locals.a = number_list(doc, "a");
    m.locals.b = number_list(doc, "b");
    d.validate();
    m.validate();
    if (doc.contains("neighbor_weights")) {
      const auto& nw = doc.at("neighbor_weights");
      auto weights = probability::NeighborWeights::from_omega(number_list(nw, "omega"));
      weights.p = number_list(nw, "p");
      if (weights.k() != m.k) throw DataError("model: neighbor weights do not match k");
      out.neighbor_weights = std::move(weights);
    }
    return out;
  } catch (const json::exception& e) {
    throw DataError(std::string("model: malformed JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

json to_json(const designer::DesignReport& report) {
  json schemes = json::array();
  for (const auto& s : report.per_scheme) {
    schemes.push_back({{"scheme", s.scheme},
                       {"cv_accuracy", s.cv_accuracy},
                       {"weights", s.weights.w},
                       {"a", s.locals.a},
                       {"b", s.locals.b},
                       {"evaluations", s.evaluations}});
  }
  return {{"chosen_k", report.chosen_k}, {"winner", report.winner}, {"per_scheme", schemes}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string metrics_csv(const std::vector<evaluation::SampleResult>& rows) {
  std::ostringstream out;
  out << "dataset,classifier,sample";
  for (auto name : metrics::kMeasureNames) out << ',' << name;
  out << '\n';
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.classifier << ',' << r.sample;
    for (std::size_t m = 0; m < metrics::kMeasureNames.size(); ++m) {
      out << ',' << number_text(r.report.measure(m));
    }
    out << '\n';
  }
  return out.str();
}

std::vector<evaluation::SampleResult> parse_metrics_csv(const std::string& text) {
  const auto records = csv_records(text);
  if (records.empty()) throw DataError("metrics csv: missing header");
  const auto& header = records.front();
  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError("metrics csv: missing column " + std::string(name));
  };
  const std::size_t c_data = column("dataset"), c_clf = column("classifier"),
                    c_sample = column("sample");
  std::vector<std::size_t> c_measure;
  for (auto name : metrics::kMeasureNames) c_measure.push_back(column(name));

  std::vector<evaluation::SampleResult> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != header.size()) throw DataError("metrics csv: ragged row " + std::to_string(r));
    evaluation::SampleResult row;
    row.dataset = rec[c_data];
    row.classifier = rec[c_clf];
    row.sample = static_cast<std::size_t>(parse_number(rec[c_sample], "sample"));
    double* fields[] = {&row.report.accuracy, &row.report.precision, &row.report.recall,
                        &row.report.specificity, &row.report.f1, &row.report.roc_auc,
                        &row.report.g_mean};
    for (std::size_t m = 0; m < c_measure.size(); ++m) {
      *fields[m] = parse_number(rec[c_measure[m]], std::string(metrics::kMeasureNames[m]));
    }
    out.push_back(std::move(row));
  }
  return out;
}

LabeledMatrix parse_matrix_csv(const std::string& text) {
  const auto records = csv_records(text);
  if (records.size() < 2) throw DataError("matrix csv: need a header and at least one row");
  LabeledMatrix m;
  m.column_names.assign(records.front().begin() + 1, records.front().end());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != m.column_names.size() + 1) {
      throw DataError("matrix csv: row " + std::to_string(r) + " has the wrong width");
    }
    m.row_names.push_back(rec[0]);
    std::vector<double> values;
    for (std::size_t c = 1; c < rec.size(); ++c) values.push_back(parse_number(rec[c], rec[0]));
    m.values.push_back(std::move(values));
  }
  return m;
}

std::string matrix_csv(const LabeledMatrix& m) {
  std::ostringstream out;
  out << "name";
  for (const auto& c : m.column_names) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < m.row_names.size(); ++r) {
    out << m.row_names[r];
    for (double v : m.values[r]) out << ',' << number_text(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace cbr::io
