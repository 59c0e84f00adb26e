#include <doctest.h>

#include <filesystem>

#include "cbr/error.hpp"
#include "cbr/io.hpp"
#include "support.hpp"

using namespace cbr;
namespace fs = std::filesystem;

namespace {

io::StoredModel sample_model(bool with_weights) {
  auto data = testing::random_dataset(25, 4, 31);
  data.ranges = {{0.0, 10.0}, {-3.0, 3.0}, {1.0, 1.5}, {100.0, 250.0}};
  GlobalWeights w{{0.1, 0.2, 0.3, 0.4}};
  LocalParams p{{0.5, 1.0 / 3.0, 2.0, 1.7}, {3.0, 0.25, 1.0, 0.1}};
  io::StoredModel s{make_model(data, 3, w, p), std::nullopt};
  if (with_weights) s.neighbor_weights = probability::NeighborWeights{{0.0, -0.1, -1.0 / 3.0, -2.0}, {0.5, 0.3, 0.15, 0.05}};
  return s;
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cbr_io_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("model json round trip is exact") {
  for (bool with_weights : {false, true}) {
    const auto stored = sample_model(with_weights);
    const auto back = io::model_from_json(nlohmann::json::parse(io::to_json(stored).dump()));
    const auto& a = stored.model;
    const auto& b = back.model;
    CHECK(b.k == a.k);
    CHECK(b.weights.w == a.weights.w);
    CHECK(b.locals.a == a.locals.a);
    CHECK(b.locals.b == a.locals.b);
    CHECK(b.bounds == a.bounds);
    CHECK(b.case_base.ranges == a.case_base.ranges);
    CHECK(b.case_base.feature_names == a.case_base.feature_names);
    CHECK(b.case_base.label_name == a.case_base.label_name);
    CHECK(b.case_base.normalized == a.case_base.normalized);
    REQUIRE(b.case_base.size() == a.case_base.size());
    for (std::size_t i = 0; i < a.case_base.size(); ++i) {
      CHECK(b.case_base.rows[i].features == a.case_base.rows[i].features);
      CHECK(b.case_base.rows[i].label == a.case_base.rows[i].label);
      CHECK(b.case_base.rows[i].id == a.case_base.rows[i].id);
    }
    REQUIRE(back.neighbor_weights.has_value() == with_weights);
    if (with_weights) {
      CHECK(back.neighbor_weights->omega == stored.neighbor_weights->omega);
      CHECK(back.neighbor_weights->p == stored.neighbor_weights->p);
    }
    CHECK(io::to_json(back).dump() == io::to_json(stored).dump());
  }
}

TEST_CASE("malformed model documents are data errors") {
  auto doc = io::to_json(sample_model(false));
  CHECK_THROWS_AS(io::model_from_json(nlohmann::json::object()), DataError);
  CHECK_THROWS_AS(io::model_from_json(nlohmann::json::array()), DataError);

  auto bad_k = doc;
  bad_k["k"] = "three";
  CHECK_THROWS_AS(io::model_from_json(bad_k), DataError);

  auto short_weights = doc;
  short_weights["weights"] = {1.0};
  CHECK_THROWS_AS(io::model_from_json(short_weights), DataError);

  auto negative_exponent = doc;
  negative_exponent["a"][0] = -1.0;
  CHECK_THROWS_AS(io::model_from_json(negative_exponent), DataError);
}

TEST_CASE("metrics csv round trip") {
  std::vector<evaluation::SampleResult> rows;
  for (std::size_t s = 0; s < 3; ++s) {
    metrics::MetricReport r;
    r.accuracy = 0.1 + s / 7.0;
    r.precision = 1.0 / 3.0;
    r.recall = 0.0;
    r.specificity = 1.0;
    r.f1 = 2.0 / 9.0;
    r.roc_auc = 0.123456789012345678;
    r.g_mean = std::sqrt(0.5);
    rows.push_back({"set_" + std::to_string(s % 2), s ? "cbr_e" : "lr", s, r});
  }
  const auto back = io::parse_metrics_csv(io::metrics_csv(rows));
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].dataset == rows[i].dataset);
    CHECK(back[i].classifier == rows[i].classifier);
    CHECK(back[i].sample == rows[i].sample);
    for (std::size_t m = 0; m < metrics::kMeasureNames.size(); ++m) {
      CHECK(back[i].report.measure(m) == rows[i].report.measure(m));
    }
  }
  CHECK_THROWS_AS(io::parse_metrics_csv("dataset,classifier\nx,y\n"), DataError);
}

TEST_CASE("matrix csv round trip") {
  io::LabeledMatrix m{{"a", "b"}, {"c1", "c2", "c3"}, {{1.0, 0.1, -3.5}, {1e-9, 2.0 / 3.0, 12345.0}}};
  const auto back = io::parse_matrix_csv(io::matrix_csv(m));
  CHECK(back.row_names == m.row_names);
  CHECK(back.column_names == m.column_names);
  CHECK(back.values == m.values);
  CHECK_THROWS_AS(io::parse_matrix_csv("name,c1\na,notanumber\n"), DataError);
}

TEST_CASE("write_file creates parent directories and read_file returns content") {
  const auto dir = temp_dir("write");
  const auto path = dir / "nested" / "deeper" / "file.txt";
  io::write_file(path, "hello\nworld\n");
  CHECK(fs::exists(path));
  CHECK(io::read_file(path) == "hello\nworld\n");
  CHECK_THROWS_AS(io::read_file(dir / "missing.txt"), DataError);
  fs::remove_all(dir);
}
