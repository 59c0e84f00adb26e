#include <doctest.h>

#include <algorithm>
#include <set>

#include "cbr/data.hpp"
#include "cbr/error.hpp"
#include "support.hpp"

using namespace cbr;

namespace {

Dataset column(std::vector<double> values) {
  std::string text = "x,y\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    text += std::to_string(values[i]) + "," + std::to_string(i % 2) + "\n";
  }
  return parse_csv(text, {"y"}).dataset;
}

std::vector<double> feature(const Dataset& d, std::size_t j) {
  std::vector<double> out;
  for (const auto& r : d.rows) out.push_back(r.features[j]);
  return out;
}

std::set<CaseId> ids(const Dataset& d) {
  std::set<CaseId> out;
  for (const auto& r : d.rows) out.insert(r.id);
  return out;
}

}  // namespace

TEST_CASE("minimal two-row file") {
  const auto load = parse_csv("a,b,y\n0,0,0\n1,1,1\n", {"y"});
  const auto& d = load.dataset;
  CHECK(d.size() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.ranges == std::vector<FeatureRange>{{0, 1}, {0, 1}});
  CHECK(d.rows[1].label == 1);
  CHECK(load.dropped_rows == 0);
}

TEST_CASE("rows with an empty or non-numeric cell are dropped and counted") {
  const auto load = parse_csv("a,b,y\n1,2,0\n3,,1\n4,5,1\n", {"y"});
  CHECK(load.dataset.size() == 2);
  CHECK(load.dropped_rows == 1);
  CHECK(parse_csv("a,y\nx,1\n2,0\n", {"y"}).dropped_rows == 1);
  CHECK(parse_csv("a,y\n1,\n2,0\n", {"y"}).dropped_rows == 1);
}

TEST_CASE("ids are retained-row ordinals") {
  const auto d = parse_csv("a,y\n1,0\n,1\n3,1\n", {"y"}).dataset;
  CHECK(d.rows[0].id == 0);
  CHECK(d.rows[1].id == 1);
  CHECK(d.rows[1].features[0] == 3.0);
}

TEST_CASE("quoted fields and CRLF line endings") {
  const auto records = csv_records("\"a,1\",\"say \"\"hi\"\"\"\r\n2,3\r\n");
  REQUIRE(records.size() == 2);
  CHECK(records[0][0] == "a,1");
  CHECK(records[0][1] == "say \"hi\"");
  CHECK(records[1][1] == "3");
}

TEST_CASE("load errors") {
  CHECK_THROWS_AS(parse_csv("a,b\n1,0\n", {"y"}), DataError);
  CHECK_THROWS_AS(parse_csv("a,y\n1,2\n", {"y"}), DataError);
  CHECK_THROWS_AS(parse_csv("a,y\n,1\n", {"y"}), DataError);
  CHECK_THROWS_AS(parse_csv("a,y\n1,u\n2,v\n3,w\n", {"y", "u"}), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", {"y"}), DataError);
}

TEST_CASE("custom positive token") {
  const auto d = parse_csv("a,risk\n1,good\n2,bad\n3,bad\n", {"risk", "bad"}).dataset;
  CHECK(d.class_counts() == std::pair<std::size_t, std::size_t>{1, 2});
}

TEST_CASE("German credit corpus shape") {
  const auto path = std::string(CBR_TEST_DATA_DIR) + "/german_credit.csv";
  const auto bad = load_csv(path, {"credit_risk", "bad"});
  CHECK(bad.dataset.size() == 1000);
  CHECK(bad.dataset.feature_count() == 20);
  CHECK(bad.dropped_rows == 0);
  CHECK(bad.dataset.class_counts() == std::pair<std::size_t, std::size_t>{700, 300});
  // Read with the other class as positive, the 700/300 orientation flips.
  const auto good = load_csv(path, {"credit_risk", "good"});
  CHECK(good.dataset.class_counts() == std::pair<std::size_t, std::size_t>{300, 700});

  const auto balanced = undersample(normalize(bad.dataset), 17);
  CHECK(balanced.size() == 600);
  CHECK(balanced.class_counts() == std::pair<std::size_t, std::size_t>{300, 300});
  const auto parts = split(balanced, {0.2, 5, 3});
  CHECK(parts.train.size() == 480);
  CHECK(parts.test.size() == 120);
  for (const auto& f : folds(balanced, 5, 9)) CHECK(f.validation.size() == 120);
}

TEST_CASE("min-max normalization") {
  CHECK(feature(normalize(column({80, 180})), 0) == std::vector<double>{0.0, 1.0});
  const auto three = feature(normalize(column({80, 100, 180})), 0);
  CHECK(three[0] == 0.0);
  CHECK(three[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(three[2] == 1.0);
  CHECK(feature(normalize(column({5, 5, 5})), 0) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("normalization keeps raw ranges and is idempotent") {
  const auto raw = column({80, 100, 180});
  const auto once = normalize(raw);
  CHECK(once.normalized);
  CHECK(once.ranges == raw.ranges);
  CHECK(once.denormalize(0, once.rows[1].features[0]) == doctest::Approx(100.0));
  const auto twice = normalize(once);
  CHECK(feature(twice, 0) == feature(once, 0));
  CHECK_NOTHROW(once.validate());
}

TEST_CASE("undersampling balances without fabricating rows") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = testing::random_dataset(40 + seed, 3, seed);
    const auto [neg, pos] = d.class_counts();
    const auto out = undersample(d, seed);
    const auto [n0, n1] = out.class_counts();
    CHECK(n0 == std::min(neg, pos));
    CHECK(n1 == std::min(neg, pos));
    const auto all = ids(d);
    for (auto id : ids(out)) CHECK(all.count(id) == 1);
    // The minority class survives intact.
    const Label minority = pos < neg ? 1 : 0;
    std::size_t kept_minority = 0;
    for (const auto& r : out.rows) kept_minority += r.label == minority;
    CHECK(kept_minority == std::min(neg, pos));
    CHECK(ids(undersample(d, seed)) == ids(out));
  }
}

TEST_CASE("undersampling a balanced set is a no-op in size") {
  auto d = testing::random_dataset(20, 2, 1);
  for (std::size_t i = 0; i < d.size(); ++i) d.rows[i].label = static_cast<Label>(i % 2);
  CHECK(undersample(d, 4).size() == 20);
  for (auto& r : d.rows) r.label = 0;
  CHECK_THROWS_AS(undersample(d, 4), DataError);
}

TEST_CASE("stratified split sizes and determinism") {
  auto ten = testing::random_dataset(10, 2, 2);
  for (std::size_t i = 0; i < 10; ++i) ten.rows[i].label = static_cast<Label>(i % 2);
  const auto parts = split(ten, {0.2, 5, 1});
  CHECK(parts.train.size() == 8);
  CHECK(parts.test.size() == 2);

  const auto d = testing::random_dataset(200, 2, 3);
  const auto a = split(d, {0.2, 5, 1});
  const auto b = split(d, {0.2, 5, 1});
  const auto c = split(d, {0.2, 5, 2});
  CHECK(ids(a.test) == ids(b.test));
  CHECK(ids(a.test) != ids(c.test));
  CHECK(a.test.size() == c.test.size());
  std::set<CaseId> all = ids(a.train);
  for (auto id : ids(a.test)) CHECK(all.insert(id).second);
  CHECK(all.size() == 200);
}

TEST_CASE("split errors") {
  auto d = testing::random_dataset(4, 1, 1);
  CHECK_THROWS_AS(split(d, {0.2, 5, 0}), DataError);
  d = testing::random_dataset(10, 1, 1);
  for (auto& r : d.rows) r.label = 0;
  d.rows[0].label = 1;
  CHECK_THROWS_AS(split(d, {0.2, 5, 0}), DataError);
  CHECK_THROWS_AS(split(d, {1.5, 5, 0}), std::invalid_argument);
}

TEST_CASE("folds partition the rows and keep class ratios") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = testing::random_dataset(57 + seed, 2, seed);
    const auto [neg, pos] = d.class_counts();
    const auto parts = folds(d, 5, seed);
    REQUIRE(parts.size() == 5);
    std::multiset<CaseId> seen;
    for (const auto& f : parts) {
      CHECK(f.train.size() + f.validation.size() == d.size());
      const auto [v0, v1] = f.validation.class_counts();
      CHECK(std::abs(static_cast<double>(v0) - neg / 5.0) <= 1.0);
      CHECK(std::abs(static_cast<double>(v1) - pos / 5.0) <= 1.0);
      for (const auto& r : f.validation.rows) seen.insert(r.id);
    }
    CHECK(seen.size() == d.size());
    CHECK(std::set<CaseId>(seen.begin(), seen.end()).size() == d.size());
  }
  auto ten = testing::random_dataset(10, 2, 2);
  for (std::size_t i = 0; i < 10; ++i) ten.rows[i].label = static_cast<Label>(i % 2);
  for (const auto& f : folds(ten, 5, 0)) CHECK(f.validation.size() == 2);
  CHECK_THROWS_AS(folds(ten, 6, 0), DataError);
}

TEST_CASE("dataset validation catches broken invariants") {
  auto d = testing::random_dataset(5, 2, 1);
  CHECK_NOTHROW(d.validate());
  auto dup = d;
  dup.rows[1].id = dup.rows[0].id;
  CHECK_THROWS_AS(dup.validate(), DataError);
  auto wide = d;
  wide.rows[0].features.push_back(0.5);
  CHECK_THROWS_AS(wide.validate(), DataError);
  auto label = d;
  label.rows[0].label = 2;
  CHECK_THROWS_AS(label.validate(), DataError);
}
