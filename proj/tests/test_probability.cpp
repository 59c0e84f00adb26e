#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cbr/error.hpp"
#include "cbr/probability.hpp"
#include "support.hpp"

using namespace cbr;
using namespace cbr::probability;

namespace {

/// Direct evaluation of sum_n log(sum_i B_i e^w_i / sum_j e^w_j) with B_{K+1} = 1/2.
double likelihood_oracle(const std::vector<double>& omega, const std::vector<NeighborEvidence>& rows) {
  double norm = 0.0;
  for (double w : omega) norm += std::exp(w);
  double total = 0.0;
  for (const auto& r : rows) {
    double num = 0.5 * std::exp(omega.back());
    for (std::size_t i = 0; i < r.b.size(); ++i) num += r.b[i] * std::exp(omega[i]);
    total += std::log(num / norm);
  }
  return total;
}

std::vector<NeighborEvidence> random_evidence(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NeighborEvidence> rows(n);
  for (auto& r : rows) {
    // Nearer neighbors agree more often.
    for (std::size_t i = 0; i < k; ++i) r.b.push_back(rng.uniform() < 0.9 - 0.1 * i ? 1 : 0);
  }
  return rows;
}

}  // namespace

TEST_CASE("naive probability") {
  const std::vector<int> mixed{1, 1, 0}, none{0, 0, 0, 0}, all{1, 1};
  CHECK(naive_probability(mixed) == doctest::Approx(2.0 / 3.0));
  CHECK(naive_probability(none) == 0.0);
  CHECK(naive_probability(all) == 1.0);
  CHECK_THROWS_AS(naive_probability(std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("weighted probability of the worked case") {
  const auto w = NeighborWeights::from_probabilities({0.4879, 0.3123, 0.1998, 0.0});
  CHECK(weighted_probability(w, {{1, 1, 0}}) == doctest::Approx(0.8002).epsilon(1e-4));
}

TEST_CASE("weighted probability under uniform omega") {
  for (std::size_t k : {1u, 3u, 7u}) {
    const auto w = NeighborWeights::uniform(k);
    CHECK(weighted_probability(w, {std::vector<int>(k, 1)}) ==
          doctest::Approx((k + 0.5) / (k + 1.0)));
    CHECK(weighted_probability(w, {std::vector<int>(k, 0)}) ==
          doctest::Approx(w.regularizer_mass() / 2.0));
  }
}

TEST_CASE("weighted probability stays inside the regularizer band") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(9);
    std::vector<double> deltas(k);
    for (auto& d : deltas) d = rng.uniform(-2, 4);
    const auto w = NeighborWeights::from_omega(omega_from_deltas(deltas));
    NeighborEvidence e;
    for (std::size_t i = 0; i < k; ++i) e.b.push_back(static_cast<int>(rng.below(2)));
    const double p = weighted_probability(w, e);
    const double half_mass = w.regularizer_mass() / 2.0;
    CHECK(p >= half_mass - 1e-15);
    CHECK(p <= 1.0 - half_mass + 1e-15);
  }
}

TEST_CASE("softmax sums to one and ignores a common shift") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> omega(2 + rng.below(8));
    for (auto& w : omega) w = rng.uniform(-10, 10);
    const auto p = softmax(omega);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    auto shifted = omega;
    for (auto& w : shifted) w += 123.0;
    const auto q = softmax(shifted);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-12));
  }
}

TEST_CASE("monotone omega gives monotone p") {
  const auto omega = omega_from_deltas(std::vector<double>{0.5, -1.0, 2.0});
  CHECK(omega == std::vector<double>{0.0, -0.5, -0.5, -2.5});
  const auto w = NeighborWeights::from_omega(omega);
  for (std::size_t i = 1; i < w.p.size(); ++i) CHECK(w.p[i] <= w.p[i - 1]);
  CHECK_THROWS_AS(NeighborWeights::from_omega({0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(NeighborWeights::from_probabilities({0.2, 0.8}), std::invalid_argument);
  CHECK_THROWS_AS(NeighborWeights::from_probabilities({0.6, 0.3}), std::invalid_argument);
}

TEST_CASE("log-likelihood matches direct evaluation") {
  const auto rows = random_evidence(40, 5, 7);
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> deltas(5);
    for (auto& d : deltas) d = rng.uniform(0, 3);
    const auto omega = omega_from_deltas(deltas);
    CHECK(log_likelihood(omega, rows) == doctest::Approx(likelihood_oracle(omega, rows)).epsilon(1e-12));
  }
}

TEST_CASE("fitting concentrates mass on a always-agreeing first neighbor") {
  std::vector<NeighborEvidence> rows(50, NeighborEvidence{{1, 0, 0}});
  const auto w = fit_from_evidence(rows, 3, 1);
  CHECK(w.p[0] > 0.95);
  for (std::size_t i = 1; i < w.p.size(); ++i) CHECK(w.p[i] <= w.p[i - 1]);
}

TEST_CASE("fitting with K = 1 yields two ordered entries") {
  const auto w = fit_from_evidence(random_evidence(30, 1, 2), 1, 4);
  REQUIRE(w.p.size() == 2);
  CHECK(w.p[0] >= w.p[1]);
}

TEST_CASE("fitted likelihood never trails the uniform baseline") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rows = random_evidence(60, 1 + seed % 6, seed);
    const std::size_t k = rows[0].b.size();
    const auto w = fit_from_evidence(rows, k, seed);
    CHECK(log_likelihood(w.omega, rows) >= log_likelihood(std::vector<double>(k + 1, 0.0), rows));
  }
}

TEST_CASE("fitting on a model is reproducible per seed") {
  const auto d = testing::random_dataset(60, 3, 9);
  const auto m = make_model(d, 5, GlobalWeights::uniform(3), LocalParams::uniform(3));
  const auto a = fit_neighbor_weights(m, d, 11);
  const auto b = fit_neighbor_weights(m, d, 11);
  CHECK(a.omega == b.omega);
  CHECK(a.p.size() == 6);

  auto one_class = d;
  for (auto& r : one_class.rows) r.label = 1;
  CHECK_THROWS_AS(fit_neighbor_weights(m, one_class, 1), DataError);
}

TEST_CASE("agreement evidence marks neighbors sharing the case's class") {
  Dataset d;
  d.feature_names = {"x"};
  d.ranges = {{0, 1}};
  d.normalized = true;
  d.rows = {{{0.0}, 0, 0}, {{0.1}, 0, 1}, {{0.2}, 1, 2}, {{0.9}, 1, 3}};
  const auto m = make_model(d, 2, GlobalWeights::uniform(1), LocalParams::uniform(1));
  const auto e = agreement_evidence(m, d);
  CHECK(e[0].b == std::vector<int>{1, 0});  // neighbors 1 (class 0), 2 (class 1)
  CHECK(e[3].b == std::vector<int>{1, 0});  // neighbors 2 (class 1), 1 (class 0)
}

TEST_CASE("attach probability") {
  RetrievalResult r;
  r.neighbors = {{1, 0.9, 1}, {2, 0.8, 1}, {3, 0.7, 0}};
  probability::attach_probability(r, NeighborWeights::from_probabilities({0.4879, 0.3123, 0.1998, 0.0}));
  REQUIRE(r.probability_default.has_value());
  CHECK(*r.probability_default == doctest::Approx(0.8002));
}
