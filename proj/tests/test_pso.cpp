#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cbr/pso.hpp"
#include "cbr/random.hpp"

using namespace cbr;
using pso::Config;
using pso::optimize;

namespace {

double sphere(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

Config box(std::size_t dims, double lo, double hi, std::uint64_t seed) {
  Config c;
  c.bounds.assign(dims, {lo, hi});
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("velocity update") {
  const std::vector<double> v{1.0, -2.0}, x{0.3, 0.1};
  CHECK(pso::velocity_update(v, x, x, x, 0.7, 1.5, 1.5, 0.4, 0.9) ==
        std::vector<double>{0.7 * 1.0, 0.7 * -2.0});
  const std::vector<double> p{5.0, 5.0}, g{-5.0, 9.0};
  const auto still = pso::velocity_update(v, x, p, g, 0.7, 1.5, 1.5, 0.0, 0.0);
  CHECK(still[0] == doctest::Approx(0.7));
  CHECK(still[1] == doctest::Approx(-1.4));
  const std::vector<double> v1{1}, x1{0}, p1{2}, g1{4};
  CHECK(pso::velocity_update(v1, x1, p1, g1, 0.5, 1, 1, 0.5, 0.5)[0] == doctest::Approx(3.5));
}

TEST_CASE("sphere converges with monotone history") {
  auto c = box(3, -5, 5, 1);
  c.swarm_size = 30;
  c.iterations = 200;
  const auto r = optimize(sphere, c);
  CHECK(r.best_cost < 1e-3);
  CHECK(r.best_cost == sphere(r.best_position));
  CHECK(r.history.size() == 201);
  CHECK(r.evaluations == 30 * 201);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
}

TEST_CASE("one-dimensional parabola") {
  auto c = box(1, -10, 10, 4);
  const auto r = optimize([](std::span<const double> x) { return (x[0] - 2) * (x[0] - 2); }, c);
  CHECK(std::fabs(r.best_position[0] - 2.0) < 1e-2);
}

TEST_CASE("maximizing f matches minimizing -f") {
  auto c = box(1, -10, 10, 9);
  auto up = c;
  up.maximize = true;
  const auto hi = optimize([](std::span<const double> x) { return -(x[0] - 2) * (x[0] - 2); }, up);
  const auto lo = optimize([](std::span<const double> x) { return (x[0] - 2) * (x[0] - 2); }, c);
  CHECK(hi.best_position == lo.best_position);
  CHECK(hi.best_cost == -lo.best_cost);
  for (std::size_t i = 1; i < hi.history.size(); ++i) CHECK(hi.history[i] >= hi.history[i - 1]);
}

TEST_CASE("best position stays in bounds") {
  Config c;
  c.bounds = {{0.1, 5.0}, {-1.0, 0.0}, {3.0, 3.5}};
  c.seed = 3;
  // Optimum outside the box pushes particles onto the walls.
  const auto r = optimize([](std::span<const double> x) { return -x[0] - x[1] + x[2]; }, c);
  CHECK(r.best_position[0] <= 5.0);
  CHECK(r.best_position[0] >= 0.1);
  CHECK(r.best_position[1] <= 0.0);
  CHECK(r.best_position[2] >= 3.0);
  CHECK(r.best_position[0] == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("identical seeds give bit-identical runs for any worker count") {
  auto c = box(4, -3, 3, 12);
  const auto a = optimize(sphere, c);
  c.workers = 4;
  const auto b = optimize(sphere, c);
  CHECK(a.best_position == b.best_position);
  CHECK(a.history == b.history);
  c.seed = 13;
  CHECK(optimize(sphere, c).history != a.history);
}

TEST_CASE("a lone particle without attraction drifts inertially") {
  auto c = box(1, -100, 100, 21);
  c.swarm_size = 1;
  c.c1 = c.c2 = 0.0;
  c.iterations = 15;
  // Replay the initial draws, then the damped drift path.
  Rng rng(c.seed);
  double x = rng.uniform(-100.0, 100.0);
  double v = rng.uniform(-100.0, 100.0);
  double best = x;
  for (std::size_t i = 0; i < c.iterations; ++i) {
    v *= c.inertia;
    x += v;
    if (x < -100.0 || x > 100.0) {
      x = std::clamp(x, -100.0, 100.0);
      v = 0.0;
    }
    best = std::min(best, x);
  }
  const auto r = optimize([](std::span<const double> p) { return p[0]; }, c);
  CHECK(r.best_position[0] == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("zero iterations keep the best initial particle") {
  auto c = box(2, -1, 1, 5);
  c.iterations = 0;
  const auto r = optimize(sphere, c);
  CHECK(r.history.size() == 1);
  CHECK(r.evaluations == c.swarm_size);
}

TEST_CASE("non-finite cost aborts") {
  auto c = box(1, -1, 1, 0);
  CHECK_THROWS_AS(optimize([](std::span<const double>) { return NAN; }, c), std::runtime_error);
}

TEST_CASE("configuration validation") {
  auto c = box(1, -1, 1, 0);
  c.inertia = 1.2;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = box(1, 1, 1, 0);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = box(1, 0, 1, 0);
  c.swarm_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
