#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cbr::pso {

struct Bounds {
  double low = 0.0;
  double high = 1.0;
};

struct Config {
  std::size_t swarm_size = 20;
  std::size_t iterations = 50;
  double inertia = 0.7;
  double c1 = 1.5;
  double c2 = 1.5;
  std::vector<Bounds> bounds;
  std::uint64_t seed = 0;
  bool maximize = false;
  /// Worker threads for cost evaluation within one iteration (0 = default).
  /// The cost function must then be safe to call concurrently.
  std::size_t workers = 1;

  void validate() const;
};

struct Result {
  std::vector<double> best_position;
  /// Objective value at best_position (not negated when maximizing).
  double best_cost = 0.0;
  /// Best objective after initialization and after each iteration.
  std::vector<double> history;
  std::size_t evaluations = 0;
};

using CostFunction = std::function<double(std::span<const double>)>;

/// inertia * v + c1 * r1 * (p_best - x) + c2 * r2 * (g_best - x).
std::vector<double> velocity_update(std::span<const double> v, std::span<const double> x,
                                    std::span<const double> p_best,
                                    std::span<const double> g_best, double inertia, double c1,
                                    double c2, double r1, double r2);

/// Global-best particle swarm over a bounded box.
///
/// Positions start uniform in the box and velocities uniform in
/// [-(high-low)/2, (high-low)/2]. After each move a position is clamped to
/// its bounds and the offending velocity component is zeroed. r1, r2 are
/// drawn per particle per iteration, serially and before any cost is
/// evaluated, so the result depends only on the seed. Throws
/// std::runtime_error when the cost returns a non-finite value.
Result optimize(const CostFunction& cost, const Config& config);

}  // namespace cbr::pso
