#include "cbr/pso.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cbr/parallel.hpp"
#include "cbr/random.hpp"

namespace cbr::pso {

void Config::validate() const {
  if (swarm_size == 0) throw std::invalid_argument("pso: swarm_size must be positive");
  if (!(inertia >= 0.0 && inertia <= 1.0)) throw std::invalid_argument("pso: inertia outside [0,1]");
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw std::invalid_argument("pso: c1, c2 must be non-negative");
  if (bounds.empty()) throw std::invalid_argument("pso: no dimensions");
  for (const auto& b : bounds) {
    if (!(b.low < b.high)) throw std::invalid_argument("pso: bounds need low < high");
  }
}

std::vector<double> velocity_update(std::span<const double> v, std::span<const double> x,
                                    std::span<const double> p_best,
                                    std::span<const double> g_best, double inertia, double c1,
                                    double c2, double r1, double r2) {
  if (x.size() != v.size() || p_best.size() != v.size() || g_best.size() != v.size()) {
    throw std::invalid_argument("pso: dimension mismatch in velocity update");
  }
  std::vector<double> out(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) {
    out[d] = inertia * v[d] + c1 * r1 * (p_best[d] - x[d]) + c2 * r2 * (g_best[d] - x[d]);
  }
  return out;
}

namespace {

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best = 0.0;  // internal minimization scale
};

}  // namespace

Result optimize(const CostFunction& cost, const Config& config) {
  config.validate();
  const std::size_t dims = config.bounds.size();
  const double sign = config.maximize ? -1.0 : 1.0;
  Rng rng(config.seed);

  std::vector<Particle> swarm(config.swarm_size);
  for (auto& p : swarm) {
    p.position.resize(dims);
    p.velocity.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      const auto [lo, hi] = config.bounds[d];
      p.position[d] = rng.uniform(lo, hi);
      const double half = (hi - lo) / 2.0;
      p.velocity[d] = rng.uniform(-half, half);
    }
  }

  Result result;
  std::vector<double> values(swarm.size());
  auto evaluate_all = [&] {
    parallel_for(swarm.size(), config.workers, [&](std::size_t i) {
      values[i] = cost(swarm[i].position);
    });
    for (std::size_t i = 0; i < swarm.size(); ++i) {
      if (!std::isfinite(values[i])) {
        std::ostringstream msg;
        msg << "pso: non-finite cost " << values[i] << " at particle " << i << ", position [";
        for (std::size_t d = 0; d < dims; ++d) msg << (d ? ", " : "") << swarm[i].position[d];
        msg << "]";
        throw std::runtime_error(msg.str());
      }
    }
    result.evaluations += swarm.size();
  };

  evaluate_all();
  std::size_t leader = 0;
  for (std::size_t i = 0; i < swarm.size(); ++i) {
    swarm[i].best_position = swarm[i].position;
    swarm[i].best = sign * values[i];
    if (swarm[i].best < swarm[leader].best) leader = i;
  }
  std::vector<double> global_best = swarm[leader].best_position;
  double global_value = swarm[leader].best;
  result.history.push_back(sign * global_value);

  std::vector<std::pair<double, double>> draws(swarm.size());
  for (std::size_t iter = 0; iter < config.iterations; ++iter) {
    for (auto& r : draws) r = {rng.uniform(), rng.uniform()};

    for (std::size_t i = 0; i < swarm.size(); ++i) {
      auto& p = swarm[i];
      p.velocity = velocity_update(p.velocity, p.position, p.best_position, global_best,
                                   config.inertia, config.c1, config.c2, draws[i].first,
                                   draws[i].second);
      for (std::size_t d = 0; d < dims; ++d) {
        const auto [lo, hi] = config.bounds[d];
        const double moved = p.position[d] + p.velocity[d];
        if (moved < lo || moved > hi) {
          p.position[d] = std::clamp(moved, lo, hi);
          p.velocity[d] = 0.0;
        } else {
          p.position[d] = moved;
        }
      }
    }

    evaluate_all();
    for (std::size_t i = 0; i < swarm.size(); ++i) {
      auto& p = swarm[i];
      const double v = sign * values[i];
      if (v < p.best) {
        p.best = v;
        p.best_position = p.position;
      }
    }
    // Global best is refreshed once per iteration, after every particle moved.
    for (const auto& p : swarm) {
      if (p.best < global_value) {
        global_value = p.best;
        global_best = p.best_position;
      }
    }
    result.history.push_back(sign * global_value);
  }

  result.best_position = std::move(global_best);
  result.best_cost = sign * global_value;
  return result;
}

}  // namespace cbr::pso
