#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cbr/data.hpp"
#include "cbr/random.hpp"

namespace cbr::testing {

/// Random dataset of `n` rows and `width` features; values uniform in
/// [0, 1), labels from a noisy threshold on the first feature, ids 0..n-1.
/// Both classes are always present when n >= 2.
inline Dataset random_dataset(std::size_t n, std::size_t width, std::uint64_t seed,
                              bool normalized = true) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t j = 0; j < width; ++j) d.feature_names.push_back("f" + std::to_string(j));
  d.label_name = "y";
  for (std::size_t i = 0; i < n; ++i) {
    Case c;
    for (std::size_t j = 0; j < width; ++j) c.features.push_back(rng.uniform());
    c.label = (c.features[0] + 0.3 * rng.uniform() > 0.65) ? 1 : 0;
    c.id = i;
    d.rows.push_back(std::move(c));
  }
  if (n >= 2) {
    d.rows[0].label = 0;
    d.rows[1].label = 1;
  }
  d.ranges.assign(width, FeatureRange{0.0, 1.0});
  d.normalized = normalized;
  return d;
}

/// Two Gaussian blobs centred at -center and +center in every feature,
/// labels 0 and 1, raw units.
inline Dataset blobs(std::size_t per_class, std::size_t width, double center,
                     std::uint64_t seed) {
  Rng rng(seed);
  auto normal = [&] {
    // Box-Muller with portable uniforms.
    double u1 = rng.uniform();
    while (u1 <= 0.0) u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  };
  Dataset d;
  for (std::size_t j = 0; j < width; ++j) d.feature_names.push_back("x" + std::to_string(j));
  d.label_name = "y";
  d.ranges.assign(width, FeatureRange{1e300, -1e300});
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    Case c;
    c.label = static_cast<Label>(i % 2);
    c.id = i;
    for (std::size_t j = 0; j < width; ++j) {
      const double v = (c.label == 1 ? center : -center) + normal();
      c.features.push_back(v);
      d.ranges[j].min = std::min(d.ranges[j].min, v);
      d.ranges[j].max = std::max(d.ranges[j].max, v);
    }
    d.rows.push_back(std::move(c));
  }
  return d;
}

}  // namespace cbr::testing
