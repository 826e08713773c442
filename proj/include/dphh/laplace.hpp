#pragma once

// Seeded Laplace noise via the inverse-CDF transform.
//
// Sampling uses plain double arithmetic; the granularity of the double grid
// is a known limitation for adversarial privacy attacks and is documented
// rather than mitigated (no snapping mechanism).

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "dphh/prng.hpp"

namespace dphh {

class LaplaceSampler {
 public:
  explicit LaplaceSampler(std::uint64_t seed) : gen_(seed) {}

  /// One draw from Lap(scale), mean zero. Requires scale > 0.
  /// Satisfies Pr[|Y| >= l * scale] = exp(-l).
  double sample(double scale) {
    if (!(scale > 0.0)) {
      throw std::invalid_argument("LaplaceSampler: scale must be positive");
    }
    double v = gen_.next_unit() - 0.5;  // (-1/2, 1/2)
    if (v == 0.0) return 0.0;
    double s = v > 0.0 ? 1.0 : -1.0;
    return -scale * s * std::log(1.0 - 2.0 * std::fabs(v));
  }

 private:
  Splitmix64 gen_;
};

}  // namespace dphh
