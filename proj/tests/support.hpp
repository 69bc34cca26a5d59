#pragma once

// Small helpers shared by the test programs.

#include "kicked/mat2.hpp"

#include <cmath>
#include <random>

namespace testing_support {

/// Unimodular matrix with entries roughly up to `scale`: pick a, b, c and
/// solve for d, redrawing when a is too small to divide by safely.
inline kicked::Mat2R random_unimodular(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (;;) {
    const double a = u(rng), b = u(rng), c = u(rng);
    if (std::abs(a) < 1e-3 * scale || std::abs(a) < 1e-3) continue;
    const double d = (1.0 + b * c) / a;
    if (std::abs(d) > scale) continue;
    return {a, b, c, d};
  }
}

inline double max_abs_diff(const kicked::Mat2R& x, const kicked::Mat2R& y) {
  return std::max({std::abs(x.a11 - y.a11), std::abs(x.a12 - y.a12), std::abs(x.a21 - y.a21),
                   std::abs(x.a22 - y.a22)});
}

}  // namespace testing_support
