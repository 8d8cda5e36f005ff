#pragma once

#include <random>

#include "cmg/common.hpp"

namespace cmg::testing {

/// Logistic map x <- r x (1 - x) after a 1000-step burn-in.
inline Series logistic_series(std::size_t n, std::uint64_t seed, double r = 4.0) {
  std::mt19937_64 rng(seed);
  double x = uniform(rng, 0.1, 0.9);
  for (int k = 0; k < 1000; ++k) x = r * x * (1.0 - x);
  Series out(n);
  for (auto& v : out) v = x = r * x * (1.0 - x);
  return out;
}

/// x component of the Henon map (a = 1.4, b = 0.3) after burn-in.
inline Series henon_series(std::size_t n, double x0 = 0.1, double y0 = 0.1) {
  double x = x0, y = y0;
  auto step = [&] {
    const double nx = 1.0 - 1.4 * x * x + y;
    y = 0.3 * x;
    x = nx;
  };
  for (int k = 0; k < 1000; ++k) step();
  Series out(n);
  for (auto& v : out) {
    step();
    v = x;
  }
  return out;
}

inline Series white_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Series out(n);
  for (auto& v : out) v = standard_normal(rng);
  return out;
}

inline Series cumulative(const Series& x) {
  Series out(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = acc += x[i];
  return out;
}

}  // namespace cmg::testing
