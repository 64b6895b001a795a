#pragma once

// Independent oracles used by the test suites. These stay deliberately
// separate from the library implementations they check.

#include "thinband/scalar.hpp"

#include <array>
#include <cmath>

namespace thinband::oracles {

// Certified enclosure of the tribonacci constant (the real root of
// t^3 = t^2 + t + 1) by plain bisection on exact dyadic polynomial values.
inline Scalar tribonacci_lambda(int prec) {
  auto poly = [](const Dyadic& t) {  // t^3 - t^2 - t - 1, exact
    return t * t * t - t * t - t - Dyadic(1);
  };
  Dyadic lo(1), hi(2);
  for (int i = 0; i < prec + 4; ++i) {
    Dyadic mid((lo + hi).mantissa(), (lo + hi).exponent() - 1);
    if (poly(mid).sign() < 0)
      lo = mid;
    else
      hi = mid;
  }
  return Scalar(lo, hi, prec);
}

// Power iteration for the Perron ray of B(1) = [[1,1,1],[1,0,0],[0,1,0]],
// in long double arithmetic.
inline std::array<long double, 3> perron_ray_b1(int iters = 300) {
  std::array<long double, 3> v{1.0L, 1.0L, 1.0L};
  for (int i = 0; i < iters; ++i) {
    std::array<long double, 3> w{v[0] + v[1] + v[2], v[0], v[1]};
    long double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    for (auto& c : w) c /= n;
    v = w;
  }
  return v;
}

}  // namespace thinband::oracles
