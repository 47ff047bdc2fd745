/*
 * Copyright 2026 the pasoa authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>

namespace pasoa {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

// log p values below this are treated as "effectively zero likelihood";
// exp(kLoglikFloor) is the smallest positive normal double neighborhood.
inline constexpr double kLoglikFloor = -745.0;

inline double log_normal_pdf(double x) { return -0.5 * (x * x + kLog2Pi); }

inline double logit(double y) { return std::log(y / (1.0 - y)); }

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log of the standard normal CDF. Three regimes:
//   x < -tail : first-order tail expansion  log phi(x) - log(-x)
//   |x|<=tail : log(0.5 * erfc(-x/sqrt 2))
//   x >  tail : log1p(-phi(x)/x), the complementary form of the expansion
// The tail threshold is a model parameter (default 8); the asymptotic branch
// keeps log-probability evaluations finite far beyond where erfc underflows.
inline double log_normal_cdf(double x, double tail = 8.0) {
  if (x < -tail) {
    return log_normal_pdf(x) - std::log(-x);
  }
  if (x > tail) {
    return std::log1p(-std::exp(log_normal_pdf(x) - std::log(x)));
  }
  return std::log(0.5 * std::erfc(-x / kSqrt2));
}

// d/dx log_normal_cdf(x), branch-consistent with the value above so that
// analytic gradients match finite differences of the implemented density.
inline double dlog_normal_cdf(double x, double tail = 8.0) {
  if (x < -tail) {
    return -x - 1.0 / x;
  }
  return std::exp(log_normal_pdf(x) - log_normal_cdf(x, tail));
}

}  // namespace pasoa
