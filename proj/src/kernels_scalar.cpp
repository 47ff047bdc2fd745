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

// Reference kernels. Plain sequential loops in fixed index order; the SIMD
// variants are equivalence-tested against these.

#include <algorithm>
#include <cmath>
#include <limits>

#include "pasoa/kernels.hpp"
#include "pasoa/math.hpp"

namespace pasoa::kernels {
namespace {

double max_entry(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

double logsumexp_scalar(const double* x, std::size_t n) {
  const double m = max_entry(x, n);
  if (!std::isfinite(m)) return m;  // all -inf (or a +inf/NaN upstream bug)
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

double ess_scalar(const double* x, std::size_t n, double gamma) {
  const double m = max_entry(x, n);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::exp(gamma * (x[i] - m));
    s1 += t;
    s2 += t * t;
  }
  return (s1 * s1) / s2;
}

void exp_normalize_scalar(const double* x, std::size_t n, double* w) {
  const double m = max_entry(x, n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(x[i] - m);
    s += w[i];
  }
  const double inv = 1.0 / s;
  for (std::size_t i = 0; i < n; ++i) w[i] *= inv;
}

void weighted_mean_sd_scalar(const double* x, const double* w, std::size_t n,
                             double* mean, double* sd) {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s1 += w[i] * x[i];
    s2 += w[i] * x[i] * x[i];
  }
  *mean = s1;
  *sd = std::sqrt(std::max(0.0, s2 - s1 * s1));
}

// mu(theta, xi) = b + sum_s alpha / (m + ||theta_s - xi||^2) and the
// log-normal density of y around log mu.
void sources_loglik_scalar(const SourcesParams& p, double y, const double* xi,
                           const double* pos, std::size_t m, std::size_t stride,
                           double* out, bool accumulate) {
  const double log_y = std::log(y);
  const double inv_var = 1.0 / (p.sigma * p.sigma);
  const double base = -log_y - std::log(p.sigma) - 0.5 * kLog2Pi;
  for (std::size_t i = 0; i < m; ++i) {
    double mu = p.background;
    for (std::size_t s = 0; s < p.n_sources; ++s) {
      const double dx = pos[i + (2 * s) * stride] - xi[0];
      const double dy_ = pos[i + (2 * s + 1) * stride] - xi[1];
      mu += p.alpha / (p.softening + dx * dx + dy_ * dy_);
    }
    const double r = log_y - std::log(mu);
    const double ll = base - 0.5 * r * r * inv_var;
    out[i] = accumulate ? out[i] + ll : ll;
  }
}

void sources_loglik_grads_scalar(const SourcesParams& p, double y,
                                 const double* xi, const double* pos,
                                 std::size_t m, std::size_t stride, double* ll,
                                 double* dxi0, double* dxi1, double* dy) {
  const double log_y = std::log(y);
  const double inv_var = 1.0 / (p.sigma * p.sigma);
  const double base = -log_y - std::log(p.sigma) - 0.5 * kLog2Pi;
  for (std::size_t i = 0; i < m; ++i) {
    double mu = p.background, g0 = 0.0, g1 = 0.0;
    for (std::size_t s = 0; s < p.n_sources; ++s) {
      const double dx = pos[i + (2 * s) * stride] - xi[0];
      const double dy_ = pos[i + (2 * s + 1) * stride] - xi[1];
      const double inv_d = 1.0 / (p.softening + dx * dx + dy_ * dy_);
      mu += p.alpha * inv_d;
      // d mu / d xi_j = 2 alpha (theta_j - xi_j) / d^2
      const double c = 2.0 * p.alpha * inv_d * inv_d;
      g0 += c * dx;
      g1 += c * dy_;
    }
    const double r = log_y - std::log(mu);
    ll[i] = base - 0.5 * r * r * inv_var;
    const double dll_dmu = r * inv_var / mu;
    dxi0[i] = dll_dmu * g0;
    dxi1[i] = dll_dmu * g1;
    dy[i] = -(1.0 + r * inv_var) / y;
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table = {
      "scalar",
      logsumexp_scalar,
      ess_scalar,
      exp_normalize_scalar,
      weighted_mean_sd_scalar,
      sources_loglik_scalar,
      sources_loglik_grads_scalar,
  };
  return table;
}

}  // namespace pasoa::kernels
