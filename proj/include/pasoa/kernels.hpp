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

#include <cstddef>
#include <string>

namespace pasoa::kernels {

// Parameters of the source-location signal model, shared by the batched
// likelihood kernels. `positions` in the kernel calls is an M x 2S matrix
// stored column-major (coordinate-major), so each coordinate is contiguous
// across particles.
struct SourcesParams {
  std::size_t n_sources;
  double alpha;        // per-source signal strength
  double background;   // additive floor b
  double softening;    // m, keeps the inverse-square law finite at 0
  double sigma;        // log-normal observation noise std
};

struct Ops {
  const char* name;

  // max-shifted log(sum(exp(x))); returns -inf when all entries are -inf.
  double (*logsumexp)(const double* x, std::size_t n);

  // Effective sample size (sum w)^2 / sum w^2 of w_i = exp(gamma * x[i]),
  // invariant to a common shift of x. gamma = 1 gives the plain ESS of
  // log-weights. Requires at least one finite entry.
  double (*ess)(const double* x, std::size_t n, double gamma);

  // w[i] = exp(x[i] - logsumexp(x)).
  void (*exp_normalize)(const double* x, std::size_t n, double* w);

  // Weighted mean and standard deviation of x under normalized weights w.
  void (*weighted_mean_sd)(const double* x, const double* w, std::size_t n,
                           double* mean, double* sd);

  // Source-location log-likelihood of scalar observation y at design xi for
  // every particle; adds into `out` when accumulate is set.
  void (*sources_loglik)(const SourcesParams& p, double y, const double* xi,
                         const double* positions, std::size_t m,
                         std::size_t stride, double* out, bool accumulate);

  // Same pass, also producing the design partials at fixed y (dxi0, dxi1)
  // and the observation partial (dy) per particle.
  void (*sources_loglik_grads)(const SourcesParams& p, double y,
                               const double* xi, const double* positions,
                               std::size_t m, std::size_t stride, double* ll,
                               double* dxi0, double* dxi1, double* dy);
};

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
#define PASOA_HAVE_AVX2_KERNELS 1
const Ops& avx2_ops();
#endif

// Active backend: resolved once from PASOA_KERNEL=scalar|avx2|auto (default
// auto = best supported by the CPU).
const Ops& ops();

// Test hook; returns false when the named backend is unavailable.
bool force_backend(const std::string& name);

}  // namespace pasoa::kernels
