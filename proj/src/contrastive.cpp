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

#include "pasoa/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pasoa/errors.hpp"
#include "pasoa/kernels.hpp"
#include "pasoa/math.hpp"

namespace pasoa {
namespace {

constexpr std::uint64_t kTagRestart = 0x7273;
constexpr std::uint64_t kTagInit = 0x696e;
constexpr std::uint64_t kTagIter = 0x6974;
constexpr std::uint64_t kTagRank = 0x726b;

constexpr std::size_t kRankSamples = 1000;  // restart selection / diagnostics

// Inverse-CDF sampler over a normalized weight vector.
struct CategoricalSampler {
  std::vector<double> cum;

  explicit CategoricalSampler(std::span<const double> w) : cum(w.size()) {
    double c = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      c += w[i];
      cum[i] = c;
    }
    cum.back() = 1.0;
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.u01();
    return static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
  }
};

struct Scratch {
  std::vector<double> ll, dxi, dy, w, theta, path;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

double pce_integrand(const Model& model, std::span<const double> xi,
                     const ContrastiveSet& cs, double y) {
  auto& s = scratch();
  const std::size_t n = cs.count;
  s.ll.resize(n);
  model.log_likelihood_batch(y, xi, cs.thetas.data(), n, n, s.ll.data(),
                             false);
  for (double& v : s.ll) v = std::max(v, kLoglikFloor);
  const double lse = kernels::ops().logsumexp(s.ll.data(), n);
  return s.ll[0] - lse + std::log(static_cast<double>(n));
}

void pce_sample_gradient(const Model& model, std::span<const double> xi,
                         const ContrastiveSet& cs, double u,
                         std::span<double> out, double* weights_out) {
  auto& s = scratch();
  const std::size_t n = cs.count;
  const std::size_t d = cs.dim;
  const std::size_t dx = model.design_dim();

  s.theta.resize(d);
  cs.row(0, s.theta);
  const double y = model.simulate(s.theta, xi, u);
  s.path.resize(dx);
  model.path_grad_simulate(s.theta, xi, u, s.path);

  s.ll.resize(n);
  s.dxi.resize(n * dx);
  s.dy.resize(n);
  model.loglik_grads_batch(y, xi, cs.thetas.data(), n, n, s.ll.data(),
                           s.dxi.data(), s.dy.data());

  // Floored likelihoods contribute neither weight nor gradient.
  for (std::size_t l = 0; l < n; ++l) {
    if (s.ll[l] < kLoglikFloor) {
      s.ll[l] = kLoglikFloor;
      s.dy[l] = 0.0;
      for (std::size_t j = 0; j < dx; ++j) s.dxi[l + j * n] = 0.0;
    }
  }

  s.w.resize(n);
  kernels::ops().exp_normalize(s.ll.data(), n, s.w.data());
  if (weights_out != nullptr) {
    std::copy(s.w.begin(), s.w.end(), weights_out);
  }

  for (std::size_t j = 0; j < dx; ++j) {
    const double* dxi_j = s.dxi.data() + j * n;
    const double total0 = dxi_j[0] + s.dy[0] * s.path[j];
    double weighted = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      weighted += s.w[l] * (dxi_j[l] + s.dy[l] * s.path[j]);
    }
    out[j] = total0 - weighted;
  }
}

PceEstimate estimate_pce(const Model& model,
                         const std::vector<SubApproximation>& subsets,
                         std::span<const double> xi, std::size_t n_mc,
                         Rng rng) {
  const std::size_t groups = subsets.size();
  const std::size_t d = subsets[0].dim;
  std::vector<CategoricalSampler> samplers;
  samplers.reserve(groups);
  for (const auto& sub : subsets) samplers.emplace_back(sub.weights);

  ContrastiveSet cs(groups - 1, d);
  std::vector<double> theta(d);

  double mean = 0.0, m2 = 0.0;  // Welford
  for (std::size_t i = 0; i < n_mc; ++i) {
    Rng stream = rng.fork(i);
    for (std::size_t l = 0; l < groups; ++l) {
      const std::size_t idx = samplers[l].draw(stream);
      subsets[l].row(idx, theta);
      cs.set_row(l, theta);
    }
    const double u = stream.normal();
    cs.row(0, theta);
    const double y = model.simulate(theta, xi, u);
    const double f = pce_integrand(model, xi, cs, y);

    const double delta = f - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (f - mean);
  }
  const double n = static_cast<double>(n_mc);
  const double var = n > 1 ? m2 / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n)};
}

void adam_step(OptimState& state, std::span<const double> gradient,
               const SGConfig& cfg, const DesignBounds& bounds) {
  for (double g : gradient) {
    if (!std::isfinite(g)) {
      throw NonFiniteGradientError(
          "non-finite design gradient at iteration " +
          std::to_string(state.t + 1));
    }
  }
  state.t += 1;
  const std::size_t d = state.xi.size();
  if (cfg.use_adam) {
    const double t = static_cast<double>(state.t);
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (std::size_t j = 0; j < d; ++j) {
      const double g = gradient[j];
      state.m1[j] = cfg.adam_beta1 * state.m1[j] + (1.0 - cfg.adam_beta1) * g;
      state.m2[j] =
          cfg.adam_beta2 * state.m2[j] + (1.0 - cfg.adam_beta2) * g * g;
      const double mhat = state.m1[j] / c1;
      const double vhat = state.m2[j] / c2;
      state.xi[j] += cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      state.xi[j] = bounds.clamp(j, state.xi[j]);
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) {
      state.xi[j] += cfg.learning_rate * gradient[j];
      state.xi[j] = bounds.clamp(j, state.xi[j]);
    }
  }
}

DesignResult optimize_design(const Model& model,
                             const std::vector<SubApproximation>& subsets,
                             std::span<const double> xi_init,
                             const SGConfig& cfg, Rng rng) {
  const DesignBounds& bounds = model.design_bounds();
  const std::size_t groups = subsets.size();
  const std::size_t d = subsets[0].dim;
  const std::size_t dx = model.design_dim();

  std::vector<CategoricalSampler> samplers;
  samplers.reserve(groups);
  for (const auto& sub : subsets) samplers.emplace_back(sub.weights);

  ContrastiveSet cs(groups - 1, d);
  std::vector<double> theta(d), grad(dx), sample_grad(dx);

  DesignResult best;
  bool have_best = false;

  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Rng rrng = rng.fork({kTagRestart, r});
    std::vector<double> start(xi_init.begin(), xi_init.end());
    if (r > 0) {
      Rng irng = rrng.fork(kTagInit);
      for (std::size_t j = 0; j < dx; ++j) {
        start[j] = irng.uniform(bounds.lo[j], bounds.hi[j]);
      }
    }

    OptimState state(start);
    for (std::size_t t = 1; t <= cfg.steps; ++t) {
      Rng trng = rrng.fork({kTagIter, t});
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < cfg.minibatch; ++i) {
        Rng srng = trng.fork(i);
        for (std::size_t l = 0; l < groups; ++l) {
          const std::size_t idx = samplers[l].draw(srng);
          subsets[l].row(idx, theta);
          cs.set_row(l, theta);
        }
        const double u = srng.normal();
        pce_sample_gradient(model, state.xi, cs, u, sample_grad);
        for (std::size_t j = 0; j < dx; ++j) grad[j] += sample_grad[j];
      }
      const double inv = 1.0 / static_cast<double>(cfg.minibatch);
      for (std::size_t j = 0; j < dx; ++j) grad[j] *= inv;
      adam_step(state, grad, cfg, bounds);

      if (cfg.polyak_window > 0 && t + cfg.polyak_window > cfg.steps) {
        for (std::size_t j = 0; j < dx; ++j) state.polyak_sum[j] += state.xi[j];
        state.polyak_count += 1;
      }
    }

    std::vector<double> xi_final = state.xi;
    if (state.polyak_count > 0) {
      for (std::size_t j = 0; j < dx; ++j) {
        xi_final[j] = state.polyak_sum[j] / static_cast<double>(state.polyak_count);
      }
    }

    const PceEstimate est =
        estimate_pce(model, subsets, xi_final, kRankSamples, rrng.fork(kTagRank));
    if (!have_best || est.value > best.pce.value) {
      best.xi = std::move(xi_final);
      best.xi_start = std::move(start);
      best.pce = est;
      have_best = true;
    }
  }
  return best;
}

}  // namespace pasoa
