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

#include "pasoa/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pasoa/errors.hpp"
#include "pasoa/kernels.hpp"
#include "pasoa/math.hpp"

namespace pasoa {
namespace {

constexpr double kProposalSdFloor = 1e-6;

// rng fork tags for the tempering sub-streams
constexpr std::uint64_t kTagResample = 0x7265;
constexpr std::uint64_t kTagMove = 0x6d76;

double floored(double ll) { return std::max(ll, kLoglikFloor); }

bool all_floored(std::span<const double> loglik) {
  for (double ll : loglik) {
    if (ll > kLoglikFloor) return false;
  }
  return true;
}

}  // namespace

void ParticleCloud::set_uniform_weights() {
  const double lw = -std::log(static_cast<double>(count));
  std::fill(log_weights.begin(), log_weights.end(), lw);
}

ResamplingScheme resampling_scheme_from_string(const std::string& s) {
  if (s == "multinomial") return ResamplingScheme::multinomial;
  if (s == "stratified") return ResamplingScheme::stratified;
  if (s == "systematic") return ResamplingScheme::systematic;
  throw ValidationError("unknown resampling scheme '" + s + "'");
}

const char* to_string(ResamplingScheme s) {
  switch (s) {
    case ResamplingScheme::multinomial: return "multinomial";
    case ResamplingScheme::stratified: return "stratified";
    case ResamplingScheme::systematic: return "systematic";
  }
  return "?";
}

double effective_sample_size(std::span<const double> log_weights) {
  bool any_finite = false;
  for (double lw : log_weights) {
    if (lw > -std::numeric_limits<double>::infinity()) {
      any_finite = true;
      break;
    }
  }
  if (!any_finite) {
    throw DegenerateWeightsError("all log-weights are -inf");
  }
  return kernels::ops().ess(log_weights.data(), log_weights.size(), 1.0);
}

double solve_temper_increment(std::span<const double> loglik, double lambda,
                              const TemperConfig& cfg) {
  if (all_floored(loglik)) {
    throw DegenerateWeightsError(
        "zero likelihood under every particle; cannot temper");
  }
  const std::size_t m = loglik.size();
  const double target = cfg.ess_min_fraction * static_cast<double>(m);
  const double hi0 = 1.0 - lambda;

  const auto ess_at = [&](double gamma) {
    return kernels::ops().ess(loglik.data(), m, gamma);
  };

  // ESS(gamma) decreases from M at gamma=0; if it stays above the target on
  // the whole interval the tempering terminates with gamma = 1 - lambda.
  if (ess_at(hi0) >= target) return hi0;

  double lo = 0.0, hi = hi0;
  for (int iter = 0; iter < 200 && hi - lo > cfg.root_tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double e = ess_at(mid);
    if (std::abs(e - target) <= cfg.root_tol * static_cast<double>(m)) {
      return mid;
    }
    if (e > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void reweight(ParticleCloud& cloud, std::span<const double> loglik,
              double gamma) {
  if (all_floored(loglik)) {
    throw DegenerateWeightsError(
        "zero likelihood under every particle; degenerate weights");
  }
  const std::size_t m = cloud.count;
  for (std::size_t i = 0; i < m; ++i) {
    cloud.log_weights[i] = gamma * floored(loglik[i]);
  }
  const double lse =
      kernels::ops().logsumexp(cloud.log_weights.data(), m);
  for (std::size_t i = 0; i < m; ++i) cloud.log_weights[i] -= lse;
}

void resample(ParticleCloud& cloud, ResamplingScheme scheme, Rng rng) {
  const std::size_t m = cloud.count;
  std::vector<double> w(m);
  kernels::ops().exp_normalize(cloud.log_weights.data(), m, w.data());

  std::vector<std::uint32_t> idx(m);
  switch (scheme) {
    case ResamplingScheme::multinomial: {
      std::vector<double> cum(m);
      double c = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        c += w[i];
        cum[i] = c;
      }
      cum[m - 1] = 1.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double u = rng.u01();
        idx[i] = static_cast<std::uint32_t>(
            std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      }
      break;
    }
    case ResamplingScheme::stratified:
    case ResamplingScheme::systematic: {
      const double u_common =
          scheme == ResamplingScheme::systematic ? rng.u01() : 0.0;
      double c = w[0];
      std::size_t j = 0;
      const double inv_m = 1.0 / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double ui = scheme == ResamplingScheme::stratified ? rng.u01()
                                                                 : u_common;
        const double u = (static_cast<double>(i) + ui) * inv_m;
        while (c < u && j + 1 < m) c += w[++j];
        idx[i] = static_cast<std::uint32_t>(j);
      }
      break;
    }
  }

  std::vector<double> fresh(m * cloud.dim);
  for (std::size_t j = 0; j < cloud.dim; ++j) {
    const double* src = cloud.col(j);
    double* dst = fresh.data() + j * m;
    for (std::size_t i = 0; i < m; ++i) dst[i] = src[idx[i]];
  }
  cloud.positions.swap(fresh);
  cloud.set_uniform_weights();
}

void ScalarLogTarget::eval(const double* positions, std::size_t m,
                           std::size_t stride, double* out) const {
  std::vector<double> theta(dim_);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) theta[j] = positions[i + j * stride];
    out[i] = fn_(theta);
  }
}

void TemperedPosteriorTarget::eval(const double* positions, std::size_t m,
                                   std::size_t stride, double* out) const {
  model_.log_prior_batch(positions, m, stride, out, false);
  for (const HistoryItem& item : history_) {
    model_.log_likelihood_batch(item.y, item.xi, positions, m, stride, out,
                                true);
  }
  if (lambda_ > 0.0) {
    std::vector<double> ll(m);
    model_.log_likelihood_batch(y_, xi_, positions, m, stride, ll.data(),
                                false);
    for (std::size_t i = 0; i < m; ++i) out[i] += lambda_ * floored(ll[i]);
  }
}

double mh_move(ParticleCloud& cloud, const Model& model,
               const LogTargetBatch& log_target, const TemperConfig& cfg,
               Rng rng) {
  const std::size_t m = cloud.count;
  const std::size_t d = cloud.dim;
  const std::size_t dz = model.unconstrained_dim();

  // transform the cloud and per-particle log-Jacobians
  std::vector<double> z(m * dz), jac(m);
  {
    std::vector<double> theta(d), zi(dz);
    for (std::size_t i = 0; i < m; ++i) {
      cloud.row(i, theta);
      jac[i] = model.to_unconstrained(theta, zi);
      for (std::size_t j = 0; j < dz; ++j) z[i + j * m] = zi[j];
    }
  }

  // proposal scale: weighted std per transformed coordinate
  std::vector<double> weights(m), scales(dz);
  kernels::ops().exp_normalize(cloud.log_weights.data(), m, weights.data());
  for (std::size_t j = 0; j < dz; ++j) {
    double mean, sd;
    kernels::ops().weighted_mean_sd(z.data() + j * m, weights.data(), m, &mean,
                                    &sd);
    scales[j] = cfg.mh_scale * std::max(sd, kProposalSdFloor);
  }

  std::vector<double> t_cur(m);
  log_target.eval(cloud.positions.data(), m, m, t_cur.data());
  for (std::size_t i = 0; i < m; ++i) t_cur[i] += jac[i];

  std::vector<double> z_prop(m * dz), theta_prop(m * d), jac_prop(m),
      t_prop(m), log_u(m);
  std::vector<double> zi(dz), theta(d);

  std::size_t accepted = 0;
  for (std::size_t sweep = 0; sweep < cfg.mh_moves_per_step; ++sweep) {
    for (std::size_t i = 0; i < m; ++i) {
      Rng stream = rng.fork({sweep, i});
      for (std::size_t j = 0; j < dz; ++j) {
        zi[j] = z[i + j * m] + scales[j] * stream.normal();
        z_prop[i + j * m] = zi[j];
      }
      jac_prop[i] = model.from_unconstrained(zi, theta);
      for (std::size_t j = 0; j < d; ++j) theta_prop[i + j * m] = theta[j];
      log_u[i] = std::log(stream.u01());
    }
    log_target.eval(theta_prop.data(), m, m, t_prop.data());
    for (std::size_t i = 0; i < m; ++i) {
      if (log_u[i] < t_prop[i] + jac_prop[i] - t_cur[i]) {
        ++accepted;
        t_cur[i] = t_prop[i] + jac_prop[i];
        for (std::size_t j = 0; j < dz; ++j) z[i + j * m] = z_prop[i + j * m];
        for (std::size_t j = 0; j < d; ++j) {
          cloud.positions[i + j * m] = theta_prop[i + j * m];
        }
      }
    }
  }
  const double total =
      static_cast<double>(m) * static_cast<double>(cfg.mh_moves_per_step);
  return cfg.mh_moves_per_step == 0 ? 0.0
                                    : static_cast<double>(accepted) / total;
}

TemperTrace temper_to_posterior(const Model& model, ParticleCloud& cloud,
                                double y, std::span<const double> xi,
                                const History& history,
                                const TemperConfig& cfg, Rng rng) {
  TemperTrace trace;
  const std::size_t m = cloud.count;
  std::vector<double> loglik(m);

  double lambda = 0.0;
  for (std::size_t tau = 1; lambda < 1.0; ++tau) {
    if (tau > cfg.max_temper_steps) {
      throw RuntimeError("tempering exceeded max_temper_steps without "
                         "reaching lambda = 1");
    }
    resample(cloud, cfg.scheme, rng.fork({kTagResample, tau}));

    double acc = 0.0;
    if (cfg.mh_moves_per_step > 0) {
      const TemperedPosteriorTarget target(model, history, y, xi, lambda);
      acc = mh_move(cloud, model, target, cfg, rng.fork({kTagMove, tau}));
    }

    model.log_likelihood_batch(y, xi, cloud.positions.data(), m, m,
                               loglik.data(), false);

    double gamma;
    bool clamped;
    if (cfg.temper_enabled) {
      gamma = solve_temper_increment(loglik, lambda, cfg);
      clamped = (gamma == 1.0 - lambda);
    } else {
      gamma = 1.0 - lambda;
      clamped = true;
    }
    lambda = clamped ? 1.0 : lambda + gamma;

    reweight(cloud, loglik, gamma);
    trace.lambdas.push_back(lambda);
    trace.acceptance_rates.push_back(acc);
    trace.ess_values.push_back(effective_sample_size(cloud.log_weights));
    trace.clamped.push_back(clamped);
  }

  cloud.lambda = 1.0;
  cloud.step += 1;
  return trace;
}

std::vector<SubApproximation> partition_cloud(const ParticleCloud& cloud,
                                              std::size_t l_contrastive) {
  const std::size_t groups = l_contrastive + 1;
  if (groups == 0 || cloud.count % groups != 0) {
    throw ValidationError(
        "particle count must be divisible by L+1 for the product-form "
        "partition");
  }
  const std::size_t n = cloud.count / groups;
  std::vector<SubApproximation> subsets(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    SubApproximation& sub = subsets[g];
    sub.count = n;
    sub.dim = cloud.dim;
    sub.positions.resize(n * cloud.dim);
    sub.log_weights.resize(n);
    sub.weights.resize(n);
    for (std::size_t j = 0; j < cloud.dim; ++j) {
      const double* src = cloud.col(j) + g * n;
      std::copy(src, src + n, sub.positions.data() + j * n);
    }
    const double* lw = cloud.log_weights.data() + g * n;
    const double lse = kernels::ops().logsumexp(lw, n);
    for (std::size_t i = 0; i < n; ++i) sub.log_weights[i] = lw[i] - lse;
    kernels::ops().exp_normalize(sub.log_weights.data(), n,
                                 sub.weights.data());
  }
  return subsets;
}

}  // namespace pasoa
