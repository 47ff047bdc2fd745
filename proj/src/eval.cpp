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

#include "pasoa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pasoa/kernels.hpp"
#include "pasoa/math.hpp"

namespace pasoa {
namespace {

constexpr std::uint64_t kTagBatch = 0x6261;

double floored(double ll) { return std::max(ll, kLoglikFloor); }

// log(exp(a) + exp(b))
double logaddexp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Accumulated log-likelihood products for one contrastive batch plus the
// true parameter; shared by the one-shot spce/snmc entry points.
struct LogProducts {
  std::vector<double> acc;  // size L
  double acc_star = 0.0;
};

LogProducts accumulate(const Model& model, const Rollout& rollout,
                       std::size_t l_eval, Rng rng) {
  const std::size_t d = model.theta_dim();
  std::vector<double> contrastives(l_eval * d);
  sample_prior_matrix(model, rng, contrastives.data(), l_eval, l_eval);

  LogProducts lp;
  lp.acc.assign(l_eval, 0.0);
  std::vector<double> ll(l_eval);
  for (const HistoryItem& item : rollout.history) {
    model.log_likelihood_batch(item.y, item.xi, contrastives.data(), l_eval,
                               l_eval, ll.data(), false);
    for (std::size_t i = 0; i < l_eval; ++i) lp.acc[i] += floored(ll[i]);
    lp.acc_star +=
        floored(model.log_likelihood(item.y, rollout.theta_star, item.xi));
  }
  return lp;
}

double spce_from(const LogProducts& lp) {
  const std::size_t l = lp.acc.size();
  const double lse_contrastive =
      kernels::ops().logsumexp(lp.acc.data(), l);
  const double lse = logaddexp(lp.acc_star, lse_contrastive);
  return lp.acc_star - lse + std::log(static_cast<double>(l + 1));
}

double snmc_from(const LogProducts& lp) {
  const std::size_t l = lp.acc.size();
  const double lse = kernels::ops().logsumexp(lp.acc.data(), l);
  return lp.acc_star - lse + std::log(static_cast<double>(l));
}

}  // namespace

double spce(const Model& model, const Rollout& rollout, const EvalConfig& cfg,
            Rng rng) {
  double total = 0.0;
  for (std::size_t b = 0; b < cfg.n_outer; ++b) {
    total += spce_from(
        accumulate(model, rollout, cfg.l_eval, rng.fork({kTagBatch, b})));
  }
  return total / static_cast<double>(cfg.n_outer);
}

double snmc(const Model& model, const Rollout& rollout, const EvalConfig& cfg,
            Rng rng) {
  double total = 0.0;
  for (std::size_t b = 0; b < cfg.n_outer; ++b) {
    total += snmc_from(
        accumulate(model, rollout, cfg.l_eval, rng.fork({kTagBatch, b})));
  }
  return total / static_cast<double>(cfg.n_outer);
}

double wasserstein2_to_point(const ParticleCloud& cloud,
                             std::span<const double> theta_star) {
  return wasserstein2_block(cloud, theta_star, 0, cloud.dim);
}

double wasserstein2_block(const ParticleCloud& cloud,
                          std::span<const double> theta_star,
                          std::size_t offset, std::size_t size) {
  std::vector<double> w(cloud.count);
  kernels::ops().exp_normalize(cloud.log_weights.data(), cloud.count,
                               w.data());
  double total = 0.0;
  for (std::size_t j = offset; j < offset + size; ++j) {
    const double* col = cloud.col(j);
    const double target = theta_star[j];
    double s = 0.0;
    for (std::size_t i = 0; i < cloud.count; ++i) {
      const double d = col[i] - target;
      s += w[i] * d * d;
    }
    total += s;
  }
  return std::sqrt(total);
}

double wasserstein2_matched(const ParticleCloud& cloud,
                            std::span<const double> theta_star,
                            std::size_t block_size,
                            std::vector<double>* blocks) {
  const std::size_t n_blocks = cloud.dim / block_size;
  std::vector<double> w(cloud.count);
  kernels::ops().exp_normalize(cloud.log_weights.data(), cloud.count,
                               w.data());

  std::vector<std::size_t> perm(n_blocks), best_perm(n_blocks);
  std::vector<double> theta(cloud.dim);
  std::vector<double> block_acc(n_blocks, 0.0);
  double total = 0.0;

  for (std::size_t i = 0; i < cloud.count; ++i) {
    cloud.row(i, theta);
    for (std::size_t b = 0; b < n_blocks; ++b) perm[b] = b;
    double best = std::numeric_limits<double>::infinity();
    do {
      double d2 = 0.0;
      for (std::size_t b = 0; b < n_blocks; ++b) {
        for (std::size_t j = 0; j < block_size; ++j) {
          const double d =
              theta[perm[b] * block_size + j] - theta_star[b * block_size + j];
          d2 += d * d;
        }
      }
      if (d2 < best) {
        best = d2;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));

    total += w[i] * best;
    for (std::size_t b = 0; b < n_blocks; ++b) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < block_size; ++j) {
        const double d = theta[best_perm[b] * block_size + j] -
                         theta_star[b * block_size + j];
        d2 += d * d;
      }
      block_acc[b] += w[i] * d2;
    }
  }
  if (blocks != nullptr) {
    blocks->resize(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) (*blocks)[b] = std::sqrt(block_acc[b]);
  }
  return std::sqrt(total);
}

Moments posterior_moments(const ParticleCloud& cloud) {
  const std::size_t d = cloud.dim;
  const std::size_t m = cloud.count;
  std::vector<double> w(m);
  kernels::ops().exp_normalize(cloud.log_weights.data(), m, w.data());

  Moments out;
  out.mean.assign(d, 0.0);
  out.cov.assign(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const double* col = cloud.col(j);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w[i] * col[i];
    out.mean[j] = s;
  }
  for (std::size_t a = 0; a < d; ++a) {
    const double* ca = cloud.col(a);
    for (std::size_t b = a; b < d; ++b) {
      const double* cb = cloud.col(b);
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        s += w[i] * (ca[i] - out.mean[a]) * (cb[i] - out.mean[b]);
      }
      out.cov[a * d + b] = s;
      out.cov[b * d + a] = s;
    }
  }
  return out;
}

SequentialEvaluator::SequentialEvaluator(const Model& model,
                                         std::vector<double> theta_star,
                                         std::size_t l_eval, Rng rng)
    : model_(model),
      theta_star_(std::move(theta_star)),
      l_eval_(l_eval),
      contrastives_(l_eval * model.theta_dim()),
      acc_(l_eval, 0.0) {
  sample_prior_matrix(model_, rng, contrastives_.data(), l_eval_, l_eval_);
}

void SequentialEvaluator::observe(double y, std::span<const double> xi) {
  scratch_.resize(l_eval_);
  model_.log_likelihood_batch(y, xi, contrastives_.data(), l_eval_, l_eval_,
                              scratch_.data(), false);
  for (std::size_t i = 0; i < l_eval_; ++i) acc_[i] += floored(scratch_[i]);
  acc_star_ += floored(model_.log_likelihood(y, theta_star_, xi));
  steps_ += 1;
}

double SequentialEvaluator::spce() const {
  const double lse_contrastive =
      kernels::ops().logsumexp(acc_.data(), l_eval_);
  const double lse = logaddexp(acc_star_, lse_contrastive);
  return acc_star_ - lse + std::log(static_cast<double>(l_eval_ + 1));
}

double SequentialEvaluator::snmc() const {
  const double lse = kernels::ops().logsumexp(acc_.data(), l_eval_);
  return acc_star_ - lse + std::log(static_cast<double>(l_eval_));
}

}  // namespace pasoa
