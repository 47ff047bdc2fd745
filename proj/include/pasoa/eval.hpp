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

#include <span>
#include <vector>

#include "pasoa/model.hpp"
#include "pasoa/rng.hpp"
#include "pasoa/smc.hpp"

namespace pasoa {

struct EvalConfig {
  std::size_t l_eval = 100000;  // contrastive draws for SPCE/SNMC
  std::size_t n_outer = 1;      // independent contrastive batches to average
};

// A completed (or in-progress) design sequence with its generating truth.
struct Rollout {
  std::vector<double> theta_star;
  History history;
};

// Sequential prior contrastive estimation: lower bound on the total expected
// information gain of the design sequence, estimated with contrastive
// parameters drawn from the prior only. Bounded by log(L+1).
double spce(const Model& model, const Rollout& rollout, const EvalConfig& cfg,
            Rng rng);

// Sequential nested Monte Carlo: the matching upper bound; the denominator
// averages over the L contrastive parameters only, so it is unbounded above.
double snmc(const Model& model, const Rollout& rollout, const EvalConfig& cfg,
            Rng rng);

// L2 Wasserstein distance between the weighted particle cloud and the Dirac
// at theta_star: sqrt(sum_i w_i ||theta_i - theta_star||^2).
double wasserstein2_to_point(const ParticleCloud& cloud,
                             std::span<const double> theta_star);

// Same metric restricted to a coordinate block.
double wasserstein2_block(const ParticleCloud& cloud,
                          std::span<const double> theta_star,
                          std::size_t offset, std::size_t size);

// Variant for models whose parameter vector is a set of exchangeable
// equal-size blocks (e.g. source positions): each particle is relabeled by
// the block permutation closest to theta_star before the distance is taken,
// so the metric quotients out a symmetry the likelihood cannot identify.
// `blocks` receives the per-block contributions under the same matching.
double wasserstein2_matched(const ParticleCloud& cloud,
                            std::span<const double> theta_star,
                            std::size_t block_size,
                            std::vector<double>* blocks = nullptr);

struct Moments {
  std::vector<double> mean;
  std::vector<double> cov;  // row-major dim x dim
};

Moments posterior_moments(const ParticleCloud& cloud);

// Incremental SPCE/SNMC over a growing history, reusing one contrastive
// batch across steps: per-contrastive log-likelihood products accumulate as
// observations arrive, so evaluating all K prefixes costs O(K * L) instead
// of O(K^2 * L).
class SequentialEvaluator {
 public:
  SequentialEvaluator(const Model& model, std::vector<double> theta_star,
                      std::size_t l_eval, Rng rng);

  void observe(double y, std::span<const double> xi);

  double spce() const;
  double snmc() const;
  std::size_t steps() const { return steps_; }

 private:
  const Model& model_;
  std::vector<double> theta_star_;
  std::size_t l_eval_;
  std::vector<double> contrastives_;  // column-major l_eval x dim
  std::vector<double> acc_;           // per-contrastive running log-product
  double acc_star_ = 0.0;
  std::size_t steps_ = 0;
  mutable std::vector<double> scratch_;
};

}  // namespace pasoa
