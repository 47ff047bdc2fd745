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
#include <span>
#include <vector>

#include "pasoa/model.hpp"
#include "pasoa/rng.hpp"
#include "pasoa/smc.hpp"

namespace pasoa {

// A primary draw theta_0 plus L contrastive draws theta_1..theta_L, stored
// as a column-major (L+1) x dim matrix so the batched likelihood kernels can
// run across the whole set.
struct ContrastiveSet {
  std::size_t count = 0;  // L + 1
  std::size_t dim = 0;
  std::vector<double> thetas;

  ContrastiveSet() = default;
  ContrastiveSet(std::size_t l_contrastive, std::size_t d)
      : count(l_contrastive + 1), dim(d), thetas(count * d) {}

  std::size_t l_contrastive() const { return count - 1; }
  void set_row(std::size_t i, std::span<const double> theta) {
    for (std::size_t j = 0; j < dim; ++j) thetas[i + j * count] = theta[j];
  }
  void row(std::size_t i, std::span<double> theta) const {
    for (std::size_t j = 0; j < dim; ++j) theta[j] = thetas[i + j * count];
  }
};

struct SGConfig {
  std::size_t steps = 5000;
  double learning_rate = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t minibatch = 16;
  std::size_t polyak_window = 0;  // 0: return the final iterate
  std::size_t restarts = 1;
  bool use_adam = true;  // false: plain SGD with a constant stepsize
};

struct OptimState {
  std::vector<double> xi;
  std::vector<double> m1, m2;  // Adam moment vectors
  std::size_t t = 0;
  std::vector<double> polyak_sum;
  std::size_t polyak_count = 0;

  explicit OptimState(std::span<const double> xi_init)
      : xi(xi_init.begin(), xi_init.end()),
        m1(xi.size(), 0.0),
        m2(xi.size(), 0.0),
        polyak_sum(xi.size(), 0.0) {}
};

struct PceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct DesignResult {
  std::vector<double> xi;
  std::vector<double> xi_start;  // initial iterate of the winning restart
  PceEstimate pce;
};

// F(xi, theta_0..theta_L, y) = log p(y|theta_0,xi)
//                            - log( (1/(L+1)) sum_l p(y|theta_l,xi) ),
// evaluated in log space; bounded above by log(L+1).
double pce_integrand(const Model& model, std::span<const double> xi,
                     const ContrastiveSet& cs, double y);

// Total derivative of F(xi, cs, simulate(theta_0, xi, u)) with respect to
// xi, assembled from the model partial gradients and the path Jacobian.
// `weights_out` (size L+1), when given, receives the internal softmax
// weights of the contrastive terms.
void pce_sample_gradient(const Model& model, std::span<const double> xi,
                         const ContrastiveSet& cs, double u,
                         std::span<double> out,
                         double* weights_out = nullptr);

// Monte Carlo estimate of the particle PCE bound at xi: theta_l drawn from
// subset l with its weights, u standard normal, y simulated from theta_0.
PceEstimate estimate_pce(const Model& model,
                         const std::vector<SubApproximation>& subsets,
                         std::span<const double> xi, std::size_t n_mc,
                         Rng rng);

// One ascent update (Adam with bias correction, or plain SGD) followed by
// projection onto the design box. Throws NonFiniteGradientError on a
// NaN/Inf gradient.
void adam_step(OptimState& state, std::span<const double> gradient,
               const SGConfig& cfg, const DesignBounds& bounds);

// Stochastic maximization of the particle PCE bound over the design box.
// Runs cfg.restarts independent starts (the first from xi_init, the rest
// uniform in the box) and returns the candidate with the highest PCE
// estimate (1000 fresh Monte Carlo draws).
DesignResult optimize_design(const Model& model,
                             const std::vector<SubApproximation>& subsets,
                             std::span<const double> xi_init,
                             const SGConfig& cfg, Rng rng);

}  // namespace pasoa
