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
#include <functional>
#include <span>
#include <vector>

#include "pasoa/model.hpp"
#include "pasoa/rng.hpp"

namespace pasoa {

// Observed (y, xi) pairs in experiment order.
struct HistoryItem {
  double y;
  std::vector<double> xi;
};
using History = std::vector<HistoryItem>;

// Weighted particle approximation of the current posterior. Positions are a
// column-major count x dim matrix; log-weights are kept normalized
// (logsumexp == 0).
struct ParticleCloud {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> positions;
  std::vector<double> log_weights;
  double lambda = 1.0;   // inverse temperature of the represented target
  std::size_t step = 0;  // number of observations assimilated

  ParticleCloud() = default;
  ParticleCloud(std::size_t m, std::size_t d)
      : count(m), dim(d), positions(m * d), log_weights(m) {
    set_uniform_weights();
  }

  double* col(std::size_t j) { return positions.data() + j * count; }
  const double* col(std::size_t j) const {
    return positions.data() + j * count;
  }
  void row(std::size_t i, std::span<double> theta) const {
    for (std::size_t j = 0; j < dim; ++j) theta[j] = positions[i + j * count];
  }
  void set_uniform_weights();
};

enum class ResamplingScheme { multinomial, stratified, systematic };

ResamplingScheme resampling_scheme_from_string(const std::string& s);
const char* to_string(ResamplingScheme s);

struct TemperConfig {
  double ess_min_fraction = 0.9;
  ResamplingScheme scheme = ResamplingScheme::stratified;
  std::size_t mh_moves_per_step = 1;
  double mh_scale = 1.0;
  double root_tol = 1e-10;
  std::size_t max_temper_steps = 1000;
  bool temper_enabled = true;
};

// Per-observation tempering diagnostics, one entry per tempering iteration.
struct TemperTrace {
  std::vector<double> lambdas;  // strictly increasing, last element 1
  std::vector<double> acceptance_rates;
  std::vector<double> ess_values;  // ESS right after each reweight
  std::vector<bool> clamped;       // gamma hit the 1 - lambda cap

  std::size_t size() const { return lambdas.size(); }
};

// Independent weighted subset of a partitioned cloud.
struct SubApproximation {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> positions;    // column-major count x dim
  std::vector<double> log_weights;  // renormalized within the subset
  std::vector<double> weights;      // exp(log_weights)

  const double* col(std::size_t j) const {
    return positions.data() + j * count;
  }
  void row(std::size_t i, std::span<double> theta) const {
    for (std::size_t j = 0; j < dim; ++j) theta[j] = positions[i + j * count];
  }
};

// (sum w)^2 / sum w^2 of the unnormalized weights exp(log_weights).
// Throws DegenerateWeightsError when every entry is -inf.
double effective_sample_size(std::span<const double> log_weights);

// Smallest gamma in (0, 1-lambda] with ESS(gamma * loglik) equal to
// ess_min_fraction * M; returns exactly 1-lambda when the ESS constraint is
// slack on the whole interval (tempering terminates).
double solve_temper_increment(std::span<const double> loglik, double lambda,
                              const TemperConfig& cfg);

// Replace the cloud weights by normalized p(y|theta)^gamma, i.e.
// gamma * loglik - logsumexp(gamma * loglik). Log-likelihoods are floored at
// kLoglikFloor first; throws DegenerateWeightsError if all are at the floor.
void reweight(ParticleCloud& cloud, std::span<const double> loglik,
              double gamma);

void resample(ParticleCloud& cloud, ResamplingScheme scheme, Rng rng);

// Batched log-target over a column-major particle matrix (theta-space; the
// unconstrained-space Jacobian is handled inside mh_move).
class LogTargetBatch {
 public:
  virtual ~LogTargetBatch() = default;
  virtual void eval(const double* positions, std::size_t m, std::size_t stride,
                    double* out) const = 0;
};

// Adapts a plain theta -> log density function.
class ScalarLogTarget final : public LogTargetBatch {
 public:
  ScalarLogTarget(std::size_t dim,
                  std::function<double(std::span<const double>)> fn)
      : dim_(dim), fn_(std::move(fn)) {}
  void eval(const double* positions, std::size_t m, std::size_t stride,
            double* out) const override;

 private:
  std::size_t dim_;
  std::function<double(std::span<const double>)> fn_;
};

// Tempered posterior target log p(theta) + sum_{i<k} log p(y_i|theta,xi_i)
// + lambda * log p(y_k|theta,xi_k).
class TemperedPosteriorTarget final : public LogTargetBatch {
 public:
  TemperedPosteriorTarget(const Model& model, const History& history,
                          double y, std::span<const double> xi, double lambda)
      : model_(model), history_(history), y_(y), xi_(xi), lambda_(lambda) {}
  void eval(const double* positions, std::size_t m, std::size_t stride,
            double* out) const override;

 private:
  const Model& model_;
  const History& history_;
  double y_;
  std::span<const double> xi_;
  double lambda_;
};

// Random-walk Metropolis sweeps in unconstrained coordinates with a diagonal
// Gaussian proposal scaled by the weighted empirical std of the transformed
// cloud (floored at 1e-6). Returns the acceptance rate; weights unchanged.
double mh_move(ParticleCloud& cloud, const Model& model,
               const LogTargetBatch& log_target, const TemperConfig& cfg,
               Rng rng);

// One adaptive tempered SMC step assimilating (y, xi) on top of `history`:
// repeat { resample; move at the previous temperature; solve gamma;
// advance lambda; reweight } until lambda reaches 1. With
// cfg.temper_enabled == false a single pass with gamma = 1 - lambda is done
// (plain SMC). The cloud is updated in place.
TemperTrace temper_to_posterior(const Model& model, ParticleCloud& cloud,
                                double y, std::span<const double> xi,
                                const History& history,
                                const TemperConfig& cfg, Rng rng);

// Split a cloud of M = N(L+1) particles into L+1 contiguous subsets of N,
// renormalizing weights within each subset.
std::vector<SubApproximation> partition_cloud(const ParticleCloud& cloud,
                                              std::size_t l_contrastive);

}  // namespace pasoa
