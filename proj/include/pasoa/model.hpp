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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pasoa/rng.hpp"

namespace pasoa {

// Per-coordinate box constraints of the design space.
struct DesignBounds {
  std::vector<double> lo;
  std::vector<double> hi;

  double clamp(std::size_t j, double v) const {
    return v < lo[j] ? lo[j] : (v > hi[j] ? hi[j] : v);
  }
  bool contains(std::span<const double> xi, double tol = 0.0) const {
    for (std::size_t j = 0; j < lo.size(); ++j) {
      if (xi[j] < lo[j] - tol || xi[j] > hi[j] + tol) return false;
    }
    return true;
  }
};

// Named slice of the parameter vector, used for per-block posterior metrics.
struct ParamBlock {
  std::string name;
  std::size_t offset;
  std::size_t size;
};

struct LingaussConfig {
  double prior_sigma = 1.0;
  double obs_sigma = 1.0;
  double design_lo = -10.0;
  double design_hi = 10.0;
};

struct SourcesConfig {
  std::size_t n_sources = 2;
  double alpha = 1.0;       // per-source intensity
  double background = 0.1;  // b
  double softening = 1e-4;  // m
  double sigma = 0.5;       // log-normal noise std
  double design_lo = -10.0;
  double design_hi = 10.0;
};

struct CesConfig {
  double epsilon = 0x1p-22;  // censoring width 2^-22
  double tau = 0.005;
  double logu_mu = 1.0;
  double logu_sigma = 3.0;
  double tail_threshold = 8.0;  // switch to the Gaussian tail expansion
  double design_lo = 0.0;
  double design_hi = 100.0;
};

struct ModelSettings {
  LingaussConfig lingauss;
  SourcesConfig sources;
  CesConfig ces;
};

// A probabilistic model with a closed-form likelihood, a reparametrized
// simulator y = T(theta, xi, u) with u ~ N(0,1), hand-derived design and
// observation gradients, and a bijection to unconstrained coordinates for
// random-walk moves. All methods are pure functions of their arguments.
class Model {
 public:
  virtual ~Model() = default;

  virtual const std::string& name() const = 0;
  virtual std::size_t theta_dim() const = 0;
  virtual std::size_t design_dim() const = 0;
  virtual const DesignBounds& design_bounds() const = 0;

  virtual void sample_prior(Rng& rng, std::span<double> theta) const = 0;

  // Log prior density; -inf outside the support.
  virtual double log_prior(std::span<const double> theta) const = 0;

  // Log density of y given (theta, xi). Throws InvalidObservationError when
  // y is outside the observation support.
  virtual double log_likelihood(double y, std::span<const double> theta,
                                std::span<const double> xi) const = 0;

  virtual double simulate(std::span<const double> theta,
                          std::span<const double> xi, double u) const = 0;

  // d/dxi log p(y | theta, xi) at fixed y.
  virtual void grad_design_loglik(double y, std::span<const double> theta,
                                  std::span<const double> xi,
                                  std::span<double> out) const = 0;

  // d/dy log p(y | theta, xi).
  virtual double grad_obs_loglik(double y, std::span<const double> theta,
                                 std::span<const double> xi) const = 0;

  // d/dxi simulate(theta, xi, u) at fixed u.
  virtual void path_grad_simulate(std::span<const double> theta,
                                  std::span<const double> xi, double u,
                                  std::span<double> out) const = 0;

  virtual std::size_t unconstrained_dim() const { return theta_dim(); }

  // Both directions return log |det d theta / d z|, so the target density in
  // z-space is log_prior(theta(z)) + log_jacobian + likelihood terms.
  // Default: identity transform, zero log-Jacobian.
  virtual double to_unconstrained(std::span<const double> theta,
                                  std::span<double> z) const;
  virtual double from_unconstrained(std::span<const double> z,
                                    std::span<double> theta) const;

  // ---- batched entry points over a column-major m x theta_dim matrix ----
  // (coordinate j of particle i at positions[i + j*stride]). Defaults loop
  // over the scalar methods; hot models override with vectorized kernels.

  virtual void log_likelihood_batch(double y, std::span<const double> xi,
                                    const double* positions, std::size_t m,
                                    std::size_t stride, double* out,
                                    bool accumulate) const;

  virtual void log_prior_batch(const double* positions, std::size_t m,
                               std::size_t stride, double* out,
                               bool accumulate) const;

  // Likelihood plus gradients at fixed y for every particle. dxi is
  // column-major m x design_dim.
  virtual void loglik_grads_batch(double y, std::span<const double> xi,
                                  const double* positions, std::size_t m,
                                  std::size_t stride, double* ll, double* dxi,
                                  double* dy) const;

  virtual std::vector<ParamBlock> param_blocks() const;

  // Size of exchangeable parameter blocks the likelihood cannot tell apart
  // (source positions under equal intensities), or 0 when there is no such
  // symmetry. Posterior-to-truth distances quotient out these relabelings.
  virtual std::size_t exchangeable_block_size() const { return 0; }
};

std::unique_ptr<Model> make_model(const std::string& name,
                                  const ModelSettings& settings);

// Draw n prior samples into a column-major n x theta_dim matrix.
void sample_prior_matrix(const Model& model, Rng& rng, double* positions,
                         std::size_t n, std::size_t stride);

// Signal strength mu(theta, xi) = b + sum_s alpha / (m + ||theta_s - xi||^2).
double sources_signal_mean(const SourcesConfig& cfg,
                           std::span<const double> theta,
                           std::span<const double> xi);

// CES subjective utility (sum_i alpha_i basket_i^rho)^(1/rho).
double ces_utility(std::span<const double, 3> alpha, double rho,
                   std::span<const double, 3> basket);

// Location and scale of the latent normal rating variable.
void ces_eta_params(const CesConfig& cfg, std::span<const double> theta,
                    std::span<const double> xi, double& mu_eta,
                    double& sigma_eta);

}  // namespace pasoa
