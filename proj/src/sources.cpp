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

// 2D source location: S hidden emitters in the plane, measured intensity
// follows an inverse-square superposition with additive background, and the
// observation is log-normal around the signal mean.

#include <cmath>

#include "pasoa/errors.hpp"
#include "pasoa/kernels.hpp"
#include "pasoa/math.hpp"
#include "pasoa/model.hpp"

namespace pasoa {
namespace {

// mu and its design gradient for a single parameter vector.
void signal_mean_grad(const SourcesConfig& cfg, std::span<const double> theta,
                      std::span<const double> xi, double& mu, double* gmu) {
  mu = cfg.background;
  gmu[0] = gmu[1] = 0.0;
  for (std::size_t s = 0; s < cfg.n_sources; ++s) {
    const double dx = theta[2 * s] - xi[0];
    const double dy = theta[2 * s + 1] - xi[1];
    const double inv_d = 1.0 / (cfg.softening + dx * dx + dy * dy);
    mu += cfg.alpha * inv_d;
    const double c = 2.0 * cfg.alpha * inv_d * inv_d;
    gmu[0] += c * dx;
    gmu[1] += c * dy;
  }
}

class SourcesModel final : public Model {
 public:
  explicit SourcesModel(const SourcesConfig& cfg)
      : cfg_(cfg),
        dim_(2 * cfg.n_sources),
        bounds_{{cfg.design_lo, cfg.design_lo}, {cfg.design_hi, cfg.design_hi}},
        params_{cfg.n_sources, cfg.alpha, cfg.background, cfg.softening,
                cfg.sigma} {}

  const std::string& name() const override { return name_; }
  std::size_t theta_dim() const override { return dim_; }
  std::size_t design_dim() const override { return 2; }
  const DesignBounds& design_bounds() const override { return bounds_; }

  void sample_prior(Rng& rng, std::span<double> theta) const override {
    for (std::size_t j = 0; j < dim_; ++j) theta[j] = rng.normal();
  }

  double log_prior(std::span<const double> theta) const override {
    double lp = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) lp += log_normal_pdf(theta[j]);
    return lp;
  }

  double log_likelihood(double y, std::span<const double> theta,
                        std::span<const double> xi) const override {
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw InvalidObservationError(
          "sources: observation must be a positive real");
    }
    const double mu = sources_signal_mean(cfg_, theta, xi);
    const double z = (std::log(y) - std::log(mu)) / cfg_.sigma;
    return log_normal_pdf(z) - std::log(cfg_.sigma) - std::log(y);
  }

  double simulate(std::span<const double> theta, std::span<const double> xi,
                  double u) const override {
    const double mu = sources_signal_mean(cfg_, theta, xi);
    return std::exp(std::log(mu) + cfg_.sigma * u);
  }

  void grad_design_loglik(double y, std::span<const double> theta,
                          std::span<const double> xi,
                          std::span<double> out) const override {
    double mu, gmu[2];
    signal_mean_grad(cfg_, theta, xi, mu, gmu);
    const double r = std::log(y) - std::log(mu);
    const double c = r / (cfg_.sigma * cfg_.sigma * mu);
    out[0] = c * gmu[0];
    out[1] = c * gmu[1];
  }

  double grad_obs_loglik(double y, std::span<const double> theta,
                         std::span<const double> xi) const override {
    const double mu = sources_signal_mean(cfg_, theta, xi);
    const double r = std::log(y) - std::log(mu);
    return -(1.0 + r / (cfg_.sigma * cfg_.sigma)) / y;
  }

  void path_grad_simulate(std::span<const double> theta,
                          std::span<const double> xi, double u,
                          std::span<double> out) const override {
    double mu, gmu[2];
    signal_mean_grad(cfg_, theta, xi, mu, gmu);
    const double y = std::exp(std::log(mu) + cfg_.sigma * u);
    out[0] = y * gmu[0] / mu;
    out[1] = y * gmu[1] / mu;
  }

  void log_likelihood_batch(double y, std::span<const double> xi,
                            const double* positions, std::size_t m,
                            std::size_t stride, double* out,
                            bool accumulate) const override {
    kernels::ops().sources_loglik(params_, y, xi.data(), positions, m, stride,
                                  out, accumulate);
  }

  void loglik_grads_batch(double y, std::span<const double> xi,
                          const double* positions, std::size_t m,
                          std::size_t stride, double* ll, double* dxi,
                          double* dy) const override {
    kernels::ops().sources_loglik_grads(params_, y, xi.data(), positions, m,
                                        stride, ll, dxi, dxi + m, dy);
  }

  std::vector<ParamBlock> param_blocks() const override {
    std::vector<ParamBlock> blocks;
    for (std::size_t s = 0; s < cfg_.n_sources; ++s) {
      blocks.push_back({"source" + std::to_string(s + 1), 2 * s, 2});
    }
    return blocks;
  }

  std::size_t exchangeable_block_size() const override {
    return cfg_.n_sources > 1 ? 2 : 0;
  }

 private:
  std::string name_ = "sources";
  SourcesConfig cfg_;
  std::size_t dim_;
  DesignBounds bounds_;
  kernels::SourcesParams params_;
};

}  // namespace

double sources_signal_mean(const SourcesConfig& cfg,
                           std::span<const double> theta,
                           std::span<const double> xi) {
  double mu = cfg.background;
  for (std::size_t s = 0; s < cfg.n_sources; ++s) {
    const double dx = theta[2 * s] - xi[0];
    const double dy = theta[2 * s + 1] - xi[1];
    mu += cfg.alpha / (cfg.softening + dx * dx + dy * dy);
  }
  return mu;
}

std::unique_ptr<Model> make_sources(const SourcesConfig& cfg) {
  return std::make_unique<SourcesModel>(cfg);
}

}  // namespace pasoa
