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

// Scalar linear-Gaussian model y = xi * theta + sigma * u. Conjugate, so the
// posterior after any design sequence has a closed form; used as the oracle
// model throughout the test suites.

#include <cmath>

#include "pasoa/errors.hpp"
#include "pasoa/math.hpp"
#include "pasoa/model.hpp"

namespace pasoa {
namespace {

class LingaussModel final : public Model {
 public:
  explicit LingaussModel(const LingaussConfig& cfg)
      : cfg_(cfg), bounds_{{cfg.design_lo}, {cfg.design_hi}} {}

  const std::string& name() const override { return name_; }
  std::size_t theta_dim() const override { return 1; }
  std::size_t design_dim() const override { return 1; }
  const DesignBounds& design_bounds() const override { return bounds_; }

  void sample_prior(Rng& rng, std::span<double> theta) const override {
    theta[0] = cfg_.prior_sigma * rng.normal();
  }

  double log_prior(std::span<const double> theta) const override {
    const double z = theta[0] / cfg_.prior_sigma;
    return log_normal_pdf(z) - std::log(cfg_.prior_sigma);
  }

  double log_likelihood(double y, std::span<const double> theta,
                        std::span<const double> xi) const override {
    if (!std::isfinite(y)) {
      throw InvalidObservationError("lingauss: observation must be finite");
    }
    const double z = (y - xi[0] * theta[0]) / cfg_.obs_sigma;
    return log_normal_pdf(z) - std::log(cfg_.obs_sigma);
  }

  double simulate(std::span<const double> theta, std::span<const double> xi,
                  double u) const override {
    return xi[0] * theta[0] + cfg_.obs_sigma * u;
  }

  void grad_design_loglik(double y, std::span<const double> theta,
                          std::span<const double> xi,
                          std::span<double> out) const override {
    const double s2 = cfg_.obs_sigma * cfg_.obs_sigma;
    out[0] = theta[0] * (y - xi[0] * theta[0]) / s2;
  }

  double grad_obs_loglik(double y, std::span<const double> theta,
                         std::span<const double> xi) const override {
    const double s2 = cfg_.obs_sigma * cfg_.obs_sigma;
    return -(y - xi[0] * theta[0]) / s2;
  }

  void path_grad_simulate(std::span<const double> theta,
                          std::span<const double> /*xi*/, double /*u*/,
                          std::span<double> out) const override {
    out[0] = theta[0];
  }

  void log_likelihood_batch(double y, std::span<const double> xi,
                            const double* positions, std::size_t m,
                            std::size_t /*stride*/, double* out,
                            bool accumulate) const override {
    const double inv_var = 1.0 / (cfg_.obs_sigma * cfg_.obs_sigma);
    const double base = -std::log(cfg_.obs_sigma) - 0.5 * kLog2Pi;
    const double x = xi[0];
    for (std::size_t i = 0; i < m; ++i) {
      const double r = y - x * positions[i];
      const double ll = base - 0.5 * r * r * inv_var;
      out[i] = accumulate ? out[i] + ll : ll;
    }
  }

 private:
  std::string name_ = "lingauss";
  LingaussConfig cfg_;
  DesignBounds bounds_;
};

}  // namespace

std::unique_ptr<Model> make_lingauss(const LingaussConfig& cfg) {
  return std::make_unique<LingaussModel>(cfg);
}

}  // namespace pasoa
