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

// Constant Elasticity of Substitution model. An agent rates two baskets of
// three goods on [0,1]; the rating is a censored-sigmoid transform of a
// latent normal whose location is the utility difference scaled by u. The
// observation density is a mixture of two point masses (the censoring
// branches) and a logit-normal continuous component.
//
// theta = (rho, alpha1, alpha2, alpha3, u); designs are the 6 basket entries.

#include <algorithm>
#include <cmath>
#include <limits>

#include "pasoa/errors.hpp"
#include "pasoa/math.hpp"
#include "pasoa/model.hpp"

namespace pasoa {
namespace {

// Floor applied to basket entries inside gradient power terms only; the CES
// utility has an infinite one-sided slope at a zero entry and the box allows
// exact zeros.
constexpr double kGradXiFloor = 1e-12;

struct EtaContext {
  double mu;          // mu_eta
  double sigma;       // sigma_eta
  double dmu[6];      // d mu_eta / d xi
  double dsigma[6];   // d sigma_eta / d xi
};

double utility(const double* alpha, double rho, const double* basket) {
  double a = 0.0;
  for (int i = 0; i < 3; ++i) a += alpha[i] * std::pow(basket[i], rho);
  return std::pow(a, 1.0 / rho);
}

// d U / d basket_i with floored entries so the gradient stays finite on the
// boundary of the design box.
void utility_grad(const double* alpha, double rho, const double* basket,
                  double* grad) {
  double floored[3];
  double a = 0.0;
  for (int i = 0; i < 3; ++i) {
    floored[i] = std::max(basket[i], kGradXiFloor);
    a += alpha[i] * std::pow(floored[i], rho);
  }
  const double outer = std::pow(a, 1.0 / rho - 1.0);
  for (int i = 0; i < 3; ++i) {
    grad[i] = outer * alpha[i] * std::pow(floored[i], rho - 1.0);
  }
}

void eta_context(const CesConfig& cfg, std::span<const double> theta,
                 std::span<const double> xi, EtaContext& ctx) {
  const double rho = theta[0];
  const double* alpha = theta.data() + 1;
  const double u = theta[4];

  const double u1 = utility(alpha, rho, xi.data());
  const double u2 = utility(alpha, rho, xi.data() + 3);
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = xi[i] - xi[3 + i];
    d2 += d * d;
  }
  const double dist = std::sqrt(d2);
  ctx.mu = (u1 - u2) * u;
  ctx.sigma = (1.0 + dist) * cfg.tau * u;

  double g1[3], g2[3];
  utility_grad(alpha, rho, xi.data(), g1);
  utility_grad(alpha, rho, xi.data() + 3, g2);
  for (int i = 0; i < 3; ++i) {
    ctx.dmu[i] = u * g1[i];
    ctx.dmu[3 + i] = -u * g2[i];
    const double dn = dist > 0.0 ? (xi[i] - xi[3 + i]) / dist : 0.0;
    ctx.dsigma[i] = cfg.tau * u * dn;
    ctx.dsigma[3 + i] = -cfg.tau * u * dn;
  }
}

class CesModel final : public Model {
 public:
  explicit CesModel(const CesConfig& cfg)
      : cfg_(cfg),
        logit_lo_(logit(cfg.epsilon)),
        logit_hi_(logit(1.0 - cfg.epsilon)),
        bounds_{std::vector<double>(6, cfg.design_lo),
                std::vector<double>(6, cfg.design_hi)} {}

  const std::string& name() const override { return name_; }
  std::size_t theta_dim() const override { return 5; }
  std::size_t design_dim() const override { return 6; }
  const DesignBounds& design_bounds() const override { return bounds_; }

  void sample_prior(Rng& rng, std::span<double> theta) const override {
    theta[0] = rng.u01();  // Beta(1,1)
    // Dirichlet(1,1,1) via normalized exponentials
    double e[3], s = 0.0;
    for (int i = 0; i < 3; ++i) {
      e[i] = rng.exponential();
      s += e[i];
    }
    for (int i = 0; i < 3; ++i) theta[1 + i] = e[i] / s;
    theta[4] = std::exp(cfg_.logu_mu + cfg_.logu_sigma * rng.normal());
  }

  double log_prior(std::span<const double> theta) const override {
    const double rho = theta[0];
    const double u = theta[4];
    if (!(rho > 0.0 && rho < 1.0) || !(u > 0.0) || !std::isfinite(u)) {
      return -std::numeric_limits<double>::infinity();
    }
    double asum = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (!(theta[1 + i] > 0.0)) {
        return -std::numeric_limits<double>::infinity();
      }
      asum += theta[1 + i];
    }
    if (std::abs(asum - 1.0) > 1e-8) {
      return -std::numeric_limits<double>::infinity();
    }
    // Beta(1,1) is flat; Dirichlet(1,1,1) has density Gamma(3) = 2 on the
    // simplex; u is log-normal.
    const double z = (std::log(u) - cfg_.logu_mu) / cfg_.logu_sigma;
    return std::log(2.0) + log_normal_pdf(z) - std::log(cfg_.logu_sigma) -
           std::log(u);
  }

  double log_likelihood(double y, std::span<const double> theta,
                        std::span<const double> xi) const override {
    if (!(y >= cfg_.epsilon && y <= 1.0 - cfg_.epsilon)) {
      throw InvalidObservationError(
          "ces: observation outside [epsilon, 1-epsilon]");
    }
    EtaContext ctx;
    eta_context(cfg_, theta, xi, ctx);
    return loglik_at(y, ctx);
  }

  double simulate(std::span<const double> theta, std::span<const double> xi,
                  double u) const override {
    double mu, sigma;
    ces_eta_params(cfg_, theta, xi, mu, sigma);
    const double eta = mu + sigma * u;
    if (eta <= logit_lo_) return cfg_.epsilon;
    if (eta >= logit_hi_) return 1.0 - cfg_.epsilon;
    return sigmoid(eta);
  }

  void grad_design_loglik(double y, std::span<const double> theta,
                          std::span<const double> xi,
                          std::span<double> out) const override {
    EtaContext ctx;
    eta_context(cfg_, theta, xi, ctx);
    grad_design_at(y, ctx, out.data());
  }

  double grad_obs_loglik(double y, std::span<const double> theta,
                         std::span<const double> xi) const override {
    if (y == cfg_.epsilon || y == 1.0 - cfg_.epsilon) {
      return 0.0;  // point-mass branch, y pinned by censoring
    }
    EtaContext ctx;
    eta_context(cfg_, theta, xi, ctx);
    const double t = logit(y) - ctx.mu;
    const double denom = y * (1.0 - y);
    return -(1.0 - 2.0 * y) / denom - t / (ctx.sigma * ctx.sigma * denom);
  }

  void path_grad_simulate(std::span<const double> theta,
                          std::span<const double> xi, double u,
                          std::span<double> out) const override {
    EtaContext ctx;
    eta_context(cfg_, theta, xi, ctx);
    const double eta = ctx.mu + ctx.sigma * u;
    if (eta <= logit_lo_ || eta >= logit_hi_) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double y = sigmoid(eta);
    const double slope = y * (1.0 - y);
    for (int j = 0; j < 6; ++j) {
      out[j] = slope * (ctx.dmu[j] + u * ctx.dsigma[j]);
    }
  }

  std::size_t unconstrained_dim() const override { return 4; }

  double to_unconstrained(std::span<const double> theta,
                          std::span<double> z) const override {
    const double rho = theta[0];
    z[0] = logit(rho);
    z[1] = std::log(theta[1] / theta[3]);
    z[2] = std::log(theta[2] / theta[3]);
    z[3] = std::log(theta[4]);
    return std::log(rho * (1.0 - rho)) +
           std::log(theta[1] * theta[2] * theta[3]) + z[3];
  }

  double from_unconstrained(std::span<const double> z,
                            std::span<double> theta) const override {
    const double rho = sigmoid(z[0]);
    theta[0] = rho;
    const double m = std::max({0.0, z[1], z[2]});
    const double e1 = std::exp(z[1] - m);
    const double e2 = std::exp(z[2] - m);
    const double e3 = std::exp(-m);
    const double inv_s = 1.0 / (e1 + e2 + e3);
    theta[1] = e1 * inv_s;
    theta[2] = e2 * inv_s;
    theta[3] = e3 * inv_s;
    theta[4] = std::exp(z[3]);
    return std::log(rho * (1.0 - rho)) +
           std::log(theta[1] * theta[2] * theta[3]) + z[3];
  }

  void loglik_grads_batch(double y, std::span<const double> xi,
                          const double* positions, std::size_t m,
                          std::size_t stride, double* ll, double* dxi,
                          double* dy) const override {
    double theta[5];
    EtaContext ctx;
    double g[6];
    for (std::size_t i = 0; i < m; ++i) {
      for (int j = 0; j < 5; ++j) theta[j] = positions[i + j * stride];
      eta_context(cfg_, std::span<const double>(theta, 5), xi, ctx);
      ll[i] = loglik_at(y, ctx);
      grad_design_at(y, ctx, g);
      for (std::size_t j = 0; j < 6; ++j) dxi[i + j * m] = g[j];
      if (y == cfg_.epsilon || y == 1.0 - cfg_.epsilon) {
        dy[i] = 0.0;
      } else {
        const double t = logit(y) - ctx.mu;
        const double denom = y * (1.0 - y);
        dy[i] =
            -(1.0 - 2.0 * y) / denom - t / (ctx.sigma * ctx.sigma * denom);
      }
    }
  }

  std::vector<ParamBlock> param_blocks() const override {
    return {{"rho", 0, 1}, {"alpha", 1, 3}, {"u", 4, 1}};
  }

 private:
  double loglik_at(double y, const EtaContext& ctx) const {
    if (y == cfg_.epsilon) {
      return log_normal_cdf((logit_lo_ - ctx.mu) / ctx.sigma,
                            cfg_.tail_threshold);
    }
    if (y == 1.0 - cfg_.epsilon) {
      return log_normal_cdf(-(logit_hi_ - ctx.mu) / ctx.sigma,
                            cfg_.tail_threshold);
    }
    const double t = logit(y) - ctx.mu;
    return -std::log(ctx.sigma) - 0.5 * kLog2Pi - std::log(y * (1.0 - y)) -
           0.5 * t * t / (ctx.sigma * ctx.sigma);
  }

  void grad_design_at(double y, const EtaContext& ctx, double* out) const {
    if (y == cfg_.epsilon || y == 1.0 - cfg_.epsilon) {
      const bool low = (y == cfg_.epsilon);
      const double x = low ? (logit_lo_ - ctx.mu) / ctx.sigma
                           : (logit_hi_ - ctx.mu) / ctx.sigma;
      // d log p0 / dx at x, or d log p1 / d(-x) at -x
      const double dlp = low ? dlog_normal_cdf(x, cfg_.tail_threshold)
                             : -dlog_normal_cdf(-x, cfg_.tail_threshold);
      for (int j = 0; j < 6; ++j) {
        const double dx = (-ctx.dmu[j] - x * ctx.dsigma[j]) / ctx.sigma;
        out[j] = dlp * dx;
      }
      return;
    }
    const double t = logit(y) - ctx.mu;
    const double s = ctx.sigma;
    for (int j = 0; j < 6; ++j) {
      out[j] = -ctx.dsigma[j] / s + t * ctx.dmu[j] / (s * s) +
               t * t * ctx.dsigma[j] / (s * s * s);
    }
  }

  std::string name_ = "ces";
  CesConfig cfg_;
  double logit_lo_, logit_hi_;
  DesignBounds bounds_;
};

}  // namespace

double ces_utility(std::span<const double, 3> alpha, double rho,
                   std::span<const double, 3> basket) {
  return utility(alpha.data(), rho, basket.data());
}

void ces_eta_params(const CesConfig& cfg, std::span<const double> theta,
                    std::span<const double> xi, double& mu_eta,
                    double& sigma_eta) {
  const double rho = theta[0];
  const double* alpha = theta.data() + 1;
  const double u1 = utility(alpha, rho, xi.data());
  const double u2 = utility(alpha, rho, xi.data() + 3);
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = xi[i] - xi[3 + i];
    d2 += d * d;
  }
  mu_eta = (u1 - u2) * theta[4];
  sigma_eta = (1.0 + std::sqrt(d2)) * cfg.tau * theta[4];
}

std::unique_ptr<Model> make_ces(const CesConfig& cfg) {
  return std::make_unique<CesModel>(cfg);
}

}  // namespace pasoa
