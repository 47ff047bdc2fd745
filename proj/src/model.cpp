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

#include "pasoa/model.hpp"

#include <algorithm>

#include "pasoa/errors.hpp"

namespace pasoa {
namespace {

constexpr std::size_t kMaxThetaDim = 16;

void copy_row(const double* positions, std::size_t i, std::size_t stride,
              std::size_t dim, double* theta) {
  for (std::size_t j = 0; j < dim; ++j) theta[j] = positions[i + j * stride];
}

}  // namespace

double Model::to_unconstrained(std::span<const double> theta,
                               std::span<double> z) const {
  std::copy(theta.begin(), theta.end(), z.begin());
  return 0.0;
}

double Model::from_unconstrained(std::span<const double> z,
                                 std::span<double> theta) const {
  std::copy(z.begin(), z.end(), theta.begin());
  return 0.0;
}

void Model::log_likelihood_batch(double y, std::span<const double> xi,
                                 const double* positions, std::size_t m,
                                 std::size_t stride, double* out,
                                 bool accumulate) const {
  double theta[kMaxThetaDim];
  const std::size_t d = theta_dim();
  for (std::size_t i = 0; i < m; ++i) {
    copy_row(positions, i, stride, d, theta);
    const double ll = log_likelihood(y, std::span<const double>(theta, d), xi);
    out[i] = accumulate ? out[i] + ll : ll;
  }
}

void Model::log_prior_batch(const double* positions, std::size_t m,
                            std::size_t stride, double* out,
                            bool accumulate) const {
  double theta[kMaxThetaDim];
  const std::size_t d = theta_dim();
  for (std::size_t i = 0; i < m; ++i) {
    copy_row(positions, i, stride, d, theta);
    const double lp = log_prior(std::span<const double>(theta, d));
    out[i] = accumulate ? out[i] + lp : lp;
  }
}

void Model::loglik_grads_batch(double y, std::span<const double> xi,
                               const double* positions, std::size_t m,
                               std::size_t stride, double* ll, double* dxi,
                               double* dy) const {
  double theta[kMaxThetaDim];
  double g[kMaxThetaDim];
  const std::size_t d = theta_dim();
  const std::size_t dx = design_dim();
  for (std::size_t i = 0; i < m; ++i) {
    copy_row(positions, i, stride, d, theta);
    const std::span<const double> th(theta, d);
    ll[i] = log_likelihood(y, th, xi);
    grad_design_loglik(y, th, xi, std::span<double>(g, dx));
    for (std::size_t j = 0; j < dx; ++j) dxi[i + j * m] = g[j];
    dy[i] = grad_obs_loglik(y, th, xi);
  }
}

std::vector<ParamBlock> Model::param_blocks() const {
  return {{"theta", 0, theta_dim()}};
}

void sample_prior_matrix(const Model& model, Rng& rng, double* positions,
                         std::size_t n, std::size_t stride) {
  double theta[kMaxThetaDim];
  const std::size_t d = model.theta_dim();
  for (std::size_t i = 0; i < n; ++i) {
    model.sample_prior(rng, std::span<double>(theta, d));
    for (std::size_t j = 0; j < d; ++j) positions[i + j * stride] = theta[j];
  }
}

std::unique_ptr<Model> make_lingauss(const LingaussConfig& cfg);
std::unique_ptr<Model> make_sources(const SourcesConfig& cfg);
std::unique_ptr<Model> make_ces(const CesConfig& cfg);

std::unique_ptr<Model> make_model(const std::string& name,
                                  const ModelSettings& settings) {
  if (name == "lingauss") return make_lingauss(settings.lingauss);
  if (name == "sources") return make_sources(settings.sources);
  if (name == "ces") return make_ces(settings.ces);
  throw ValidationError("unknown model '" + name +
                        "' (expected lingauss, sources or ces)");
}

}  // namespace pasoa
