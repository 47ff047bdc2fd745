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

// Fast self-contained sanity checks behind the `check` CLI subcommand: a
// subset of the oracle suite that runs in a couple of seconds.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "pasoa/contrastive.hpp"
#include "pasoa/errors.hpp"
#include "pasoa/eval.hpp"
#include "pasoa/kernels.hpp"
#include "pasoa/math.hpp"
#include "pasoa/model.hpp"
#include "pasoa/runner.hpp"
#include "pasoa/smc.hpp"

namespace pasoa {
namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 40);
}

struct Checker {
  std::ostream& out;
  bool all_ok = true;

  void report(const char* name, bool ok, const std::string& detail = "") {
    out << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!ok && !detail.empty()) out << "  (" << detail << ")";
    out << '\n';
    all_ok = all_ok && ok;
  }
};

}  // namespace

bool selfcheck(std::ostream& out) {
  Checker c{out};
  Rng rng(20260810);

  // kernel backends agree on reductions
  {
    std::vector<double> x(1537);
    for (double& v : x) v = -200.0 * rng.u01();
    x[5] = -std::numeric_limits<double>::infinity();
    const auto& s = kernels::scalar_ops();
    const auto& a = kernels::ops();
    const double l1 = s.logsumexp(x.data(), x.size());
    const double l2 = a.logsumexp(x.data(), x.size());
    const double e1 = s.ess(x.data(), x.size(), 0.37);
    const double e2 = a.ess(x.data(), x.size(), 0.37);
    const bool ok = std::abs(l1 - l2) <= 1e-11 * std::abs(l1) &&
                    std::abs(e1 - e2) <= 1e-9 * e1;
    c.report("kernel backend equivalence", ok,
             std::string("active=") + a.name);
  }

  // ESS closed forms
  {
    std::vector<double> lw(100, std::log(0.01));
    const double e1 = effective_sample_size(lw);
    std::vector<double> lw2 = {std::log(0.5), std::log(0.5),
                               -std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity()};
    const double e2 = effective_sample_size(lw2);
    c.report("effective sample size closed forms",
             std::abs(e1 - 100.0) < 1e-9 && std::abs(e2 - 2.0) < 1e-12);
  }

  // stratified resampling with two equal weights keeps one copy of each
  {
    ParticleCloud cloud(2, 1);
    cloud.positions = {1.0, 2.0};
    bool ok = true;
    for (int t = 0; t < 20; ++t) {
      ParticleCloud copy = cloud;
      resample(copy, ResamplingScheme::stratified, rng.fork(t));
      ok = ok && copy.positions[0] + copy.positions[1] == 3.0;
    }
    c.report("stratified resampling strata", ok);
  }

  // conjugate-posterior agreement on a short lingauss run
  {
    ExperimentConfig cfg;
    cfg.model_name = "lingauss";
    cfg.method = Method::random;
    cfg.k = 3;
    cfg.n = 100;
    cfg.l = 199;  // M = 20000
    cfg.seed = 7;
    cfg.eval.l_eval = 1000;
    cfg.theta_star = {1.4};
    const RolloutRecord rec = run_rollout(cfg, 0, nullptr, nullptr);

    // re-assimilate the realized designs/observations with a fresh chain and
    // compare against the closed-form conjugate posterior
    const auto model = make_model("lingauss", cfg.models);
    ParticleCloud cloud(cfg.particles(), 1);
    Rng chain(424243);
    Rng irng = chain.fork(1);
    sample_prior_matrix(*model, irng, cloud.positions.data(), cloud.count,
                        cloud.count);
    TemperConfig temper;
    History history;
    bool ok = true;
    double prec = 1.0, dot = 0.0;
    for (const StepRecord& step : rec.steps) {
      temper_to_posterior(*model, cloud, step.y, step.xi, history, temper,
                          chain.fork({2, step.k}));
      history.push_back({step.y, step.xi});
      prec += step.xi[0] * step.xi[0];
      dot += step.xi[0] * step.y;
      const Moments mom = posterior_moments(cloud);
      const double mean_exact = dot / prec;
      const double var_exact = 1.0 / prec;
      ok = ok && std::abs(mom.mean[0] - mean_exact) <
                     0.05 * std::max(0.2, std::abs(mean_exact)) &&
           std::abs(mom.cov[0] - var_exact) < 0.05 * var_exact;
    }
    c.report("lingauss conjugate posterior (5% desk check)", ok);
  }

  // per-sample PCE bound
  {
    ModelSettings ms;
    const auto model = make_model("lingauss", ms);
    bool ok = true;
    for (int t = 0; t < 500; ++t) {
      Rng s = rng.fork({901, static_cast<std::uint64_t>(t)});
      const std::size_t l = 1 + s.uniform_index(16);
      ContrastiveSet cs(l, 1);
      std::vector<double> theta(1);
      for (std::size_t i = 0; i <= l; ++i) {
        model->sample_prior(s, theta);
        cs.set_row(i, theta);
      }
      const double xi = s.uniform(-3.0, 3.0);
      cs.row(0, theta);
      const double y =
          model->simulate(theta, std::span<const double>(&xi, 1), s.normal());
      const double f =
          pce_integrand(*model, std::span<const double>(&xi, 1), cs, y);
      ok = ok && f <= std::log(static_cast<double>(l + 1)) + 1e-12;
    }
    c.report("PCE integrand bounded by log(L+1)", ok);
  }

  // CES transform round trip
  {
    ModelSettings ms;
    const auto model = make_model("ces", ms);
    bool ok = true;
    std::vector<double> theta(5), z(4), back(5);
    for (int t = 0; t < 200; ++t) {
      Rng s = rng.fork({902, static_cast<std::uint64_t>(t)});
      model->sample_prior(s, theta);
      model->to_unconstrained(theta, z);
      model->from_unconstrained(z, back);
      for (int j = 0; j < 5; ++j) ok = ok && std::abs(theta[j] - back[j]) <
                                            1e-10 * std::max(1.0, theta[j]);
    }
    c.report("CES unconstrained transform round trip", ok);
  }

  // CES mixture normalization (point masses + continuous component)
  {
    ModelSettings ms;
    const auto model = make_model("ces", ms);
    const CesConfig& ces = ms.ces;
    bool ok = true;
    std::vector<double> theta(5), xi(6);
    for (int t = 0; t < 5 && ok; ++t) {
      Rng s = rng.fork({903, static_cast<std::uint64_t>(t)});
      model->sample_prior(s, theta);
      theta[4] = std::exp(1.0 + 0.5 * s.normal());  // keep scales moderate
      for (int j = 0; j < 6; ++j) xi[j] = s.uniform(0.0, 10.0);
      const double p0 =
          std::exp(model->log_likelihood(ces.epsilon, theta, xi));
      const double p1 =
          std::exp(model->log_likelihood(1.0 - ces.epsilon, theta, xi));
      // integrate the continuous component in eta-space (y = sigmoid(eta)),
      // with segment boundaries anchored at the density peak so the
      // adaptive rule cannot step over a narrow spike
      const auto q_eta = [&](double eta) {
        const double y = sigmoid(eta);
        return std::exp(model->log_likelihood(y, theta, xi)) * y * (1.0 - y);
      };
      double mu_eta, sigma_eta;
      ces_eta_params(ces, theta, xi, mu_eta, sigma_eta);
      const double lo = logit(ces.epsilon) + 1e-9;
      const double hi = logit(1.0 - ces.epsilon) - 1e-9;
      std::vector<double> knots = {lo, hi};
      for (double c : {-12.0, -4.0, 0.0, 4.0, 12.0}) {
        const double eta = mu_eta + c * sigma_eta;
        if (eta > lo && eta < hi) knots.push_back(eta);
      }
      std::sort(knots.begin(), knots.end());
      double mass = 0.0;
      for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        mass += integrate(q_eta, knots[i], knots[i + 1], 1e-10);
      }
      ok = ok && std::abs(p0 + p1 + mass - 1.0) < 1e-3;
    }
    c.report("CES mixture normalization", ok);
  }

  // gradient spot checks against finite differences
  {
    ModelSettings ms;
    const auto model = make_model("sources", ms);
    bool ok = true;
    std::vector<double> theta(4), xi(2), grad(2);
    for (int t = 0; t < 10; ++t) {
      Rng s = rng.fork({904, static_cast<std::uint64_t>(t)});
      model->sample_prior(s, theta);
      xi[0] = s.uniform(-3.0, 3.0);
      xi[1] = s.uniform(-3.0, 3.0);
      const double y = model->simulate(theta, xi, s.normal());
      model->grad_design_loglik(y, theta, xi, grad);
      for (int j = 0; j < 2; ++j) {
        const double h = 1e-5;
        std::vector<double> lo = xi, hi = xi;
        lo[j] -= h;
        hi[j] += h;
        const double fd = (model->log_likelihood(y, theta, hi) -
                           model->log_likelihood(y, theta, lo)) /
                          (2.0 * h);
        ok = ok && std::abs(grad[j] - fd) <=
                       1e-3 * std::max({1.0, std::abs(fd), std::abs(grad[j])});
      }
    }
    c.report("sources design gradient vs finite differences", ok);
  }

  out << (c.all_ok ? "all checks passed\n" : "CHECK FAILURES\n");
  return c.all_ok;
}

}  // namespace pasoa
