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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pasoa/kernels.hpp"
#include "pasoa/rng.hpp"
#include "test_helpers.hpp"

using namespace pasoa;

namespace {

// long-double reference for the reductions
long double lse_ref(const std::vector<double>& x) {
  long double m = -std::numeric_limits<long double>::infinity();
  for (double v : x) m = std::max<long double>(m, v);
  if (!std::isfinite(static_cast<double>(m))) return m;
  long double s = 0.0L;
  for (double v : x) s += std::exp(static_cast<long double>(v) - m);
  return m + std::log(s);
}

long double ess_ref(const std::vector<double>& x, double gamma) {
  long double m = -std::numeric_limits<long double>::infinity();
  for (double v : x) m = std::max<long double>(m, v);
  long double s1 = 0.0L, s2 = 0.0L;
  for (double v : x) {
    const long double t = std::exp(gamma * (static_cast<long double>(v) - m));
    s1 += t;
    s2 += t * t;
  }
  return s1 * s1 / s2;
}

std::vector<double> random_logliks(Rng& rng, std::size_t n, double spread,
                                   bool with_inf) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -spread * rng.u01();
  if (with_inf && n > 3) {
    x[1] = -std::numeric_limits<double>::infinity();
    x[n - 2] = -std::numeric_limits<double>::infinity();
  }
  return x;
}

bool have_avx2() {
#ifdef PASOA_HAVE_AVX2_KERNELS
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("logsumexp and ess match a long-double reference") {
  Rng rng(101);
  const auto& ops = kernels::scalar_ops();
  for (std::size_t n : {1u, 2u, 3u, 7u, 64u, 1000u, 4097u}) {
    for (double spread : {1.0, 50.0, 800.0}) {
      auto x = random_logliks(rng, n, spread, n > 4);
      const double lse = ops.logsumexp(x.data(), n);
      CHECK(lse == doctest::Approx(static_cast<double>(lse_ref(x))).epsilon(1e-13));
      for (double gamma : {0.01, 0.37, 1.0}) {
        const double e = ops.ess(x.data(), n, gamma);
        CHECK(e == doctest::Approx(static_cast<double>(ess_ref(x, gamma)))
                       .epsilon(1e-11));
        CHECK(e >= 1.0 - 1e-12);
        CHECK(e <= static_cast<double>(n) + 1e-9);
      }
    }
  }
}

TEST_CASE("logsumexp of all -inf is -inf") {
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> x(5, ninf);
  CHECK(kernels::scalar_ops().logsumexp(x.data(), x.size()) == ninf);
}

TEST_CASE("exp_normalize produces normalized weights") {
  Rng rng(102);
  auto x = random_logliks(rng, 513, 300.0, true);
  std::vector<double> w(x.size());
  kernels::scalar_ops().exp_normalize(x.data(), x.size(), w.data());
  double s = 0.0;
  for (double v : w) {
    CHECK(v >= 0.0);
    s += v;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("weighted mean/sd against direct sums") {
  Rng rng(103);
  const std::size_t n = 1001;
  std::vector<double> x(n), w(n);
  double ws = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.normal() * 3.0 + 1.0;
    w[i] = rng.u01();
    ws += w[i];
  }
  for (auto& v : w) v /= ws;
  double mean, sd;
  kernels::scalar_ops().weighted_mean_sd(x.data(), w.data(), n, &mean, &sd);
  double m_ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) m_ref += w[i] * x[i];
  double v_ref = 0.0;
  for (std::size_t i = 0; i < n; ++i) v_ref += w[i] * (x[i] - m_ref) * (x[i] - m_ref);
  CHECK(mean == doctest::Approx(m_ref).epsilon(1e-12));
  CHECK(sd == doctest::Approx(std::sqrt(v_ref)).epsilon(1e-10));
}

TEST_CASE("avx2 backend is equivalent to scalar" *
          doctest::skip(!have_avx2())) {
#ifdef PASOA_HAVE_AVX2_KERNELS
  const auto& sc = kernels::scalar_ops();
  const auto& av = kernels::avx2_ops();
  Rng rng(104);

  for (std::size_t n : {1u, 4u, 5u, 31u, 1024u, 20111u}) {
    auto x = random_logliks(rng, n, 700.0, n > 8);
    CHECK(av.logsumexp(x.data(), n) ==
          doctest::Approx(sc.logsumexp(x.data(), n)).epsilon(1e-13));
    for (double gamma : {0.05, 0.5, 1.0}) {
      CHECK(av.ess(x.data(), n, gamma) ==
            doctest::Approx(sc.ess(x.data(), n, gamma)).epsilon(1e-11));
    }
    std::vector<double> w1(n), w2(n);
    sc.exp_normalize(x.data(), n, w1.data());
    av.exp_normalize(x.data(), n, w2.data());
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(w2[i] == doctest::Approx(w1[i]).epsilon(1e-12));
    }
  }

  // sources kernels over a particle matrix
  const kernels::SourcesParams p{2, 1.0, 0.1, 1e-4, 0.5};
  const std::size_t m = 4099;
  std::vector<double> pos(m * 4);
  for (auto& v : pos) v = 2.5 * rng.normal();
  const double xi[2] = {0.4, -1.3};
  for (double y : {0.05, 1.7, 9000.0}) {
    std::vector<double> a(m), b(m);
    sc.sources_loglik(p, y, xi, pos.data(), m, m, a.data(), false);
    av.sources_loglik(p, y, xi, pos.data(), m, m, b.data(), false);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }
    std::vector<double> l1(m), l2(m), d10(m), d20(m), d11(m), d21(m), y1(m),
        y2(m);
    sc.sources_loglik_grads(p, y, xi, pos.data(), m, m, l1.data(), d10.data(),
                            d11.data(), y1.data());
    av.sources_loglik_grads(p, y, xi, pos.data(), m, m, l2.data(), d20.data(),
                            d21.data(), y2.data());
    for (std::size_t i = 0; i < m; i += 7) {
      CHECK(l2[i] == doctest::Approx(l1[i]).epsilon(1e-12));
      CHECK(test::close(d20[i], d10[i], 1e-11));
      CHECK(test::close(d21[i], d11[i], 1e-11));
      CHECK(test::close(y2[i], y1[i], 1e-11));
    }
  }

  // accumulate mode adds onto the output
  std::vector<double> acc1(m, 1.0), acc2(m, 1.0);
  sc.sources_loglik(p, 2.0, xi, pos.data(), m, m, acc1.data(), true);
  av.sources_loglik(p, 2.0, xi, pos.data(), m, m, acc2.data(), true);
  for (std::size_t i = 0; i < m; i += 13) {
    CHECK(acc2[i] == doctest::Approx(acc1[i]).epsilon(1e-12));
  }
#endif
}

TEST_CASE("backend selection honors forcing") {
  const std::string active = kernels::ops().name;
  CHECK(kernels::force_backend("scalar"));
  CHECK(std::string(kernels::ops().name) == "scalar");
  CHECK_FALSE(kernels::force_backend("not-a-backend"));
  CHECK(kernels::force_backend("auto"));
  CHECK(std::string(kernels::ops().name) == active);
}

}  // TEST_SUITE
