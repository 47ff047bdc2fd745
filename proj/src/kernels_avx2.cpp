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

// AVX2/FMA variants of the hot kernels. This translation unit is compiled
// with -mavx2 -mfma and only reached through the runtime dispatch table, so
// the rest of the binary stays baseline-x86-64.
//
// exp/log use the classic Cephes double-precision rational approximations
// (~1-2 ulp), evaluated 4 lanes at a time. Reductions accumulate into fixed
// lane-partial sums, so results are deterministic for a given input length.

#include "pasoa/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "pasoa/math.hpp"

namespace pasoa::kernels {
namespace {

// exp(x) for x in [-708.39, 709.08] (the scale factor stays below 2^1024);
// below the range returns 0, above +inf, -inf maps to 0. Kernel callers
// only pass max-shifted values <= 0.
inline __m256d vexp(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d too_small = _mm256_set1_pd(-708.396418532264106224);
  const __m256d too_big = _mm256_set1_pd(709.08956571282405153);

  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, too_small), too_big);
  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, c1, xc);
  r = _mm256_fnmadd_pd(n, c2, r);

  __m256d z = _mm256_mul_pd(r, r);
  // px = r * P(z), qx = Q(z)
  __m256d px = _mm256_fmadd_pd(z, _mm256_set1_pd(1.26177193074810590878e-4),
                               _mm256_set1_pd(3.02994407707441961300e-2));
  px = _mm256_fmadd_pd(z, px, _mm256_set1_pd(9.99999999999999999910e-1));
  px = _mm256_mul_pd(px, r);

  __m256d qx = _mm256_fmadd_pd(z, _mm256_set1_pd(3.00198505138664455042e-6),
                               _mm256_set1_pd(2.52448340349684104192e-3));
  qx = _mm256_fmadd_pd(z, qx, _mm256_set1_pd(2.27265548208155028766e-1));
  qx = _mm256_fmadd_pd(z, qx, _mm256_set1_pd(2.0));

  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  __m256d res = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  // scale by 2^n through the exponent field
  __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i ni64 = _mm256_cvtepi32_epi64(ni);
  __m256i scale_bits =
      _mm256_slli_epi64(_mm256_add_epi64(ni64, _mm256_set1_epi64x(1023)), 52);
  res = _mm256_mul_pd(res, _mm256_castsi256_pd(scale_bits));

  res = _mm256_blendv_pd(res, _mm256_setzero_pd(),
                         _mm256_cmp_pd(x, too_small, _CMP_LT_OQ));
  res = _mm256_blendv_pd(
      res, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
      _mm256_cmp_pd(x, too_big, _CMP_GT_OQ));
  return res;
}

// log(x) for finite positive normal x (kernel inputs are signal means and
// observations, both strictly positive).
inline __m256d vlog(__m256d x) {
  const __m256i mant_mask = _mm256_set1_epi64x(0x000fffffffffffffLL);
  const __m256i half_bits = _mm256_set1_epi64x(0x3fe0000000000000LL);

  __m256i bits = _mm256_castpd_si256(x);
  __m256i expo = _mm256_srli_epi64(bits, 52);
  // gather the 4 low int32s of the 64-bit lanes
  __m256i packed = _mm256_permutevar8x32_epi32(
      expo, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0));
  __m256d e = _mm256_cvtepi32_pd(_mm256_castsi256_si128(packed));
  e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));

  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_bits));

  // bring mantissa into [sqrt(1/2), sqrt(2))
  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
  __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(below, _mm256_set1_pd(1.0)));
  m = _mm256_add_pd(m, _mm256_and_pd(below, m));
  __m256d z = _mm256_sub_pd(m, _mm256_set1_pd(1.0));

  __m256d p = _mm256_fmadd_pd(z, _mm256_set1_pd(1.01875663804580931796e-4),
                              _mm256_set1_pd(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(z, p, _mm256_set1_pd(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(z, p, _mm256_set1_pd(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(z, p, _mm256_set1_pd(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(z, p, _mm256_set1_pd(7.70838733755885391666e0));

  __m256d q = _mm256_add_pd(z, _mm256_set1_pd(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(z, q, _mm256_set1_pd(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(z, q, _mm256_set1_pd(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(z, q, _mm256_set1_pd(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(z, q, _mm256_set1_pd(2.31251620126765340583e1));

  __m256d z2 = _mm256_mul_pd(z, z);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(z, z2), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(z2, _mm256_set1_pd(0.5), y);
  __m256d res = _mm256_add_pd(z, y);
  res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);
  return res;
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return std::max(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

double max_entry(const double* x, std::size_t n) {
  const double ninf = -std::numeric_limits<double>::infinity();
  __m256d vm = _mm256_set1_pd(ninf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(x + i));
  double m = hmax(vm);
  for (; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

double logsumexp_avx2(const double* x, std::size_t n) {
  const double m = max_entry(x, n);
  if (!std::isfinite(m)) return m;
  const __m256d vm = _mm256_set1_pd(m);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, vexp(_mm256_sub_pd(_mm256_loadu_pd(x + i), vm)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

double ess_avx2(const double* x, std::size_t n, double gamma) {
  const double m = max_entry(x, n);
  const __m256d vm = _mm256_set1_pd(m);
  const __m256d vg = _mm256_set1_pd(gamma);
  __m256d a1 = _mm256_setzero_pd(), a2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t =
        vexp(_mm256_mul_pd(vg, _mm256_sub_pd(_mm256_loadu_pd(x + i), vm)));
    a1 = _mm256_add_pd(a1, t);
    a2 = _mm256_fmadd_pd(t, t, a2);
  }
  double s1 = hsum(a1), s2 = hsum(a2);
  for (; i < n; ++i) {
    const double t = std::exp(gamma * (x[i] - m));
    s1 += t;
    s2 += t * t;
  }
  return (s1 * s1) / s2;
}

void exp_normalize_avx2(const double* x, std::size_t n, double* w) {
  const double m = max_entry(x, n);
  const __m256d vm = _mm256_set1_pd(m);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = vexp(_mm256_sub_pd(_mm256_loadu_pd(x + i), vm));
    _mm256_storeu_pd(w + i, t);
    acc = _mm256_add_pd(acc, t);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    w[i] = std::exp(x[i] - m);
    s += w[i];
  }
  const __m256d inv = _mm256_set1_pd(1.0 / s);
  i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(w + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), inv));
  }
  for (; i < n; ++i) w[i] *= 1.0 / s;
}

void weighted_mean_sd_avx2(const double* x, const double* w, std::size_t n,
                           double* mean, double* sd) {
  __m256d a1 = _mm256_setzero_pd(), a2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d wv = _mm256_loadu_pd(w + i);
    __m256d wx = _mm256_mul_pd(wv, xv);
    a1 = _mm256_add_pd(a1, wx);
    a2 = _mm256_fmadd_pd(wx, xv, a2);
  }
  double s1 = hsum(a1), s2 = hsum(a2);
  for (; i < n; ++i) {
    s1 += w[i] * x[i];
    s2 += w[i] * x[i] * x[i];
  }
  *mean = s1;
  *sd = std::sqrt(std::max(0.0, s2 - s1 * s1));
}

void sources_loglik_avx2(const SourcesParams& p, double y, const double* xi,
                         const double* pos, std::size_t m, std::size_t stride,
                         double* out, bool accumulate) {
  const double log_y = std::log(y);
  const double inv_var = 1.0 / (p.sigma * p.sigma);
  const double base = -log_y - std::log(p.sigma) - 0.5 * kLog2Pi;

  const __m256d vxi0 = _mm256_set1_pd(xi[0]);
  const __m256d vxi1 = _mm256_set1_pd(xi[1]);
  const __m256d vsoft = _mm256_set1_pd(p.softening);
  const __m256d valpha = _mm256_set1_pd(p.alpha);
  const __m256d vlogy = _mm256_set1_pd(log_y);
  const __m256d vbase = _mm256_set1_pd(base);
  const __m256d vhalf_invvar = _mm256_set1_pd(-0.5 * inv_var);

  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d mu = _mm256_set1_pd(p.background);
    for (std::size_t s = 0; s < p.n_sources; ++s) {
      __m256d dx =
          _mm256_sub_pd(_mm256_loadu_pd(pos + i + (2 * s) * stride), vxi0);
      __m256d dy_ =
          _mm256_sub_pd(_mm256_loadu_pd(pos + i + (2 * s + 1) * stride), vxi1);
      __m256d d = _mm256_fmadd_pd(dx, dx, vsoft);
      d = _mm256_fmadd_pd(dy_, dy_, d);
      mu = _mm256_add_pd(mu, _mm256_div_pd(valpha, d));
    }
    __m256d r = _mm256_sub_pd(vlogy, vlog(mu));
    __m256d ll = _mm256_fmadd_pd(_mm256_mul_pd(r, r), vhalf_invvar, vbase);
    if (accumulate) ll = _mm256_add_pd(ll, _mm256_loadu_pd(out + i));
    _mm256_storeu_pd(out + i, ll);
  }
  if (i < m) {
    scalar_ops().sources_loglik(p, y, xi, pos + i, m - i, stride, out + i,
                                accumulate);
  }
}

void sources_loglik_grads_avx2(const SourcesParams& p, double y,
                               const double* xi, const double* pos,
                               std::size_t m, std::size_t stride, double* ll,
                               double* dxi0, double* dxi1, double* dy) {
  const double log_y = std::log(y);
  const double inv_var = 1.0 / (p.sigma * p.sigma);
  const double base = -log_y - std::log(p.sigma) - 0.5 * kLog2Pi;

  const __m256d vxi0 = _mm256_set1_pd(xi[0]);
  const __m256d vxi1 = _mm256_set1_pd(xi[1]);
  const __m256d vsoft = _mm256_set1_pd(p.softening);
  const __m256d valpha2 = _mm256_set1_pd(2.0 * p.alpha);
  const __m256d valpha = _mm256_set1_pd(p.alpha);
  const __m256d vlogy = _mm256_set1_pd(log_y);
  const __m256d vbase = _mm256_set1_pd(base);
  const __m256d vinvvar = _mm256_set1_pd(inv_var);
  const __m256d vhalf_invvar = _mm256_set1_pd(-0.5 * inv_var);
  const __m256d vinv_y = _mm256_set1_pd(-1.0 / y);
  const __m256d vone = _mm256_set1_pd(1.0);

  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    __m256d mu = _mm256_set1_pd(p.background);
    __m256d g0 = _mm256_setzero_pd();
    __m256d g1 = _mm256_setzero_pd();
    for (std::size_t s = 0; s < p.n_sources; ++s) {
      __m256d dx =
          _mm256_sub_pd(_mm256_loadu_pd(pos + i + (2 * s) * stride), vxi0);
      __m256d dy_ =
          _mm256_sub_pd(_mm256_loadu_pd(pos + i + (2 * s + 1) * stride), vxi1);
      __m256d d = _mm256_fmadd_pd(dx, dx, vsoft);
      d = _mm256_fmadd_pd(dy_, dy_, d);
      __m256d inv_d = _mm256_div_pd(vone, d);
      mu = _mm256_fmadd_pd(valpha, inv_d, mu);
      __m256d c = _mm256_mul_pd(valpha2, _mm256_mul_pd(inv_d, inv_d));
      g0 = _mm256_fmadd_pd(c, dx, g0);
      g1 = _mm256_fmadd_pd(c, dy_, g1);
    }
    __m256d r = _mm256_sub_pd(vlogy, vlog(mu));
    _mm256_storeu_pd(ll + i,
                     _mm256_fmadd_pd(_mm256_mul_pd(r, r), vhalf_invvar, vbase));
    __m256d dll_dmu =
        _mm256_div_pd(_mm256_mul_pd(r, vinvvar), mu);
    _mm256_storeu_pd(dxi0 + i, _mm256_mul_pd(dll_dmu, g0));
    _mm256_storeu_pd(dxi1 + i, _mm256_mul_pd(dll_dmu, g1));
    _mm256_storeu_pd(dy + i,
                     _mm256_mul_pd(_mm256_fmadd_pd(r, vinvvar, vone), vinv_y));
  }
  if (i < m) {
    scalar_ops().sources_loglik_grads(p, y, xi, pos + i, m - i, stride, ll + i,
                                      dxi0 + i, dxi1 + i, dy + i);
  }
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table = {
      "avx2",
      logsumexp_avx2,
      ess_avx2,
      exp_normalize_avx2,
      weighted_mean_sd_avx2,
      sources_loglik_avx2,
      sources_loglik_grads_avx2,
  };
  return table;
}

}  // namespace pasoa::kernels

#endif  // x86_64
