#include "precipgen/kernels.hpp"

// AVX2+FMA kernel variant. Processes four locations per iteration with an
// inlined vector exp/log (Cody-Waite range reduction + polynomial core).
// Semantics match kernels_scalar.cpp; agreement is tolerance-tested, not
// bitwise, because the polynomial exp/log differ from libm by a few ulp.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <limits>

namespace precipgen::kernels {

namespace {

const __m256d kOne = _mm256_set1_pd(1.0);
const __m256d kMagic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51
const __m256d kLog2e = _mm256_set1_pd(1.4426950408889634074);
const __m256d kLn2Hi = _mm256_set1_pd(6.93147180369123816490e-01);
const __m256d kLn2Lo = _mm256_set1_pd(1.90821492927058770002e-10);

// exp(x) with inputs clamped to [-708, 709]; x < -708 flushes to 0.
inline __m256d exp_pd(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-708.0), _CMP_LT_OQ);
  x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
  x = _mm256_min_pd(x, _mm256_set1_pd(709.0));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kLog2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, kLn2Hi, x);
  r = _mm256_fnmadd_pd(n, kLn2Lo, r);

  // exp(r) on |r| <= ln2/2, Taylor to r^13 (remainder ~4e-18 relative).
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, kOne);
  p = _mm256_fmadd_pd(p, r, kOne);

  // scale by 2^n: n as int64 via the magic-shift trick, then exponent insert
  const __m256i ni =
      _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, kMagic)), _mm256_castpd_si256(kMagic));
  const __m256i pow2 =
      _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  const __m256d scaled = _mm256_mul_pd(p, _mm256_castsi256_pd(pow2));
  return _mm256_andnot_pd(underflow, scaled);
}

// ln(x) for positive finite x (callers pass sums of exponentials >= 1).
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i expo = _mm256_srli_epi64(bits, 52);
  // mantissa in [1, 2)
  const __m256i mant_bits = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
      _mm256_set1_epi64x(0x3FF0000000000000LL));
  __m256d m = _mm256_castsi256_pd(mant_bits);
  const __m256i ki = _mm256_sub_epi64(expo, _mm256_set1_epi64x(1023));
  __m256d k = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_add_epi64(ki, _mm256_castpd_si256(kMagic))), kMagic);

  // fold m into [sqrt(1/2), sqrt(2))
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  k = _mm256_add_pd(k, _mm256_and_pd(big, kOne));

  // ln m = 2 atanh(s), s = (m-1)/(m+1), |s| <= 0.1716
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, kOne), _mm256_add_pd(m, kOne));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d q = _mm256_set1_pd(1.0 / 17.0);
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 15.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 13.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 11.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 9.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 7.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 5.0));
  q = _mm256_fmadd_pd(q, s2, _mm256_set1_pd(1.0 / 3.0));
  const __m256d two_s = _mm256_add_pd(s, s);
  const __m256d ln_m = _mm256_fmadd_pd(_mm256_mul_pd(two_s, s2), q, two_s);

  return _mm256_fmadd_pd(k, kLn2Hi, _mm256_fmadd_pd(k, kLn2Lo, ln_m));
}

// --- kernels ----------------------------------------------------------------

double site_score_sum_avx2(const double* y, const StateEmissionView& p) {
  const std::size_t L = p.L, M = p.M;
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  __m256d z[kMaxComponents];
  std::size_t l = 0;
  for (; l + 4 <= L; l += 4) {
    const __m256d yv = _mm256_loadu_pd(y + l);
    const __m256d dry = _mm256_cmp_pd(yv, zero, _CMP_EQ_OQ);
    __m256d zmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (std::size_t m = 0; m < M; ++m) {
      z[m] = _mm256_fnmadd_pd(yv, _mm256_loadu_pd(p.rate + m * L + l),
                              _mm256_loadu_pd(p.wet_weight + m * L + l));
      zmax = _mm256_max_pd(zmax, z[m]);
    }
    __m256d s = zero;
    for (std::size_t m = 0; m < M; ++m) s = _mm256_add_pd(s, exp_pd(_mm256_sub_pd(z[m], zmax)));
    const __m256d wet = _mm256_add_pd(zmax, log_pd(s));
    const __m256d site = _mm256_blendv_pd(wet, _mm256_loadu_pd(p.log_c0 + l), dry);
    acc = _mm256_add_pd(acc, site);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);

  // scalar tail for L % 4
  for (; l < L; ++l) {
    if (y[l] == 0.0) {
      total += p.log_c0[l];
      continue;
    }
    double zmax = -std::numeric_limits<double>::infinity();
    double zs[kMaxComponents];
    for (std::size_t m = 0; m < M; ++m) {
      zs[m] = p.wet_weight[m * L + l] - y[l] * p.rate[m * L + l];
      if (zs[m] > zmax) zmax = zs[m];
    }
    double s = 0.0;
    for (std::size_t m = 0; m < M; ++m) s += std::exp(zs[m] - zmax);
    total += zmax + std::log(s);
  }
  return total;
}

void resp_accumulate_avx2(const double* y, const StateEmissionView& p, double w, double* dry0,
                          double* s1, double* sy) {
  const std::size_t L = p.L, M = p.M;
  const __m256d zero = _mm256_setzero_pd();
  const __m256d wv = _mm256_set1_pd(w);
  __m256d e[kMaxComponents];
  std::size_t l = 0;
  for (; l + 4 <= L; l += 4) {
    const __m256d yv = _mm256_loadu_pd(y + l);
    const __m256d dry = _mm256_cmp_pd(yv, zero, _CMP_EQ_OQ);
    __m256d zmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (std::size_t m = 0; m < M; ++m) {
      e[m] = _mm256_fnmadd_pd(yv, _mm256_loadu_pd(p.rate + m * L + l),
                              _mm256_loadu_pd(p.wet_weight + m * L + l));
      zmax = _mm256_max_pd(zmax, e[m]);
    }
    __m256d tot = zero;
    for (std::size_t m = 0; m < M; ++m) {
      e[m] = exp_pd(_mm256_sub_pd(e[m], zmax));
      tot = _mm256_add_pd(tot, e[m]);
    }
    const __m256d scale = _mm256_div_pd(wv, tot);
    for (std::size_t m = 0; m < M; ++m) {
      // zero the contribution on dry lanes
      const __m256d r = _mm256_andnot_pd(dry, _mm256_mul_pd(scale, e[m]));
      double* s1p = s1 + m * L + l;
      double* syp = sy + m * L + l;
      _mm256_storeu_pd(s1p, _mm256_add_pd(_mm256_loadu_pd(s1p), r));
      _mm256_storeu_pd(syp, _mm256_fmadd_pd(r, yv, _mm256_loadu_pd(syp)));
    }
    _mm256_storeu_pd(dry0 + l, _mm256_add_pd(_mm256_loadu_pd(dry0 + l), _mm256_and_pd(dry, wv)));
  }

  for (; l < L; ++l) {
    if (y[l] == 0.0) {
      dry0[l] += w;
      continue;
    }
    double es[kMaxComponents];
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < M; ++m) {
      es[m] = p.wet_weight[m * L + l] - y[l] * p.rate[m * L + l];
      if (es[m] > zmax) zmax = es[m];
    }
    double tot = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      es[m] = std::exp(es[m] - zmax);
      tot += es[m];
    }
    const double scale = w / tot;
    for (std::size_t m = 0; m < M; ++m) {
      const double r = scale * es[m];
      s1[m * L + l] += r;
      sy[m * L + l] += r * y[l];
    }
  }
}

const KernelTable kAvx2Table{"avx2", site_score_sum_avx2, resp_accumulate_avx2};

}  // namespace

// Internal hook for the dispatcher (declared there, not in the public header).
const KernelTable* avx2_table_if_supported() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2Table;
  return nullptr;
}

}  // namespace precipgen::kernels
