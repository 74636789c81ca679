// Copyright 2026 The dpvb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 + FMA lanes of the scalar cores in kernel_math.hpp. Keep the
// operation sequence identical to the scalar reference; the equivalence
// tests in tests/test_kernels.cpp hold both backends to an ulp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <limits>

#include "dpvb/kernels.hpp"
#include "kernel_math.hpp"

namespace dpvb::kernels {
namespace {

using namespace detail;

inline __m256d ldexp4(__m256d v, __m256d n) {
  // n holds integral doubles; split as in ldexp_fast (truncation halves).
  const __m256d n1 =
      _mm256_round_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)),
                      _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC);
  const __m256d n2 = _mm256_sub_pd(n, n1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256i i1 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n1));
  const __m256i i2 = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n2));
  const __m256d f1 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(i1, bias), 52));
  const __m256d f2 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(i2, bias), 52));
  return _mm256_mul_pd(_mm256_mul_pd(v, f1), f2);
}

inline __m256d exp4(__m256d x) {
  const __m256d xo = x;
  x = _mm256_min_pd(x, _mm256_set1_pd(kExpOverflow));
  x = _mm256_max_pd(x, _mm256_set1_pd(kExpUnderflow));
  const __m256d n =
      _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);
  __m256d q = _mm256_set1_pd(kExpPoly[0]);
  for (int i = 1; i < 12; ++i)
    q = _mm256_fmadd_pd(q, r, _mm256_set1_pd(kExpPoly[i]));
  const __m256d p = _mm256_add_pd(
      _mm256_fmadd_pd(_mm256_mul_pd(r, r), q, r), _mm256_set1_pd(1.0));
  __m256d res = ldexp4(p, n);
  const __m256d inf =
      _mm256_set1_pd(std::numeric_limits<double>::infinity());
  res = _mm256_blendv_pd(
      res, inf, _mm256_cmp_pd(xo, _mm256_set1_pd(kExpOverflow), _CMP_GT_OQ));
  res = _mm256_blendv_pd(
      res, _mm256_setzero_pd(),
      _mm256_cmp_pd(xo, _mm256_set1_pd(kExpUnderflow), _CMP_LT_OQ));
  return res;
}

inline __m256d log4(__m256d x) {
  const __m256d denorm =
      _mm256_cmp_pd(x, _mm256_set1_pd(kDblMin), _CMP_LT_OQ);
  x = _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(kTwo54)), denorm);
  const __m256d adjust = _mm256_and_pd(denorm, _mm256_set1_pd(-54.0));
  const __m256i bits = _mm256_castpd_si256(x);
  __m256i ei = _mm256_sub_epi64(
      _mm256_and_si256(_mm256_srli_epi64(bits, 52),
                       _mm256_set1_epi64x(0x7ff)),
      _mm256_set1_epi64x(1023));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
      _mm256_set1_epi64x(0x3ff0000000000000LL)));
  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  // Narrow the 64-bit exponents to 32 bits and convert; they fit easily.
  const __m256i shuf = _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0);
  __m256d ed = _mm256_cvtepi32_pd(
      _mm256_castsi256_si128(_mm256_permutevar8x32_epi32(ei, shuf)));
  ed = _mm256_add_pd(ed, _mm256_and_pd(big, _mm256_set1_pd(1.0)));
  ed = _mm256_add_pd(ed, adjust);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one),
                                  _mm256_add_pd(m, one));
  const __m256d w = _mm256_mul_pd(s, s);
  __m256d q = _mm256_set1_pd(kLogPoly[0]);
  for (int i = 1; i < 9; ++i)
    q = _mm256_fmadd_pd(q, w, _mm256_set1_pd(kLogPoly[i]));
  const __m256d logm = _mm256_mul_pd(s, q);
  return _mm256_fmadd_pd(
      ed, _mm256_set1_pd(kLn2Hi),
      _mm256_fmadd_pd(ed, _mm256_set1_pd(kLn2Lo), logm));
}

inline __m256d digamma4(__m256d x) {
  const __m256d bad = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_NGT_UQ);
  // Keep garbage lanes harmlessly positive; the final blend overrides them.
  x = _mm256_blendv_pd(x, _mm256_set1_pd(1.0), bad);
  __m256d acc = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d shift = _mm256_set1_pd(kDigammaShift);
  for (int i = 0; i < kDigammaSteps; ++i) {
    const __m256d low = _mm256_cmp_pd(x, shift, _CMP_LT_OQ);
    acc = _mm256_sub_pd(acc,
                        _mm256_and_pd(low, _mm256_div_pd(one, x)));
    x = _mm256_add_pd(x, _mm256_and_pd(low, one));
  }
  const __m256d w = _mm256_div_pd(one, _mm256_mul_pd(x, x));
  __m256d p = _mm256_set1_pd(kDigammaPoly[0]);
  for (int i = 1; i < 6; ++i)
    p = _mm256_fmadd_pd(p, w, _mm256_set1_pd(kDigammaPoly[i]));
  __m256d res = _mm256_sub_pd(
      _mm256_add_pd(acc, log4(x)),
      _mm256_add_pd(_mm256_div_pd(_mm256_set1_pd(0.5), x),
                    _mm256_mul_pd(w, p)));
  return _mm256_blendv_pd(
      res, _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN()), bad);
}

inline __m256d sigmoid4(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d t = exp4(_mm256_sub_pd(_mm256_setzero_pd(), x));
  return _mm256_div_pd(one, _mm256_add_pd(one, t));
}

inline __m256d pg_mean4(__m256d c) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d series = _mm256_fnmadd_pd(
      _mm256_mul_pd(c, c), _mm256_set1_pd(1.0 / 48.0),
      _mm256_set1_pd(0.25));
  const __m256d t = exp4(_mm256_sub_pd(_mm256_setzero_pd(), c));
  const __m256d closed = _mm256_div_pd(
      _mm256_sub_pd(one, t),
      _mm256_mul_pd(_mm256_add_pd(one, t),
                    _mm256_mul_pd(_mm256_set1_pd(2.0), c)));
  const __m256d small =
      _mm256_cmp_pd(c, _mm256_set1_pd(kPgSeriesCutoff), _CMP_LT_OQ);
  return _mm256_blendv_pd(closed, series, small);
}

double reduce_add(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = reduce_add(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = reduce_add(acc);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double max_avx2(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  if (n >= 4) {
    __m256d acc = _mm256_set1_pd(m);
    for (; i + 4 <= n; i += 4)
      acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d mx = _mm_max_pd(lo, hi);
    m = _mm_cvtsd_f64(_mm_max_sd(mx, _mm_unpackhi_pd(mx, mx)));
  }
  for (; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

double sum_exp_shifted_avx2(const double* a, std::size_t n, double shift) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, exp4(_mm256_sub_pd(_mm256_loadu_pd(a + i), sh)));
  double s = reduce_add(acc);
  for (; i < n; ++i) s += exp_core(a[i] - shift);
  return s;
}

template <__m256d (*F4)(__m256d), double (*F1)(double)>
void map_avx2(const double* in, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, F4(_mm256_loadu_pd(in + i)));
  for (; i < n; ++i) out[i] = F1(in[i]);
}

void exp_avx2(const double* in, double* out, std::size_t n) {
  map_avx2<exp4, exp_core>(in, out, n);
}
void log_avx2(const double* in, double* out, std::size_t n) {
  map_avx2<log4, log_core>(in, out, n);
}
void digamma_avx2(const double* in, double* out, std::size_t n) {
  map_avx2<digamma4, digamma_core>(in, out, n);
}
void sigmoid_avx2(const double* in, double* out, std::size_t n) {
  map_avx2<sigmoid4, sigmoid_core>(in, out, n);
}
void pg_mean_avx2(const double* in, double* out, std::size_t n) {
  map_avx2<pg_mean4, pg_mean_core>(in, out, n);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                               _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void lerp_avx2(const double* prev, const double* next, double rho,
               double* out, std::size_t n) {
  const double omr = 1.0 - rho;
  const __m256d rv = _mm256_set1_pd(rho);
  const __m256d ov = _mm256_set1_pd(omr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        out + i,
        _mm256_fmadd_pd(rv, _mm256_loadu_pd(next + i),
                        _mm256_mul_pd(ov, _mm256_loadu_pd(prev + i))));
  for (; i < n; ++i) out[i] = std::fma(rho, next[i], omr * prev[i]);
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend backend = {
      "avx2",        sum_avx2,     dot_avx2,     max_avx2,
      sum_exp_shifted_avx2, exp_avx2, log_avx2,  digamma_avx2,
      sigmoid_avx2,  pg_mean_avx2, axpy_avx2,    lerp_avx2,
  };
  return backend;
}

}  // namespace dpvb::kernels

#endif  // x86_64
