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

#ifndef DPVB_SRC_KERNELS_KERNEL_MATH_HPP_
#define DPVB_SRC_KERNELS_KERNEL_MATH_HPP_

#include <bit>
#include <cmath>
#include <cstdint>

// Shared constants and the scalar cores all backends mirror. The vector
// variants must follow the exact same operation sequence so that lanes match
// the scalar reference bit for bit (fma for fma).
namespace dpvb::kernels::detail {

inline constexpr double kLog2E = 1.4426950408889634074;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kExpOverflow = 709.782712893384;
inline constexpr double kExpUnderflow = -745.2;

// 1/k! for k = 2..13, lowest degree last.
inline constexpr double kExpPoly[] = {
    1.0 / 6227020800.0,  // 1/13!
    1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
    1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,     1.0 / 120.0,
    1.0 / 24.0,        1.0 / 6.0,        1.0 / 2.0,
};

// atanh series coefficients 2/(2k+1), k = 8..0 (degree 17 in s).
inline constexpr double kLogPoly[] = {
    2.0 / 17.0, 2.0 / 15.0, 2.0 / 13.0, 2.0 / 11.0, 2.0 / 9.0,
    2.0 / 7.0,  2.0 / 5.0,  2.0 / 3.0,  2.0,
};

inline constexpr double kSqrt2 = 1.41421356237309504880;

// Asymptotic digamma tail: psi(x) ~ ln x - 1/(2x) - w*P(w), w = 1/x^2.
// Coefficients of P, highest degree first (through w^6; valid for x >= 10).
inline constexpr double kDigammaPoly[] = {
    -691.0 / 32760.0, 1.0 / 132.0, -1.0 / 240.0,
    1.0 / 252.0,      -1.0 / 120.0, 1.0 / 12.0,
};
inline constexpr double kDigammaShift = 10.0;
inline constexpr int kDigammaSteps = 10;

inline constexpr double kPgSeriesCutoff = 1e-4;

inline double ldexp_fast(double v, std::int64_t e) {
  // Two-step scaling: each factor stays a normal power of two, the product
  // may be denormal or zero.
  const std::int64_t e1 = e / 2;
  const std::int64_t e2 = e - e1;
  const double f1 = std::bit_cast<double>((1023 + e1) << 52);
  const double f2 = std::bit_cast<double>((1023 + e2) << 52);
  return v * f1 * f2;
}

inline double exp_core(double x) {
  const double xo = x;
  x = x > kExpOverflow ? kExpOverflow : x;
  x = x < kExpUnderflow ? kExpUnderflow : x;
  const double n = std::nearbyint(x * kLog2E);
  double r = std::fma(-n, kLn2Hi, x);
  r = std::fma(-n, kLn2Lo, r);
  double q = kExpPoly[0];
  for (int i = 1; i < 12; ++i) q = std::fma(q, r, kExpPoly[i]);
  const double p = std::fma(r * r, q, r) + 1.0;
  double res = ldexp_fast(p, static_cast<std::int64_t>(n));
  if (xo > kExpOverflow) res = std::numeric_limits<double>::infinity();
  if (xo < kExpUnderflow) res = 0.0;
  return res;
}

inline constexpr double kTwo54 = 18014398509481984.0;  // 2^54
inline constexpr double kDblMin = 2.2250738585072014e-308;

inline double log_core(double x) {
  // Callers guarantee x > 0 and finite. Denormals are rescaled first.
  double adjust = 0.0;
  if (x < kDblMin) {
    x *= kTwo54;
    adjust = -54.0;
  }
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  std::int64_t e =
      static_cast<std::int64_t>((bits >> 52) & 0x7ffULL) - 1023;
  double m = std::bit_cast<double>((bits & 0x000fffffffffffffULL) |
                                   0x3ff0000000000000ULL);
  if (m > kSqrt2) {
    m *= 0.5;
    e += 1;
  }
  const double s = (m - 1.0) / (m + 1.0);
  const double w = s * s;
  double q = kLogPoly[0];
  for (int i = 1; i < 9; ++i) q = std::fma(q, w, kLogPoly[i]);
  const double logm = s * q;
  const double ed = static_cast<double>(e) + adjust;
  return std::fma(ed, kLn2Hi, std::fma(ed, kLn2Lo, logm));
}

inline double digamma_core(double x) {
  // x > 0 expected; non-positive input yields NaN.
  if (!(x > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (int i = 0; i < kDigammaSteps; ++i) {
    if (x < kDigammaShift) {
      acc -= 1.0 / x;
      x += 1.0;
    }
  }
  const double w = 1.0 / (x * x);
  double p = kDigammaPoly[0];
  for (int i = 1; i < 6; ++i) p = std::fma(p, w, kDigammaPoly[i]);
  return acc + log_core(x) - 0.5 / x - w * p;
}

inline double sigmoid_core(double x) { return 1.0 / (1.0 + exp_core(-x)); }

inline double pg_mean_core(double c) {
  // tanh(c/2)/(2c) with an even Taylor branch below the cutoff.
  const double series = std::fma(-c * c, 1.0 / 48.0, 0.25);
  const double t = exp_core(-c);
  const double closed = (1.0 - t) / ((1.0 + t) * (2.0 * c));
  return c < kPgSeriesCutoff ? series : closed;
}

}  // namespace dpvb::kernels::detail

#endif  // DPVB_SRC_KERNELS_KERNEL_MATH_HPP_
