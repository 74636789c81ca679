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

#include <limits>

#include "dpvb/kernels.hpp"
#include "kernel_math.hpp"

namespace dpvb::kernels {
namespace {

using namespace detail;

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double max_scalar(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

double sum_exp_shifted_scalar(const double* a, std::size_t n, double shift) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += exp_core(a[i] - shift);
  return s;
}

void exp_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = exp_core(in[i]);
}

void log_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = log_core(in[i]);
}

void digamma_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = digamma_core(in[i]);
}

void sigmoid_scalar(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid_core(in[i]);
}

void pg_mean_scalar(const double* c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = pg_mean_core(c[i]);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void lerp_scalar(const double* prev, const double* next, double rho,
                 double* out, std::size_t n) {
  const double omr = 1.0 - rho;
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::fma(rho, next[i], omr * prev[i]);
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend = {
      "scalar",        sum_scalar,     dot_scalar,     max_scalar,
      sum_exp_shifted_scalar, exp_scalar, log_scalar,  digamma_scalar,
      sigmoid_scalar,  pg_mean_scalar, axpy_scalar,    lerp_scalar,
  };
  return backend;
}

}  // namespace dpvb::kernels
