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

#ifndef DPVB_KERNELS_HPP_
#define DPVB_KERNELS_HPP_

#include <cstddef>
#include <span>

// Data-parallel inner-loop kernels with a scalar reference implementation
// and a runtime-selected AVX2 variant. All backends implement the same
// algorithm step for step, so outputs of elementwise kernels agree to within
// an ulp; reductions may differ in the last bits due to re-association.
namespace dpvb::kernels {

struct Backend {
  const char* name;
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*max_value)(const double*, std::size_t);
  // sum_i exp(a[i] - shift)
  double (*sum_exp_shifted)(const double*, std::size_t, double);
  void (*exp_vec)(const double*, double*, std::size_t);
  void (*log_vec)(const double*, double*, std::size_t);
  void (*digamma_vec)(const double*, double*, std::size_t);
  void (*sigmoid_vec)(const double*, double*, std::size_t);
  void (*pg_mean_vec)(const double*, double*, std::size_t);
  // y += a * x
  void (*axpy)(double, const double*, double*, std::size_t);
  // out = (1 - rho) * prev + rho * next
  void (*lerp)(const double*, const double*, double, double*, std::size_t);
};

const Backend& scalar_backend();
const Backend& active_backend();

// Name of the backend the dispatcher picked ("scalar", "avx2").
const char* backend_name();

inline double sum(std::span<const double> a) {
  return active_backend().sum(a.data(), a.size());
}
inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_backend().dot(a.data(), b.data(), a.size());
}
inline double max_value(std::span<const double> a) {
  return active_backend().max_value(a.data(), a.size());
}
inline double sum_exp_shifted(std::span<const double> a, double shift) {
  return active_backend().sum_exp_shifted(a.data(), a.size(), shift);
}
inline void exp_vec(std::span<const double> in, std::span<double> out) {
  active_backend().exp_vec(in.data(), out.data(), in.size());
}
inline void log_vec(std::span<const double> in, std::span<double> out) {
  active_backend().log_vec(in.data(), out.data(), in.size());
}
inline void digamma_vec(std::span<const double> in, std::span<double> out) {
  active_backend().digamma_vec(in.data(), out.data(), in.size());
}
inline void sigmoid_vec(std::span<const double> in, std::span<double> out) {
  active_backend().sigmoid_vec(in.data(), out.data(), in.size());
}
inline void pg_mean_vec(std::span<const double> c, std::span<double> out) {
  active_backend().pg_mean_vec(c.data(), out.data(), c.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active_backend().axpy(a, x.data(), y.data(), x.size());
}
inline void lerp(std::span<const double> prev, std::span<const double> next,
                 double rho, std::span<double> out) {
  active_backend().lerp(prev.data(), next.data(), rho, out.data(),
                        prev.size());
}

// max + shifted exp-sum; -inf on an empty span.
double log_sum_exp(std::span<const double> a);

}  // namespace dpvb::kernels

#endif  // DPVB_KERNELS_HPP_
