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

#include "dpvb/kernels.hpp"

#include <cmath>
#include <limits>

namespace dpvb::kernels {

#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
#endif

const Backend& active_backend() {
  static const Backend& backend = [impl = &scalar_backend()]() mutable
      -> const Backend& {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
      impl = &avx2_backend();
#endif
    return *impl;
  }();
  return backend;
}

const char* backend_name() { return active_backend().name; }

double log_sum_exp(std::span<const double> a) {
  if (a.empty()) return -std::numeric_limits<double>::infinity();
  const double m = max_value(a);
  if (!std::isfinite(m)) return m;
  return m + std::log(sum_exp_shifted(a, m));
}

}  // namespace dpvb::kernels
