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

#include "dpvb/polya_gamma.hpp"

#include <cmath>
#include <stdexcept>

namespace dpvb::polya_gamma {

double pg_mean(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    throw std::domain_error("pg_mean: c must be finite and >= 0");
  if (c < kSeriesSwitch) return 0.25 - c * c / 48.0;
  return std::tanh(0.5 * c) / (2.0 * c);
}

PgPosterior pg_tilt(double expected_square) {
  if (!(expected_square >= 0.0) || !std::isfinite(expected_square))
    throw std::domain_error("pg_tilt: expected square must be >= 0");
  return {std::sqrt(expected_square)};
}

}  // namespace dpvb::polya_gamma
