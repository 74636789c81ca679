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

#ifndef DPVB_POLYA_GAMMA_HPP_
#define DPVB_POLYA_GAMMA_HPP_

namespace dpvb::polya_gamma {

// Tilted posterior PG(1, c) of a Polya-Gamma auxiliary variable.
struct PgPosterior {
  double c = 0.0;  // tilt, sqrt of the expected squared linear term
  static constexpr int b = 1;
};

// Mean of PG(1, c): tanh(c/2) / (2c), continued to 1/4 at c = 0 by an even
// Taylor series below the switch point. Output in (0, 0.25].
double pg_mean(double c);

// PG posterior from the expected square of the tilted linear form.
PgPosterior pg_tilt(double expected_square);

inline constexpr double kSeriesSwitch = 1e-4;

}  // namespace dpvb::polya_gamma

#endif  // DPVB_POLYA_GAMMA_HPP_
