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

#ifndef DPVB_ACCOUNTANT_HPP_
#define DPVB_ACCOUNTANT_HPP_

#include <cstdint>
#include <vector>

namespace dpvb::accountant {

// Log moment function alpha(lambda) sampled on an integer grid of moment
// orders. The unit of composition in the privacy ledger.
struct LogMomentCurve {
  std::vector<int> lambda_grid;     // strictly increasing, all >= 1
  std::vector<double> alpha_values; // same length, all >= 0, in nats

  void validate() const;
};

// A (possibly subsampled) Gaussian release, described by the dimensionless
// noise multiplier z = (noise std)/(L2 sensitivity) and the probability that
// each record enters the mini-batch.
struct MechanismSpec {
  double noise_multiplier = 0.0;
  double sampling_rate = 1.0;

  void validate() const;
  friend bool operator==(const MechanismSpec&, const MechanismSpec&) = default;
};

struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
};

std::vector<int> default_lambda_grid();  // integers 1..64

// Closed-form log moment of the full-batch Gaussian mechanism,
// lambda*(lambda+1) / (2 z^2). Accepts lambda = 0 (returns 0).
double gaussian_log_moment(int lambda, double noise_multiplier);

// Log moment of the subsampled Gaussian mechanism at one order, via
// deterministic composite-Simpson quadrature on log-densities.
double subsampled_gaussian_log_moment(int lambda, const MechanismSpec& spec);

// Whole curve in one pass; the quadrature nodes are shared across orders.
LogMomentCurve mechanism_curve(const MechanismSpec& spec,
                               const std::vector<int>& grid);

// Accumulates composed log moments over recorded releases. Identical specs
// are grouped so that k releases compose as exactly k times one curve.
class PrivacyLedger {
 public:
  explicit PrivacyLedger(std::vector<int> grid = default_lambda_grid());

  void record_release(const MechanismSpec& spec);
  void record_releases(const MechanismSpec& spec, long count);

  LogMomentCurve composed() const;
  long releases() const;
  const std::vector<int>& grid() const { return grid_; }

 private:
  struct Entry {
    MechanismSpec spec;
    LogMomentCurve curve;
    long count;
  };
  std::vector<int> grid_;
  std::vector<Entry> entries_;
};

// min over the grid of (alpha(lambda) - ln delta) / lambda.
double epsilon_for_delta(const LogMomentCurve& curve, double delta);

// min over the grid of exp(alpha(lambda) - lambda * epsilon), clamped to 1.
double delta_for_epsilon(const LogMomentCurve& curve, double epsilon);

// Advanced composition of J identical (eps', delta') releases with slack
// delta'': (J eps'(e^eps' - 1) + sqrt(2 J ln(1/delta'')) eps', delta'' + J delta').
PrivacyParams strong_composition(double eps_step, double delta_step,
                                 long steps, double delta_slack);

PrivacyParams linear_composition(double eps_step, double delta_step,
                                 long steps);

// Smallest sigma with sigma^2 = 2 ln(1.25/delta) sensitivity^2 / epsilon^2.
// Valid for epsilon <= 1.
double classic_gaussian_sigma(double epsilon, double delta,
                              double sensitivity);

// Epsilon of a single release at delta_step, from the mechanism's own curve.
double per_release_epsilon(const MechanismSpec& spec, double delta_step,
                           const std::vector<int>& grid = default_lambda_grid());

// Per-step (eps', delta') for the strong/linear composition baselines:
// classic Gaussian calibration at the pre-amplification slack
// delta_step / sampling_rate, then privacy amplification by subsampling,
// eps' = ln(1 + nu (e^eps_gauss - 1)).
PrivacyParams baseline_step_params(const MechanismSpec& spec,
                                   double delta_step);

// Smallest multiplier z in [0.3, 64] (to bisection tolerance) such that
// steps * releases_per_step composed subsampled-Gaussian releases stay within
// target.epsilon at target.delta.
double calibrate_noise_multiplier(double sampling_rate, long steps,
                                  int releases_per_step, PrivacyParams target,
                                  const std::vector<int>& grid =
                                      default_lambda_grid());

}  // namespace dpvb::accountant

#endif  // DPVB_ACCOUNTANT_HPP_
