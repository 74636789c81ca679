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

#include "dpvb/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dpvb/errors.hpp"
#include "dpvb/kernels.hpp"

namespace dpvb::accountant {
namespace {

constexpr double kQuadratureTol = 1e-10;  // absolute, in the log
constexpr int kInitialIntervals = 4096;
constexpr int kMaxRefinements = 12;
constexpr double kCalibrationLow = 0.3;
constexpr double kCalibrationHigh = 64.0;
constexpr double kCalibrationRelTol = 1e-3;

// log((1 - nu) + nu * e^t), the log likelihood ratio of the mixture to the
// null density at log(beta1/beta0) = t.
double mixture_log_ratio(double t, double nu) {
  if (nu == 1.0) return t;
  if (t > 0.0) return t + std::log(nu + (1.0 - nu) * std::exp(-t));
  return std::log1p(nu * std::expm1(t));
}

struct QuadratureLevel {
  std::vector<double> base;  // log beta0 + log simpson weight, per node
  std::vector<double> ratio; // r(x) per node
  double log_h_third;        // log(h/3)
};

QuadratureLevel build_level(double lo, double hi, int intervals, double z,
                            double nu) {
  QuadratureLevel level;
  const int n = intervals;
  const double h = (hi - lo) / n;
  const double log_norm =
      -std::log(z * std::sqrt(2.0 * std::numbers::pi));
  level.base.resize(n + 1);
  level.ratio.resize(n + 1);
  const double log4 = std::log(4.0);
  const double log2 = std::log(2.0);
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    const double logw =
        (i == 0 || i == n) ? 0.0 : (i % 2 == 1 ? log4 : log2);
    level.base[i] = -x * x / (2.0 * z * z) + log_norm + logw;
    level.ratio[i] = mixture_log_ratio((2.0 * x - 1.0) / (2.0 * z * z), nu);
  }
  level.log_h_third = std::log(h / 3.0);
  return level;
}

// log of the Simpson sum of exp(base + scale * ratio).
double log_integral(const QuadratureLevel& level, double scale,
                    std::vector<double>& scratch) {
  const std::size_t n = level.base.size();
  scratch.resize(n);
  std::copy(level.base.begin(), level.base.end(), scratch.begin());
  kernels::axpy(scale, level.ratio, scratch);
  return kernels::log_sum_exp(scratch) + level.log_h_third;
}

std::vector<double> curve_values(const MechanismSpec& spec,
                                 const std::vector<int>& grid) {
  spec.validate();
  const double nu = spec.sampling_rate;
  const double z = spec.noise_multiplier;
  std::vector<double> alpha(grid.size(), 0.0);
  if (nu == 0.0) return alpha;  // beta == beta0, the loss is identically 1

  const int lambda_max = *std::max_element(grid.begin(), grid.end());
  // Both integrands are Gaussian-tailed; E2's far mode sits near x =
  // lambda + 1 and E1's mirror image near -lambda at full sampling, so the
  // domain extends past both by a 12-sigma margin.
  const double ext = lambda_max + 1 + 12.0 * z + 6.0;

  std::vector<double> prev1, prev2;
  std::vector<double> cur1(grid.size()), cur2(grid.size());
  std::vector<double> scratch;
  int intervals = kInitialIntervals;
  for (int pass = 0; pass < kMaxRefinements; ++pass) {
    const QuadratureLevel level = build_level(-ext, ext, intervals, z, nu);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double lambda = grid[i];
      cur1[i] = log_integral(level, -lambda, scratch);
      cur2[i] = log_integral(level, lambda + 1.0, scratch);
    }
    if (!prev1.empty()) {
      double diff = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        diff = std::max(diff, std::abs(cur1[i] - prev1[i]));
        diff = std::max(diff, std::abs(cur2[i] - prev2[i]));
      }
      if (diff < kQuadratureTol) {
        for (std::size_t i = 0; i < grid.size(); ++i)
          alpha[i] = std::max({cur1[i], cur2[i], 0.0});
        return alpha;
      }
    }
    prev1 = cur1;
    prev2 = cur2;
    intervals *= 2;
  }
  throw numeric_error(
      "subsampled Gaussian log-moment quadrature did not converge (z=" +
      std::to_string(z) + ", nu=" + std::to_string(nu) + ")");
}

}  // namespace

void LogMomentCurve::validate() const {
  if (lambda_grid.size() != alpha_values.size())
    throw std::domain_error("log-moment curve: grid/value length mismatch");
  if (lambda_grid.empty())
    throw std::domain_error("log-moment curve: empty grid");
  int prev = 0;
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (lambda_grid[i] < 1 || lambda_grid[i] <= prev)
      throw std::domain_error(
          "log-moment curve: grid must be strictly increasing and >= 1");
    prev = lambda_grid[i];
    if (!(alpha_values[i] >= 0.0))
      throw std::domain_error("log-moment curve: negative log moment");
  }
}

void MechanismSpec::validate() const {
  if (!(noise_multiplier > 0.0) || !std::isfinite(noise_multiplier))
    throw std::domain_error("mechanism: noise multiplier must be positive");
  if (!(sampling_rate >= 0.0 && sampling_rate <= 1.0))
    throw std::domain_error("mechanism: sampling rate must be in [0, 1]");
}

std::vector<int> default_lambda_grid() {
  std::vector<int> grid(64);
  for (int i = 0; i < 64; ++i) grid[i] = i + 1;
  return grid;
}

double gaussian_log_moment(int lambda, double noise_multiplier) {
  if (!(noise_multiplier > 0.0))
    throw std::domain_error("gaussian_log_moment: multiplier must be positive");
  if (lambda < 0)
    throw std::domain_error("gaussian_log_moment: lambda must be >= 0");
  const double l = lambda;
  return l * (l + 1.0) / (2.0 * noise_multiplier * noise_multiplier);
}

double subsampled_gaussian_log_moment(int lambda, const MechanismSpec& spec) {
  if (lambda < 1)
    throw std::domain_error("subsampled log moment: lambda must be >= 1");
  return curve_values(spec, {lambda})[0];
}

LogMomentCurve mechanism_curve(const MechanismSpec& spec,
                               const std::vector<int>& grid) {
  LogMomentCurve curve{grid, curve_values(spec, grid)};
  curve.validate();
  return curve;
}

PrivacyLedger::PrivacyLedger(std::vector<int> grid)
    : grid_(std::move(grid)) {}

void PrivacyLedger::record_release(const MechanismSpec& spec) {
  record_releases(spec, 1);
}

void PrivacyLedger::record_releases(const MechanismSpec& spec, long count) {
  if (count <= 0) throw std::domain_error("ledger: count must be positive");
  for (Entry& entry : entries_) {
    if (entry.spec == spec) {
      entry.count += count;
      return;
    }
  }
  entries_.push_back({spec, mechanism_curve(spec, grid_), count});
}

LogMomentCurve PrivacyLedger::composed() const {
  LogMomentCurve out{grid_, std::vector<double>(grid_.size(), 0.0)};
  for (const Entry& entry : entries_)
    for (std::size_t i = 0; i < grid_.size(); ++i)
      out.alpha_values[i] +=
          static_cast<double>(entry.count) * entry.curve.alpha_values[i];
  return out;
}

long PrivacyLedger::releases() const {
  long total = 0;
  for (const Entry& entry : entries_) total += entry.count;
  return total;
}

double epsilon_for_delta(const LogMomentCurve& curve, double delta) {
  curve.validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("epsilon_for_delta: delta must be in (0, 1)");
  const double log_delta = std::log(delta);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.lambda_grid.size(); ++i)
    best = std::min(best, (curve.alpha_values[i] - log_delta) /
                              curve.lambda_grid[i]);
  return best;
}

double delta_for_epsilon(const LogMomentCurve& curve, double epsilon) {
  curve.validate();
  if (!(epsilon > 0.0))
    throw std::domain_error("delta_for_epsilon: epsilon must be positive");
  double best_log = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.lambda_grid.size(); ++i)
    best_log = std::min(best_log, curve.alpha_values[i] -
                                      curve.lambda_grid[i] * epsilon);
  return std::min(1.0, std::exp(best_log));
}

PrivacyParams strong_composition(double eps_step, double delta_step,
                                 long steps, double delta_slack) {
  if (!(eps_step > 0.0))
    throw std::domain_error("strong_composition: eps_step must be positive");
  if (delta_step < 0.0)
    throw std::domain_error("strong_composition: delta_step must be >= 0");
  if (steps < 1)
    throw std::domain_error("strong_composition: steps must be >= 1");
  if (!(delta_slack > 0.0 && delta_slack < 1.0))
    throw std::domain_error("strong_composition: slack must be in (0, 1)");
  const double j = static_cast<double>(steps);
  const double eps = j * eps_step * std::expm1(eps_step) +
                     std::sqrt(2.0 * j * std::log(1.0 / delta_slack)) *
                         eps_step;
  return {eps, delta_slack + j * delta_step};
}

PrivacyParams linear_composition(double eps_step, double delta_step,
                                 long steps) {
  if (!(eps_step > 0.0))
    throw std::domain_error("linear_composition: eps_step must be positive");
  if (delta_step < 0.0)
    throw std::domain_error("linear_composition: delta_step must be >= 0");
  if (steps < 1)
    throw std::domain_error("linear_composition: steps must be >= 1");
  const double j = static_cast<double>(steps);
  return {j * eps_step, j * delta_step};
}

double classic_gaussian_sigma(double epsilon, double delta,
                              double sensitivity) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::domain_error("classic sigma: epsilon must be in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::domain_error("classic sigma: delta must be in (0, 1)");
  if (!(sensitivity > 0.0))
    throw std::domain_error("classic sigma: sensitivity must be positive");
  return std::sqrt(2.0 * std::log(1.25 / delta)) * sensitivity / epsilon;
}

double per_release_epsilon(const MechanismSpec& spec, double delta_step,
                           const std::vector<int>& grid) {
  return epsilon_for_delta(mechanism_curve(spec, grid), delta_step);
}

PrivacyParams baseline_step_params(const MechanismSpec& spec,
                                   double delta_step) {
  spec.validate();
  if (!(delta_step > 0.0 && delta_step < 1.0))
    throw std::domain_error("baseline step: delta_step must be in (0, 1)");
  const double nu = spec.sampling_rate;
  if (nu == 0.0) return {0.0, delta_step};
  // Classic calibration of the unsubsampled release at the pre-amplification
  // slack, then the subsampling amplification lemma.
  const double delta_gauss = std::min(0.5, delta_step / nu);
  const double eps_gauss =
      std::sqrt(2.0 * std::log(1.25 / delta_gauss)) / spec.noise_multiplier;
  const double eps_step =
      nu == 1.0 ? eps_gauss : std::log1p(nu * std::expm1(eps_gauss));
  return {eps_step, delta_step};
}

double calibrate_noise_multiplier(double sampling_rate, long steps,
                                  int releases_per_step, PrivacyParams target,
                                  const std::vector<int>& grid) {
  if (!(target.epsilon > 0.0))
    throw std::domain_error("calibrate: target epsilon must be positive");
  if (!(target.delta > 0.0 && target.delta < 1.0))
    throw std::domain_error("calibrate: target delta must be in (0, 1)");
  if (steps < 1 || releases_per_step < 1)
    throw std::domain_error("calibrate: steps and releases must be >= 1");

  const long total = steps * releases_per_step;
  const auto epsilon_at = [&](double z) {
    PrivacyLedger ledger(grid);
    ledger.record_releases({z, sampling_rate}, total);
    return epsilon_for_delta(ledger.composed(), target.delta);
  };

  double lo = kCalibrationLow;
  double hi = kCalibrationHigh;
  if (epsilon_at(lo) <= target.epsilon) return lo;
  if (epsilon_at(hi) > target.epsilon)
    throw calibration_error(
        "target epsilon infeasible within multiplier bracket [0.3, 64]");
  while (hi - lo > kCalibrationRelTol * lo) {
    const double mid = 0.5 * (lo + hi);
    if (epsilon_at(mid) <= target.epsilon)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace dpvb::accountant
