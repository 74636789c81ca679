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

#ifndef DPVB_CE_VB_HPP_
#define DPVB_CE_VB_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpvb/accountant.hpp"
#include "dpvb/mechanisms.hpp"
#include "dpvb/rng.hpp"

namespace dpvb::ce_vb {

// Robbins-Monro step sizes rho_t = (tau0 + t)^(-kappa). kappa = 0 yields the
// constant schedule rho = 1 used by exact batch VB.
struct StepSchedule {
  double tau0 = 1024.0;
  double kappa = 0.7;
};

double step_size(long t, const StepSchedule& schedule);

enum class SamplerMode { kFixed, kPoisson };

struct VipsConfig {
  std::size_t minibatch_size = 0;  // 0 means the full dataset
  long max_iters = 1;
  double noise_multiplier = 0.0;  // 0 = non-private
  double delta_target = 1e-5;
  std::uint64_t seed = 0;
  StepSchedule schedule;
  SamplerMode sampler_mode = SamplerMode::kFixed;
  std::vector<int> lambda_grid = accountant::default_lambda_grid();
};

struct TraceRow {
  long iter = 0;
  long examples_seen = 0;
  double epsilon = 0.0;
  std::string metric;
  double value = 0.0;
  long elapsed_ms = 0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;

  // Column layout: iter,examples_seen,epsilon,metric,value,elapsed_ms.
  // Timing is zeroed unless requested, so a seed reproduces the file
  // byte for byte.
  void write_csv(std::ostream& os, bool include_timing = false) const;
};

// What a model plugs into the private loop. The E-step is the only place a
// model may read its data; the M-step sees nothing but (perturbed) expected
// sufficient statistics.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::size_t dataset_size() const = 0;
  virtual int releases_per_iteration() const = 0;

  // Expected sufficient statistics of the batch with per-block sensitivity
  // bounds. Averages divide by the nominal batch size (the sensitivity
  // divisor), not the realized one, so Poisson batches of any size release
  // statistics with the same calibration. An empty batch yields zero-valued
  // blocks of the correct shapes.
  virtual mechanisms::BlockStats e_step(std::span<const std::size_t> batch,
                                        std::size_t nominal_batch) = 0;

  // Model-specific perturbation of the E-step output.
  virtual void perturb(mechanisms::BlockStats& stats, double multiplier,
                       Rng& rng) const = 0;

  virtual void m_step(const mechanisms::BlockStats& stats, double rho,
                      std::size_t nominal_batch) = 0;

  virtual std::pair<std::string, double> metric() = 0;

  // One-off releases before the loop (e.g. a data-only statistic perturbed
  // once in batch mode). Default: none.
  virtual int setup_releases() const { return 0; }
  virtual void setup(double /*multiplier*/, Rng& /*rng*/) {}
};

// Each index kept independently with the given probability.
std::vector<std::size_t> poisson_subsample(std::size_t n, double rate,
                                           Rng& rng);

// Fixed-size sample without replacement (partial Fisher-Yates).
std::vector<std::size_t> fixed_subsample(std::size_t n, std::size_t s,
                                         Rng& rng);

// Elementwise (1 - rho) * prev + rho * next.
std::vector<double> interpolate_naturals(std::span<const double> prev,
                                         std::span<const double> next,
                                         double rho);

struct RunResult {
  TrainTrace trace;
  accountant::PrivacyLedger ledger;
  double final_epsilon = 0.0;
};

RunResult run_vips(Model& model, const VipsConfig& config);

}  // namespace dpvb::ce_vb

#endif  // DPVB_CE_VB_HPP_
