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

#include "dpvb/ce_vb.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "dpvb/errors.hpp"
#include "dpvb/kernels.hpp"

namespace dpvb::ce_vb {

double step_size(long t, const StepSchedule& schedule) {
  if (t < 1) throw std::domain_error("step_size: t must be >= 1");
  if (schedule.kappa == 0.0) return 1.0;
  if (!(schedule.tau0 >= 0.0) || !(schedule.kappa > 0.5) ||
      !(schedule.kappa <= 1.0))
    throw std::domain_error(
        "step_size: need tau0 >= 0 and kappa in (0.5, 1] (or 0 for batch)");
  return std::pow(schedule.tau0 + static_cast<double>(t), -schedule.kappa);
}

std::vector<std::size_t> poisson_subsample(std::size_t n, double rate,
                                           Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0))
    throw std::domain_error("poisson_subsample: rate must be in [0, 1]");
  std::vector<std::size_t> out;
  if (rate == 0.0) return out;
  for (std::size_t i = 0; i < n; ++i)
    if (rate == 1.0 || rng.uniform() < rate) out.push_back(i);
  return out;
}

std::vector<std::size_t> fixed_subsample(std::size_t n, std::size_t s,
                                         Rng& rng) {
  if (s > n) throw std::domain_error("fixed_subsample: s must be <= n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(s);
  return pool;
}

std::vector<double> interpolate_naturals(std::span<const double> prev,
                                         std::span<const double> next,
                                         double rho) {
  if (prev.size() != next.size())
    throw std::domain_error("interpolate_naturals: length mismatch");
  std::vector<double> out(prev.size());
  kernels::lerp(prev, next, rho, out);
  return out;
}

void TrainTrace::write_csv(std::ostream& os, bool include_timing) const {
  os << "iter,examples_seen,epsilon,metric,value,elapsed_ms\n";
  for (const TraceRow& row : rows) {
    char buf[64];
    os << row.iter << ',' << row.examples_seen << ',';
    std::snprintf(buf, sizeof(buf), "%.12g", row.epsilon);
    os << buf << ',' << row.metric << ',';
    std::snprintf(buf, sizeof(buf), "%.12g", row.value);
    os << buf << ',' << (include_timing ? row.elapsed_ms : 0) << '\n';
  }
}

RunResult run_vips(Model& model, const VipsConfig& config) {
  const std::size_t n = model.dataset_size();
  if (n == 0) throw std::domain_error("run_vips: empty dataset");
  const std::size_t batch_size =
      config.minibatch_size == 0 ? n : config.minibatch_size;
  if (batch_size > n)
    throw std::domain_error("run_vips: minibatch size exceeds dataset");
  if (config.max_iters < 1)
    throw std::domain_error("run_vips: max_iters must be >= 1");
  if (!(config.noise_multiplier >= 0.0))
    throw std::domain_error("run_vips: noise multiplier must be >= 0");
  const double z = config.noise_multiplier;
  const bool priv = z > 0.0;
  // The ledger always uses Poisson semantics with nu = S/N, in both sampler
  // modes.
  const double nu = static_cast<double>(batch_size) / static_cast<double>(n);
  const accountant::MechanismSpec spec{z, nu};

  Rng root(config.seed);
  Rng sampling = root.child("sampling");
  Rng noise = root.child("noise");

  RunResult result{TrainTrace{}, accountant::PrivacyLedger(config.lambda_grid)};
  if (priv && model.setup_releases() > 0) {
    model.setup(z, noise);
    result.ledger.record_releases(spec, model.setup_releases());
  }

  const auto start = std::chrono::steady_clock::now();
  long examples_seen = 0;
  std::string bad_block;
  for (long t = 1; t <= config.max_iters; ++t) {
    const std::vector<std::size_t> batch =
        config.sampler_mode == SamplerMode::kFixed
            ? fixed_subsample(n, batch_size, sampling)
            : poisson_subsample(n, nu, sampling);
    examples_seen += static_cast<long>(batch.size());

    mechanisms::BlockStats stats = model.e_step(batch, batch_size);
    if (!stats.all_finite(&bad_block))
      throw numeric_error("run_vips: non-finite statistics in block '" +
                          bad_block + "' at iteration " + std::to_string(t));
    if (priv) {
      model.perturb(stats, z, noise);
      result.ledger.record_releases(spec, model.releases_per_iteration());
    }
    if (!batch.empty())
      model.m_step(stats, step_size(t, config.schedule), batch_size);

    const double epsilon =
        priv ? accountant::epsilon_for_delta(result.ledger.composed(),
                                             config.delta_target)
             : 0.0;
    auto [name, value] = model.metric();
    const long elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    result.trace.rows.push_back(
        {t, examples_seen, epsilon, std::move(name), value, elapsed});
    result.final_epsilon = epsilon;
  }
  return result;
}

}  // namespace dpvb::ce_vb
