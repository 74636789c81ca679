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

#include "dpvb/mechanisms.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dpvb/errors.hpp"

namespace dpvb::mechanisms {
namespace {

constexpr double kSymmetryTol = 1e-12;

}  // namespace

void SensitivityBound::validate() const {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::domain_error("sensitivity bound must be positive and finite");
}

void Block::validate() const {
  if (values.empty()) throw std::domain_error("block '" + name + "' is empty");
  std::size_t expected = 1;
  for (std::size_t d : shape) expected *= d;
  if (shape.empty() || expected != values.size())
    throw std::domain_error("block '" + name + "' shape/length mismatch");
  sensitivity.validate();
}

void BlockStats::validate() const {
  if (blocks.empty()) throw std::domain_error("block stats: no blocks");
  for (const Block& b : blocks) b.validate();
}

bool BlockStats::all_finite(std::string* offending) const {
  for (const Block& b : blocks)
    for (double v : b.values)
      if (!std::isfinite(v)) {
        if (offending) *offending = b.name;
        return false;
      }
  return true;
}

void gaussian_perturb_inplace(std::span<double> v, SensitivityBound sens,
                              double multiplier, Rng& rng) {
  sens.validate();
  if (!(multiplier >= 0.0))
    throw std::domain_error("gaussian perturb: multiplier must be >= 0");
  if (multiplier == 0.0) return;
  const double std_dev = multiplier * sens.value;
  for (double& x : v) x += std_dev * rng.gaussian();
}

std::vector<double> gaussian_perturb(std::span<const double> v,
                                     SensitivityBound sens, double multiplier,
                                     Rng& rng) {
  std::vector<double> out(v.begin(), v.end());
  gaussian_perturb_inplace(out, sens, multiplier, rng);
  return out;
}

void clip_nonnegative_inplace(std::span<double> v) {
  for (double& x : v) x = x < 0.0 ? 0.0 : x;
}

std::vector<double> clip_nonnegative(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  clip_nonnegative_inplace(out);
  return out;
}

Eigen::MatrixXd analyze_gauss_perturb(const Eigen::MatrixXd& m,
                                      SensitivityBound sens, double multiplier,
                                      Rng& rng) {
  sens.validate();
  if (m.rows() != m.cols())
    throw std::domain_error("analyze gauss: matrix must be square");
  const Eigen::Index d = m.rows();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j)
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol)
        throw std::domain_error("analyze gauss: input is not symmetric");

  if (!(multiplier >= 0.0))
    throw std::domain_error("analyze gauss: multiplier must be >= 0");
  const double std_dev = multiplier * sens.value;
  Eigen::MatrixXd out(d, d);
  // Symmetrize, then one draw per upper-triangle entry, mirrored.
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      double sym = 0.5 * (m(i, j) + m(j, i));
      if (multiplier > 0.0) sym += std_dev * rng.gaussian();
      out(i, j) = sym;
      out(j, i) = sym;
    }
  }
  return out;
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m, double floor) {
  if (m.rows() != m.cols())
    throw std::domain_error("project_psd: matrix must be square");
  if (!(floor > 0.0))
    throw std::domain_error("project_psd: floor must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw numeric_error("project_psd: eigendecomposition failed");
  Eigen::VectorXd evals = solver.eigenvalues();
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    evals[i] = std::max(evals[i], floor);
  Eigen::MatrixXd out = solver.eigenvectors() * evals.asDiagonal() *
                        solver.eigenvectors().transpose();
  // Mirror to make symmetry exact after the reconstruction round-off.
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = i + 1; j < out.cols(); ++j) {
      const double sym = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = sym;
      out(j, i) = sym;
    }
  return out;
}

void block_scaled_perturb_inplace(BlockStats& stats, double multiplier,
                                  Rng& rng) {
  stats.validate();
  if (!(multiplier >= 0.0))
    throw std::domain_error("block perturb: multiplier must be >= 0");
  if (multiplier == 0.0) return;
  const double root_m = std::sqrt(static_cast<double>(stats.blocks.size()));
  for (Block& block : stats.blocks) {
    const double std_dev = root_m * multiplier * block.sensitivity.value;
    for (double& x : block.values) x += std_dev * rng.gaussian();
  }
}

}  // namespace dpvb::mechanisms
