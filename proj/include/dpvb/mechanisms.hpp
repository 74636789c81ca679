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

#ifndef DPVB_MECHANISMS_HPP_
#define DPVB_MECHANISMS_HPP_

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dpvb/rng.hpp"

namespace dpvb::mechanisms {

// L2 sensitivity of the statistic it tags.
struct SensitivityBound {
  double value = 0.0;

  void validate() const;
};

// One flat statistic block. Matrix-shaped blocks are stored row-major so
// that the canonical noise draw order (block order, then row-major) is the
// storage order.
struct Block {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  SensitivityBound sensitivity;

  std::size_t size() const { return values.size(); }
  void validate() const;
};

struct BlockStats {
  std::vector<Block> blocks;

  void validate() const;
  bool all_finite(std::string* offending = nullptr) const;
};

// v + N(0, (multiplier * sensitivity)^2 I); draws are sequential in index
// order, so a seed pins the output.
void gaussian_perturb_inplace(std::span<double> v, SensitivityBound sens,
                              double multiplier, Rng& rng);
std::vector<double> gaussian_perturb(std::span<const double> v,
                                     SensitivityBound sens, double multiplier,
                                     Rng& rng);

// Elementwise max(v, 0).
void clip_nonnegative_inplace(std::span<double> v);
std::vector<double> clip_nonnegative(std::span<const double> v);

// Symmetric matrix perturbation: one Gaussian draw per upper-triangle entry
// (diagonal included, row-major order), mirrored to the lower triangle. The
// input must be symmetric within 1e-12 per entry; it is symmetrized before
// the noise is added, and the output is exactly symmetric.
Eigen::MatrixXd analyze_gauss_perturb(const Eigen::MatrixXd& m,
                                      SensitivityBound sens, double multiplier,
                                      Rng& rng);

// Eigendecompose and raise eigenvalues below the floor to the floor.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& m, double floor = 1e-6);

// Concatenated release of m blocks: recovered block i carries i.i.d. noise of
// std sqrt(m) * multiplier * C_i, equivalent to scaling each block down by
// its sensitivity, perturbing the concatenation at sensitivity sqrt(m), and
// scaling back up.
void block_scaled_perturb_inplace(BlockStats& stats, double multiplier,
                                  Rng& rng);

}  // namespace dpvb::mechanisms

#endif  // DPVB_MECHANISMS_HPP_
