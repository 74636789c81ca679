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

#ifndef DPVB_BLR_HPP_
#define DPVB_BLR_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dpvb/ce_vb.hpp"
#include "dpvb/mechanisms.hpp"
#include "dpvb/rng.hpp"

namespace dpvb::blr {

// Labeled rows with every input inside the unit L2 ball. The loader scales
// rows down by a single global factor when needed and records it.
class BlrDataset {
 public:
  BlrDataset(Eigen::MatrixXd inputs, Eigen::VectorXd labels,
             double scale_factor = 1.0);

  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dim() const { return inputs_.cols(); }
  double scale_factor() const { return scale_factor_; }
  long reads() const { return reads_; }

  Eigen::VectorXd input(Eigen::Index i) const {
    ++reads_;
    return inputs_.row(i);
  }
  double label(Eigen::Index i) const {
    ++reads_;
    return labels_[i];
  }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd labels_;  // values in {0, 1}
  double scale_factor_;
  mutable long reads_ = 0;
};

struct BlrPosterior {
  Eigen::VectorXd mu;     // d
  Eigen::MatrixXd sigma;  // d x d, symmetric PD
  double a_n = 0.0;
  double b_n = 0.0;

  double expected_alpha() const { return a_n / b_n; }
  Eigen::MatrixXd second_moment() const {
    return sigma + mu * mu.transpose();
  }
};

struct BlrSuffStats {
  Eigen::VectorXd s1;  // (1/S) sum (y - 1/2) x
  Eigen::MatrixXd s2;  // (1/S) sum <xi> x x^T, symmetric
};

// Polya-Gamma weighted moments of a batch against the current <theta theta^T>.
BlrSuffStats e_step(const BlrDataset& data,
                    std::span<const std::size_t> batch,
                    const Eigen::MatrixXd& second_moment,
                    std::size_t nominal_batch);

// (2/N, 1/(2N)).
std::pair<mechanisms::SensitivityBound, mechanisms::SensitivityBound>
blr_sensitivities(double n_effective);

// Gamma hyperposterior of the prior precision.
std::pair<double, double> update_alpha(const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& sigma,
                                       double a0, double b0);

// Monte-Carlo predictive probability sigma(w^T x) under the posterior.
double predict(const Eigen::VectorXd& x, const BlrPosterior& posterior,
               int mc_samples, Rng& rng);

// Mann-Whitney AUC with ties counted one half.
double auc(std::span<const double> scores, std::span<const double> labels);

// Bayesian logistic regression in the VIPS loop: two releases per iteration
// (coordinate-Gaussian s1, Analyze-Gauss + PSD-projected s2).
class BlrModel : public ce_vb::Model {
 public:
  struct Options {
    double a0 = 1.0;
    double b0 = 1.0;
    int mc_samples = 1000;
    double psd_floor = 1e-6;
    std::uint64_t metric_seed = 0;
  };

  // `test` may be null; the metric then scores the training data.
  BlrModel(const BlrDataset& train, const BlrDataset* test, Options options);

  std::size_t dataset_size() const override {
    return static_cast<std::size_t>(train_.size());
  }
  int releases_per_iteration() const override { return 2; }
  mechanisms::BlockStats e_step(std::span<const std::size_t> batch,
                                std::size_t nominal_batch) override;
  void perturb(mechanisms::BlockStats& stats, double multiplier,
               Rng& rng) const override;
  void m_step(const mechanisms::BlockStats& stats, double rho,
              std::size_t nominal_batch) override;
  std::pair<std::string, double> metric() override;

  const BlrPosterior& posterior() const { return posterior_; }

 private:
  const BlrDataset& train_;
  const BlrDataset* test_;
  Options options_;
  BlrPosterior posterior_;
  Eigen::MatrixXd second_moment_;
  // Natural parameters, interpolated across iterations.
  Eigen::VectorXd nat_h_;  // Sigma^-1 mu
  Eigen::MatrixXd nat_p_;  // Sigma^-1
  long metric_calls_ = 0;
};

}  // namespace dpvb::blr

#endif  // DPVB_BLR_HPP_
