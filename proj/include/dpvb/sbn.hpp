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

#ifndef DPVB_SBN_HPP_
#define DPVB_SBN_HPP_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dpvb/ce_vb.hpp"
#include "dpvb/mechanisms.hpp"
#include "dpvb/rng.hpp"

namespace dpvb::sbn {

// N x J binary observations behind a read-counting accessor.
class SbnData {
 public:
  explicit SbnData(Eigen::MatrixXd observations);

  Eigen::Index size() const { return y_.rows(); }
  Eigen::Index visible() const { return y_.cols(); }
  Eigen::VectorXd row(Eigen::Index i) const {
    ++reads_;
    return y_.row(i);
  }
  long reads() const { return reads_; }

 private:
  Eigen::MatrixXd y_;
  mutable long reads_ = 0;
};

// Mean-field posterior: a Gaussian per weight row, Gaussians for both bias
// vectors, and TPBN shrinkage expectations per weight entry.
struct SbnPosterior {
  std::vector<Eigen::VectorXd> w_mu;     // J vectors of length K
  std::vector<Eigen::MatrixXd> w_sigma;  // J matrices K x K
  Eigen::VectorXd b_mu;                  // K
  Eigen::MatrixXd b_sigma;               // K x K
  Eigen::VectorXd c_mu;                  // J
  Eigen::MatrixXd c_sigma;               // J x J
  Eigen::MatrixXd zeta_inv;              // J x K, <zeta^-1>
  Eigen::MatrixXd zeta_mean;             // J x K, <zeta>
  Eigen::MatrixXd xi_shrink;             // J x K, <xi_shrink>
  Eigen::VectorXd phi;                   // K, <phi_k>
  double omega = 1.0;                    // <omega>

  Eigen::Index hidden() const { return b_mu.size(); }
  Eigen::Index visible() const { return c_mu.size(); }
  // J x K matrix of weight means.
  Eigen::MatrixXd w_mean_matrix() const;
  // <w_j w_j^T>.
  Eigen::MatrixXd w_second(Eigen::Index j) const {
    return w_sigma[j] + w_mu[j] * w_mu[j].transpose();
  }
};

SbnPosterior initial_posterior(Eigen::Index j_count, Eigen::Index k_count,
                               double nu_b, double nu_c, std::uint64_t seed);

struct SbnSuffStats {
  Eigen::VectorXd s1;                 // K: mean <z> - 1/2
  Eigen::VectorXd s2;                 // K: <xi1>
  Eigen::VectorXd s3;                 // J: mean y - 1/2
  Eigen::VectorXd s4;                 // J: mean <xi0>
  Eigen::MatrixXd s5;                 // J x K: mean <xi0> <z>^T
  Eigen::MatrixXd s6;                 // K x J: mean <z> (y - 1/2)^T
  std::vector<Eigen::MatrixXd> s7;    // J of K x K: mean <xi0_j> <z z^T>
};

// PG means of the per-hidden-unit augmentation, tilted by <b_k^2>.
Eigen::VectorXd xi1_means(const SbnPosterior& posterior);

// PG means of the per-pixel augmentation, tilted by <(w_j^T z + c_j)^2>
// under the given Bernoulli z means.
Eigen::MatrixXd xi0_means(const Eigen::MatrixXd& y_batch,
                          const SbnPosterior& posterior,
                          const Eigen::MatrixXd& z_means);

// Coordinate-ascent sweeps over the hidden units, k = 1..K in order,
// starting from z_init. Outputs strictly inside (0, 1).
Eigen::MatrixXd e_step_z(const Eigen::MatrixXd& y_batch,
                         const SbnPosterior& posterior,
                         const Eigen::MatrixXd& xi0, int sweeps,
                         const Eigen::MatrixXd& z_init);

// Batch-averaged seven-block statistics; divides by nominal_batch.
SbnSuffStats suff_stats(const Eigen::MatrixXd& y_batch,
                        const Eigen::MatrixXd& z_means,
                        const Eigen::MatrixXd& xi0,
                        const Eigen::VectorXd& xi1,
                        std::size_t nominal_batch);

// The seven per-block L2 sensitivity bounds C1..C7.
std::array<mechanisms::SensitivityBound, 7> sbn_sensitivities(
    Eigen::Index j_count, Eigen::Index k_count, double n_effective);

// Mean and inverse-moment of GIG(0, a, b) by log-spaced Simpson quadrature
// over [1e-12, 1e6], validated against the Bessel-function identity.
std::pair<double, double> gig_moments(double a, double b);

// TPBN shrinkage chain in the fixed order zeta, xi, phi, omega.
void update_tpbn(SbnPosterior& posterior);

// Pixel-wise reconstruction accuracy against held-out images: infer z means,
// reconstruct sigmoid probabilities, threshold, and compare.
double reconstruct_predict(const SbnData& test, const SbnPosterior& posterior,
                           int sweeps, double threshold = 0.5);

// Sigmoid belief network in the VIPS loop. Mini-batch mode releases the
// sqrt(7)-scaled concatenation once per iteration; batch mode perturbs the
// data-only block s3 once up front (one extra ledger release) and releases
// the remaining six blocks per iteration.
class SbnModel : public ce_vb::Model {
 public:
  struct Options {
    int hidden = 4;
    double nu_b = 10.0;
    double nu_c = 10.0;
    int sweeps = 3;
    double psd_floor = 1e-6;
    bool batch_mode = false;
    std::uint64_t init_seed = 0;
  };

  SbnModel(const SbnData& train, const SbnData* test, Options options);

  std::size_t dataset_size() const override {
    return static_cast<std::size_t>(train_.size());
  }
  int releases_per_iteration() const override { return 1; }
  int setup_releases() const override { return options_.batch_mode ? 1 : 0; }
  void setup(double multiplier, Rng& rng) override;
  mechanisms::BlockStats e_step(std::span<const std::size_t> batch,
                                std::size_t nominal_batch) override;
  void perturb(mechanisms::BlockStats& stats, double multiplier,
               Rng& rng) const override;
  void m_step(const mechanisms::BlockStats& stats, double rho,
              std::size_t nominal_batch) override;
  std::pair<std::string, double> metric() override;

  const SbnPosterior& posterior() const { return posterior_; }

 private:
  const SbnData& train_;
  const SbnData* test_;
  Options options_;
  SbnPosterior posterior_;
  Eigen::VectorXd s3_batchmode_;  // held fixed across batch-mode iterations

  // Interpolated natural parameters.
  std::vector<Eigen::MatrixXd> nat_p_w_;
  std::vector<Eigen::VectorXd> nat_h_w_;
  Eigen::VectorXd nat_p_b_, nat_h_b_;  // diagonal precision
  Eigen::VectorXd nat_p_c_, nat_h_c_;
};

}  // namespace dpvb::sbn

#endif  // DPVB_SBN_HPP_
