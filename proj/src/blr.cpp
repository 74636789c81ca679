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

#include "dpvb/blr.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dpvb/errors.hpp"
#include "dpvb/kernels.hpp"
#include "dpvb/polya_gamma.hpp"

namespace dpvb::blr {

BlrDataset::BlrDataset(Eigen::MatrixXd inputs, Eigen::VectorXd labels,
                       double scale_factor)
    : inputs_(std::move(inputs)), labels_(std::move(labels)),
      scale_factor_(scale_factor) {
  if (inputs_.rows() != labels_.size())
    throw std::domain_error("blr dataset: row/label count mismatch");
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    if (inputs_.row(i).norm() > 1.0 + 1e-9)
      throw std::domain_error("blr dataset: row outside the unit ball");
    if (labels_[i] != 0.0 && labels_[i] != 1.0)
      throw std::domain_error("blr dataset: labels must be 0 or 1");
  }
}

BlrSuffStats e_step(const BlrDataset& data,
                    std::span<const std::size_t> batch,
                    const Eigen::MatrixXd& second_moment,
                    std::size_t nominal_batch) {
  const Eigen::Index d = data.dim();
  if (second_moment.rows() != d || second_moment.cols() != d)
    throw std::domain_error("blr e_step: second moment shape mismatch");
  BlrSuffStats stats;
  stats.s1 = Eigen::VectorXd::Zero(d);
  stats.s2 = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i : batch) {
    const Eigen::VectorXd x = data.input(static_cast<Eigen::Index>(i));
    const double y = data.label(static_cast<Eigen::Index>(i));
    const double tilt_sq = std::max(0.0, x.dot(second_moment * x));
    const double xi = polya_gamma::pg_mean(polya_gamma::pg_tilt(tilt_sq).c);
    stats.s1 += (y - 0.5) * x;
    stats.s2 += xi * (x * x.transpose());
  }
  const double divisor = static_cast<double>(nominal_batch);
  stats.s1 /= divisor;
  stats.s2 /= divisor;
  stats.s2 = 0.5 * (stats.s2 + stats.s2.transpose().eval());
  return stats;
}

std::pair<mechanisms::SensitivityBound, mechanisms::SensitivityBound>
blr_sensitivities(double n_effective) {
  if (!(n_effective > 0.0))
    throw std::domain_error("blr_sensitivities: n must be positive");
  return {{2.0 / n_effective}, {1.0 / (2.0 * n_effective)}};
}

std::pair<double, double> update_alpha(const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& sigma,
                                       double a0, double b0) {
  if (!(a0 > 0.0) || !(b0 > 0.0))
    throw std::domain_error("update_alpha: a0, b0 must be positive");
  const double a_n = a0 + 0.5 * static_cast<double>(mu.size());
  const double b_n = b0 + 0.5 * (mu.squaredNorm() + sigma.trace());
  return {a_n, b_n};
}

double predict(const Eigen::VectorXd& x, const BlrPosterior& posterior,
               int mc_samples, Rng& rng) {
  if (mc_samples < 1)
    throw std::domain_error("predict: mc_samples must be >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(posterior.sigma);
  if (llt.info() != Eigen::Success)
    throw numeric_error("predict: posterior covariance is not PD");
  const Eigen::MatrixXd chol = llt.matrixL();
  const Eigen::Index d = x.size();
  Eigen::VectorXd g(d);
  double total = 0.0;
  for (int s = 0; s < mc_samples; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) g[i] = rng.gaussian();
    const double score = x.dot(posterior.mu + chol * g);
    total += 1.0 / (1.0 + std::exp(-score));
  }
  return total / mc_samples;
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw std::domain_error("auc: need matching non-empty inputs");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Mann-Whitney via midranks.
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           scores[order[j + 1]] == scores[order[i]])
      ++j;
    const double midrank = 0.5 * (i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = midrank;
    i = j + 1;
  }
  double pos = 0.0, rank_sum = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == 1.0) {
      pos += 1.0;
      rank_sum += rank[k];
    } else if (labels[k] != 0.0) {
      throw std::domain_error("auc: labels must be 0 or 1");
    }
  }
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0)
    throw std::domain_error("auc: need both classes");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

BlrModel::BlrModel(const BlrDataset& train, const BlrDataset* test,
                   Options options)
    : train_(train), test_(test), options_(options) {
  const Eigen::Index d = train_.dim();
  posterior_.mu = Eigen::VectorXd::Zero(d);
  posterior_.sigma = Eigen::MatrixXd::Identity(d, d) * (options_.b0 / options_.a0);
  posterior_.a_n = options_.a0;
  posterior_.b_n = options_.b0;
  second_moment_ = posterior_.second_moment();
  const double alpha0 = posterior_.expected_alpha();
  nat_h_ = Eigen::VectorXd::Zero(d);
  nat_p_ = alpha0 * Eigen::MatrixXd::Identity(d, d);
}

mechanisms::BlockStats BlrModel::e_step(std::span<const std::size_t> batch,
                                        std::size_t nominal_batch) {
  const BlrSuffStats stats =
      blr::e_step(train_, batch, second_moment_, nominal_batch);
  const auto [sens1, sens2] =
      blr_sensitivities(static_cast<double>(nominal_batch));
  const Eigen::Index d = train_.dim();

  mechanisms::BlockStats out;
  mechanisms::Block b1;
  b1.name = "s1";
  b1.shape = {static_cast<std::size_t>(d)};
  b1.values.assign(stats.s1.data(), stats.s1.data() + d);
  b1.sensitivity = sens1;
  out.blocks.push_back(std::move(b1));

  mechanisms::Block b2;
  b2.name = "s2";
  b2.shape = {static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  b2.values.resize(static_cast<std::size_t>(d) * d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      b2.values[static_cast<std::size_t>(r) * d + c] = stats.s2(r, c);
  b2.sensitivity = sens2;
  out.blocks.push_back(std::move(b2));
  return out;
}

void BlrModel::perturb(mechanisms::BlockStats& stats, double multiplier,
                       Rng& rng) const {
  mechanisms::gaussian_perturb_inplace(stats.blocks[0].values,
                                       stats.blocks[0].sensitivity,
                                       multiplier, rng);
  const Eigen::Index d = train_.dim();
  Eigen::MatrixXd s2(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      s2(r, c) = stats.blocks[1].values[static_cast<std::size_t>(r) * d + c];
  s2 = mechanisms::analyze_gauss_perturb(s2, stats.blocks[1].sensitivity,
                                         multiplier, rng);
  s2 = mechanisms::project_psd(s2, options_.psd_floor);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      stats.blocks[1].values[static_cast<std::size_t>(r) * d + c] = s2(r, c);
}

void BlrModel::m_step(const mechanisms::BlockStats& stats, double rho,
                      std::size_t /*nominal_batch*/) {
  const Eigen::Index d = train_.dim();
  const double n = static_cast<double>(train_.size());
  Eigen::VectorXd s1(d);
  for (Eigen::Index i = 0; i < d; ++i) s1[i] = stats.blocks[0].values[i];
  Eigen::MatrixXd s2(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      s2(r, c) = stats.blocks[1].values[static_cast<std::size_t>(r) * d + c];

  const double alpha_mean = posterior_.expected_alpha();
  const Eigen::VectorXd h_new = n * s1;
  const Eigen::MatrixXd p_new =
      n * s2 + alpha_mean * Eigen::MatrixXd::Identity(d, d);
  nat_h_ = (1.0 - rho) * nat_h_ + rho * h_new;
  nat_p_ = (1.0 - rho) * nat_p_ + rho * p_new;

  Eigen::LLT<Eigen::MatrixXd> llt(nat_p_);
  if (llt.info() != Eigen::Success)
    throw numeric_error("blr m_step: precision is not positive definite");
  posterior_.sigma = llt.solve(Eigen::MatrixXd::Identity(d, d));
  posterior_.sigma =
      0.5 * (posterior_.sigma + posterior_.sigma.transpose().eval());
  posterior_.mu = llt.solve(nat_h_);
  std::tie(posterior_.a_n, posterior_.b_n) =
      update_alpha(posterior_.mu, posterior_.sigma, options_.a0, options_.b0);
  second_moment_ = posterior_.second_moment();
}

std::pair<std::string, double> BlrModel::metric() {
  const BlrDataset& data = test_ ? *test_ : train_;
  Rng rng = Rng(options_.metric_seed).child("predict",
                                            static_cast<std::uint64_t>(
                                                metric_calls_++));
  // One set of posterior draws scores the whole evaluation set.
  Eigen::LLT<Eigen::MatrixXd> llt(posterior_.sigma);
  if (llt.info() != Eigen::Success)
    throw numeric_error("blr metric: posterior covariance is not PD");
  const Eigen::MatrixXd chol = llt.matrixL();
  const Eigen::Index d = data.dim();
  Eigen::MatrixXd draws(d, options_.mc_samples);
  for (Eigen::Index c = 0; c < draws.cols(); ++c)
    for (Eigen::Index r = 0; r < d; ++r) draws(r, c) = rng.gaussian();
  const Eigen::MatrixXd w_samples =
      (posterior_.mu.replicate(1, options_.mc_samples) + chol * draws);

  std::vector<double> scores(static_cast<std::size_t>(data.size()));
  std::vector<double> labels(static_cast<std::size_t>(data.size()));
  Eigen::VectorXd scores_row(options_.mc_samples);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    scores_row = w_samples.transpose() * data.input(i);
    kernels::sigmoid_vec(
        {scores_row.data(), static_cast<std::size_t>(scores_row.size())},
        {scores_row.data(), static_cast<std::size_t>(scores_row.size())});
    scores[static_cast<std::size_t>(i)] = scores_row.mean();
    labels[static_cast<std::size_t>(i)] = data.label(i);
  }
  return {"auc", auc(scores, labels)};
}

}  // namespace dpvb::blr
