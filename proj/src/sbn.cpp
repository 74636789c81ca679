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

#include "dpvb/sbn.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

#include "dpvb/errors.hpp"
#include "dpvb/kernels.hpp"
#include "dpvb/polya_gamma.hpp"

namespace dpvb::sbn {
namespace {

// GIG quadrature domain (in x) and guards keeping the mass inside it.
constexpr double kGigDomainLow = 1e-12;
constexpr double kGigDomainHigh = 1e6;
constexpr double kGigMinA = 2e-5;
constexpr double kGigMinB = 1e-10;
constexpr double kGigTol = 1e-10;
// exp(-120) underflows any moment integrand contribution to ~1e-53.
constexpr double kGigCutoff = 240.0;

// <z z^T> under the mean field: diagonal <z>, off-diagonal <z><z>^T.
Eigen::MatrixXd z_second_moment(const Eigen::VectorXd& z) {
  Eigen::MatrixXd m = z * z.transpose();
  m.diagonal() = z;
  return m;
}

}  // namespace

SbnData::SbnData(Eigen::MatrixXd observations) : y_(std::move(observations)) {
  for (Eigen::Index i = 0; i < y_.rows(); ++i)
    for (Eigen::Index j = 0; j < y_.cols(); ++j)
      if (y_(i, j) != 0.0 && y_(i, j) != 1.0)
        throw std::domain_error("sbn data: observations must be 0/1");
}

Eigen::MatrixXd SbnPosterior::w_mean_matrix() const {
  Eigen::MatrixXd w(visible(), hidden());
  for (Eigen::Index j = 0; j < visible(); ++j) w.row(j) = w_mu[j];
  return w;
}

SbnPosterior initial_posterior(Eigen::Index j_count, Eigen::Index k_count,
                               double nu_b, double nu_c, std::uint64_t seed) {
  SbnPosterior post;
  Rng init = Rng(seed).child("init");
  post.w_mu.resize(j_count);
  post.w_sigma.resize(j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    post.w_mu[j] = Eigen::VectorXd::Zero(k_count);
    // Break the mean-field symmetry with a random offset. The spread matters:
    // too small and distinct hidden units lock onto the same feature.
    for (Eigen::Index k = 0; k < k_count; ++k)
      post.w_mu[j][k] = 0.5 * init.gaussian();
    post.w_sigma[j] = Eigen::MatrixXd::Identity(k_count, k_count);
  }
  post.b_mu = Eigen::VectorXd::Zero(k_count);
  post.b_sigma = nu_b * Eigen::MatrixXd::Identity(k_count, k_count);
  post.c_mu = Eigen::VectorXd::Zero(j_count);
  post.c_sigma = nu_c * Eigen::MatrixXd::Identity(j_count, j_count);
  post.zeta_inv = Eigen::MatrixXd::Ones(j_count, k_count);
  post.zeta_mean = Eigen::MatrixXd::Ones(j_count, k_count);
  post.xi_shrink = Eigen::MatrixXd::Ones(j_count, k_count);
  post.phi = Eigen::VectorXd::Ones(k_count);
  post.omega = 1.0;
  return post;
}

Eigen::VectorXd xi1_means(const SbnPosterior& posterior) {
  const Eigen::Index k_count = posterior.hidden();
  Eigen::VectorXd tilt(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k)
    tilt[k] = std::sqrt(std::max(
        0.0, posterior.b_mu[k] * posterior.b_mu[k] + posterior.b_sigma(k, k)));
  Eigen::VectorXd out(k_count);
  kernels::pg_mean_vec({tilt.data(), static_cast<std::size_t>(k_count)},
                       {out.data(), static_cast<std::size_t>(k_count)});
  return out;
}

Eigen::MatrixXd xi0_means(const Eigen::MatrixXd& y_batch,
                          const SbnPosterior& posterior,
                          const Eigen::MatrixXd& z_means) {
  const Eigen::Index n = y_batch.rows();
  const Eigen::Index j_count = posterior.visible();
  Eigen::MatrixXd tilt(n, j_count);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd zz = z_second_moment(z_means.row(i));
    for (Eigen::Index j = 0; j < j_count; ++j) {
      const double quad = (posterior.w_second(j).array() * zz.array()).sum();
      const double cross =
          2.0 * posterior.c_mu[j] * posterior.w_mu[j].dot(z_means.row(i));
      const double c2 = posterior.c_mu[j] * posterior.c_mu[j] +
                        posterior.c_sigma(j, j);
      tilt(i, j) = std::sqrt(std::max(0.0, quad + cross + c2));
    }
  }
  Eigen::MatrixXd out(n, j_count);
  kernels::pg_mean_vec({tilt.data(), static_cast<std::size_t>(tilt.size())},
                       {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Eigen::MatrixXd e_step_z(const Eigen::MatrixXd& y_batch,
                         const SbnPosterior& posterior,
                         const Eigen::MatrixXd& xi0, int sweeps,
                         const Eigen::MatrixXd& z_init) {
  if (sweeps < 1) throw std::domain_error("e_step_z: sweeps must be >= 1");
  const Eigen::Index n = y_batch.rows();
  const Eigen::Index j_count = posterior.visible();
  const Eigen::Index k_count = posterior.hidden();
  const Eigen::MatrixXd w_mean = posterior.w_mean_matrix();
  std::vector<Eigen::MatrixXd> w_second(j_count);
  for (Eigen::Index j = 0; j < j_count; ++j)
    w_second[j] = posterior.w_second(j);

  Eigen::MatrixXd z = z_init;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double d = posterior.b_mu[k];
        for (Eigen::Index j = 0; j < j_count; ++j) {
          const double w_jk = w_mean(j, k);
          d += w_jk * y_batch(i, j) - 0.5 * w_jk;
          // <psi^{\k} w_jk>: cross-moments of the other units plus the bias.
          double psi_w = posterior.c_mu[j] * w_jk;
          for (Eigen::Index k2 = 0; k2 < k_count; ++k2)
            if (k2 != k) psi_w += w_second[j](k2, k) * z(i, k2);
          d -= xi0(i, j) * (psi_w + 0.5 * w_second[j](k, k));
        }
        z(i, k) = 1.0 / (1.0 + std::exp(-d));
      }
    }
  }
  return z;
}

SbnSuffStats suff_stats(const Eigen::MatrixXd& y_batch,
                        const Eigen::MatrixXd& z_means,
                        const Eigen::MatrixXd& xi0,
                        const Eigen::VectorXd& xi1,
                        std::size_t nominal_batch) {
  const Eigen::Index n = y_batch.rows();
  const Eigen::Index j_count = y_batch.cols();
  const Eigen::Index k_count = z_means.cols();
  const double divisor = static_cast<double>(nominal_batch);

  SbnSuffStats stats;
  stats.s1 = Eigen::VectorXd::Zero(k_count);
  stats.s2 = xi1;
  stats.s3 = Eigen::VectorXd::Zero(j_count);
  stats.s4 = Eigen::VectorXd::Zero(j_count);
  stats.s5 = Eigen::MatrixXd::Zero(j_count, k_count);
  stats.s6 = Eigen::MatrixXd::Zero(k_count, j_count);
  stats.s7.assign(j_count, Eigen::MatrixXd::Zero(k_count, k_count));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd z = z_means.row(i);
    const Eigen::VectorXd y = y_batch.row(i);
    const Eigen::VectorXd xi = xi0.row(i);
    stats.s1 += z.array().matrix() - Eigen::VectorXd::Constant(k_count, 0.5);
    stats.s3 += y - Eigen::VectorXd::Constant(j_count, 0.5);
    stats.s4 += xi;
    stats.s5 += xi * z.transpose();
    stats.s6 +=
        z * (y - Eigen::VectorXd::Constant(j_count, 0.5)).transpose();
    const Eigen::MatrixXd zz = z_second_moment(z);
    for (Eigen::Index j = 0; j < j_count; ++j) stats.s7[j] += xi[j] * zz;
  }
  stats.s1 /= divisor;
  stats.s3 /= divisor;
  stats.s4 /= divisor;
  stats.s5 /= divisor;
  stats.s6 /= divisor;
  for (auto& g : stats.s7) g /= divisor;
  return stats;
}

std::array<mechanisms::SensitivityBound, 7> sbn_sensitivities(
    Eigen::Index j_count, Eigen::Index k_count, double n_effective) {
  if (j_count < 1 || k_count < 1 || !(n_effective > 0.0))
    throw std::domain_error("sbn_sensitivities: invalid arguments");
  const double j = static_cast<double>(j_count);
  const double k = static_cast<double>(k_count);
  const double n = n_effective;
  return {{{std::sqrt(k) / n},
           {std::sqrt(k) / 4.0},
           {std::sqrt(j) / n},
           {std::sqrt(j) / (4.0 * n)},
           {std::sqrt(j * k) / (4.0 * n)},
           {std::sqrt(j * k) / n},
           {std::sqrt(j) * k / (4.0 * n)}}};
}

std::pair<double, double> gig_moments(double a, double b) {
  if (!(a > 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::domain_error("gig_moments: need a > 0 and b >= 0, finite");
  a = std::max(a, kGigMinA);
  b = std::max(b, kGigMinB);
  // Integrate only where the density carries mass: a e^u / 2 and b e^-u / 2
  // both stay below the underflow cutoff. Always a sub-range of the pinned
  // [1e-12, 1e6] domain.
  double u_lo = std::max(std::log(kGigDomainLow), std::log(b / kGigCutoff));
  double u_hi = std::min(std::log(kGigDomainHigh), std::log(kGigCutoff / a));
  if (u_hi <= u_lo) {
    // Very concentrated density (sqrt(ab) beyond the cutoff): a Gaussian of
    // width (ab)^(-1/4) in log space around the mode.
    const double u_peak = 0.5 * std::log(b / a);
    const double width = std::pow(a * b, -0.25);
    u_lo = std::max(std::log(kGigDomainLow), u_peak - 30.0 * width - 1.0);
    u_hi = std::min(std::log(kGigDomainHigh), u_peak + 30.0 * width + 1.0);
  }

  double prev_mean = 0.0, prev_inv = 0.0;
  int n = 512;
  for (int level = 0; level < 12; ++level) {
    const double h = (u_hi - u_lo) / n;
    std::vector<double> log_base(n + 1), log_mean(n + 1), log_inv(n + 1);
    const double log4 = std::log(4.0), log2 = std::log(2.0);
    for (int i = 0; i <= n; ++i) {
      const double u = u_lo + i * h;
      const double x = std::exp(u);
      const double logw =
          (i == 0 || i == n) ? 0.0 : (i % 2 == 1 ? log4 : log2);
      const double lf = -0.5 * (a * x + b / x) + logw;
      log_base[i] = lf;
      log_mean[i] = lf + u;
      log_inv[i] = lf - u;
    }
    const double lz = kernels::log_sum_exp(log_base);
    const double mean = std::exp(kernels::log_sum_exp(log_mean) - lz);
    const double inv = std::exp(kernels::log_sum_exp(log_inv) - lz);
    if (level > 0 && std::abs(mean - prev_mean) <= kGigTol * mean &&
        std::abs(inv - prev_inv) <= kGigTol * inv)
      return {mean, inv};
    prev_mean = mean;
    prev_inv = inv;
    n *= 2;
  }
  throw numeric_error("gig_moments: quadrature did not converge");
}

void update_tpbn(SbnPosterior& posterior) {
  const Eigen::Index j_count = posterior.visible();
  const Eigen::Index k_count = posterior.hidden();
  // Order fixed by the shrinkage chain: zeta, xi, phi, omega.
  for (Eigen::Index j = 0; j < j_count; ++j) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const double w2 = posterior.w_sigma[j](k, k) +
                        posterior.w_mu[j][k] * posterior.w_mu[j][k];
      const auto [mean, inv] =
          gig_moments(2.0 * posterior.xi_shrink(j, k), w2);
      posterior.zeta_mean(j, k) = mean;
      posterior.zeta_inv(j, k) = inv;
      posterior.xi_shrink(j, k) = 1.0 / mean;  // Gam(1, <zeta>) mean
    }
  }
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double rate = posterior.omega + posterior.xi_shrink.col(k).sum();
    posterior.phi[k] = (0.5 * j_count + 0.5) / rate;
  }
  posterior.omega = (0.5 * k_count + 0.5) / (1.0 + posterior.phi.sum());
}

double reconstruct_predict(const SbnData& test, const SbnPosterior& posterior,
                           int sweeps, double threshold) {
  if (test.size() == 0) throw std::domain_error("reconstruct: empty test set");
  const Eigen::Index j_count = posterior.visible();
  const Eigen::Index k_count = posterior.hidden();
  const Eigen::MatrixXd w_mean = posterior.w_mean_matrix();

  long hits = 0;
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    Eigen::MatrixXd y(1, j_count);
    y.row(0) = test.row(i);
    Eigen::MatrixXd z = Eigen::MatrixXd::Constant(1, k_count, 0.5);
    for (int round = 0; round < 2; ++round) {
      const Eigen::MatrixXd xi0 = xi0_means(y, posterior, z);
      z = e_step_z(y, posterior, xi0, sweeps, z);
    }
    const Eigen::VectorXd logits =
        w_mean * z.row(0).transpose() + posterior.c_mu;
    for (Eigen::Index j = 0; j < j_count; ++j) {
      const double prob = 1.0 / (1.0 + std::exp(-logits[j]));
      const double pred = prob > threshold ? 1.0 : 0.0;
      if (pred == y(0, j)) ++hits;
    }
  }
  return static_cast<double>(hits) /
         (static_cast<double>(test.size()) * j_count);
}

SbnModel::SbnModel(const SbnData& train, const SbnData* test, Options options)
    : train_(train), test_(test), options_(options) {
  if (options_.hidden < 1)
    throw std::domain_error("sbn model: hidden units must be >= 1");
  const Eigen::Index j_count = train_.visible();
  const Eigen::Index k_count = options_.hidden;
  posterior_ = initial_posterior(j_count, k_count, options_.nu_b,
                                 options_.nu_c, options_.init_seed);
  nat_p_w_.assign(j_count, Eigen::MatrixXd::Identity(k_count, k_count));
  nat_h_w_.resize(j_count);
  for (Eigen::Index j = 0; j < j_count; ++j) nat_h_w_[j] = posterior_.w_mu[j];
  nat_p_b_ = Eigen::VectorXd::Constant(k_count, 1.0 / options_.nu_b);
  nat_h_b_ = Eigen::VectorXd::Zero(k_count);
  nat_p_c_ = Eigen::VectorXd::Constant(j_count, 1.0 / options_.nu_c);
  nat_h_c_ = Eigen::VectorXd::Zero(j_count);

  if (options_.batch_mode) {
    // The data-only block is fixed across iterations in batch mode.
    s3_batchmode_ = Eigen::VectorXd::Zero(j_count);
    for (Eigen::Index i = 0; i < train_.size(); ++i)
      s3_batchmode_ +=
          train_.row(i) - Eigen::VectorXd::Constant(j_count, 0.5);
    s3_batchmode_ /= static_cast<double>(train_.size());
  }
}

void SbnModel::setup(double multiplier, Rng& rng) {
  if (!options_.batch_mode) return;
  const auto sens = sbn_sensitivities(train_.visible(), options_.hidden,
                                      static_cast<double>(train_.size()));
  mechanisms::BlockStats one;
  one.blocks.push_back({"s3",
                        {static_cast<std::size_t>(train_.visible())},
                        std::vector<double>(s3_batchmode_.data(),
                                            s3_batchmode_.data() +
                                                train_.visible()),
                        sens[2]});
  mechanisms::block_scaled_perturb_inplace(one, multiplier, rng);
  for (Eigen::Index j = 0; j < train_.visible(); ++j)
    s3_batchmode_[j] = one.blocks[0].values[static_cast<std::size_t>(j)];
}

mechanisms::BlockStats SbnModel::e_step(std::span<const std::size_t> batch,
                                        std::size_t nominal_batch) {
  const Eigen::Index j_count = train_.visible();
  const Eigen::Index k_count = options_.hidden;
  Eigen::MatrixXd y(batch.size(), j_count);
  for (std::size_t r = 0; r < batch.size(); ++r)
    y.row(static_cast<Eigen::Index>(r)) =
        train_.row(static_cast<Eigen::Index>(batch[r]));

  Eigen::MatrixXd z =
      Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(batch.size()),
                                k_count, 0.5);
  Eigen::MatrixXd xi0(batch.size(), j_count);
  Eigen::VectorXd xi1 = xi1_means(posterior_);
  if (batch.empty()) {
    xi1.setZero();
  } else {
    // Two PG/z alternations; the second tightens the tilts around the
    // inferred codes.
    for (int round = 0; round < 2; ++round) {
      xi0 = xi0_means(y, posterior_, z);
      z = e_step_z(y, posterior_, xi0, options_.sweeps, z);
    }
  }
  const SbnSuffStats stats =
      batch.empty()
          ? suff_stats(Eigen::MatrixXd::Zero(0, j_count),
                       Eigen::MatrixXd::Zero(0, k_count),
                       Eigen::MatrixXd::Zero(0, j_count), xi1, nominal_batch)
          : suff_stats(y, z, xi0, xi1, nominal_batch);

  const auto sens =
      sbn_sensitivities(j_count, k_count, static_cast<double>(nominal_batch));
  mechanisms::BlockStats out;
  const auto push_vector = [&](const char* name, const Eigen::VectorXd& v,
                               const mechanisms::SensitivityBound& s) {
    out.blocks.push_back(
        {name,
         {static_cast<std::size_t>(v.size())},
         std::vector<double>(v.data(), v.data() + v.size()),
         s});
  };
  const auto push_matrix = [&](const char* name, const Eigen::MatrixXd& m,
                               const mechanisms::SensitivityBound& s) {
    mechanisms::Block block;
    block.name = name;
    block.shape = {static_cast<std::size_t>(m.rows()),
                   static_cast<std::size_t>(m.cols())};
    block.values.resize(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        block.values[static_cast<std::size_t>(r) * m.cols() + c] = m(r, c);
    block.sensitivity = s;
    out.blocks.push_back(std::move(block));
  };

  push_vector("s1", stats.s1, sens[0]);
  push_vector("s2", stats.s2, sens[1]);
  if (!options_.batch_mode) push_vector("s3", stats.s3, sens[2]);
  push_vector("s4", stats.s4, sens[3]);
  push_matrix("s5", stats.s5, sens[4]);
  push_matrix("s6", stats.s6, sens[5]);

  mechanisms::Block b7;
  b7.name = "s7";
  b7.shape = {static_cast<std::size_t>(j_count),
              static_cast<std::size_t>(k_count),
              static_cast<std::size_t>(k_count)};
  b7.values.resize(static_cast<std::size_t>(j_count) * k_count * k_count);
  std::size_t pos = 0;
  for (Eigen::Index j = 0; j < j_count; ++j)
    for (Eigen::Index r = 0; r < k_count; ++r)
      for (Eigen::Index c = 0; c < k_count; ++c)
        b7.values[pos++] = stats.s7[j](r, c);
  b7.sensitivity = sens[6];
  out.blocks.push_back(std::move(b7));
  return out;
}

void SbnModel::perturb(mechanisms::BlockStats& stats, double multiplier,
                       Rng& rng) const {
  mechanisms::block_scaled_perturb_inplace(stats, multiplier, rng);
}

void SbnModel::m_step(const mechanisms::BlockStats& stats, double rho,
                      std::size_t /*nominal_batch*/) {
  const Eigen::Index j_count = train_.visible();
  const Eigen::Index k_count = options_.hidden;
  const double n = static_cast<double>(train_.size());

  // Unpack the released blocks back into shaped statistics.
  std::size_t idx = 0;
  const auto take_vector = [&](Eigen::Index len) {
    Eigen::VectorXd v(len);
    for (Eigen::Index i = 0; i < len; ++i)
      v[i] = stats.blocks[idx].values[static_cast<std::size_t>(i)];
    ++idx;
    return v;
  };
  const auto take_matrix = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        m(r, c) = stats.blocks[idx].values[static_cast<std::size_t>(r) * cols + c];
    ++idx;
    return m;
  };

  const Eigen::VectorXd s1 = take_vector(k_count);
  Eigen::VectorXd s2 = take_vector(k_count);
  const Eigen::VectorXd s3 =
      options_.batch_mode ? s3_batchmode_ : take_vector(j_count);
  Eigen::VectorXd s4 = take_vector(j_count);
  const Eigen::MatrixXd s5 = take_matrix(j_count, k_count);
  const Eigen::MatrixXd s6 = take_matrix(k_count, j_count);
  std::vector<Eigen::MatrixXd> s7(j_count);
  {
    const auto& raw = stats.blocks[idx].values;
    std::size_t pos = 0;
    for (Eigen::Index j = 0; j < j_count; ++j) {
      s7[j].resize(k_count, k_count);
      for (Eigen::Index r = 0; r < k_count; ++r)
        for (Eigen::Index c = 0; c < k_count; ++c) s7[j](r, c) = raw[pos++];
      s7[j] = 0.5 * (s7[j] + s7[j].transpose().eval());
      s7[j] = mechanisms::project_psd(s7[j], options_.psd_floor);
    }
  }
  // Diagonal precision contributions must stay non-negative.
  for (Eigen::Index k = 0; k < k_count; ++k) s2[k] = std::max(s2[k], 0.0);
  for (Eigen::Index j = 0; j < j_count; ++j) s4[j] = std::max(s4[j], 0.0);

  const double omr = 1.0 - rho;
  // Weight rows, using the current bias expectations.
  for (Eigen::Index j = 0; j < j_count; ++j) {
    const Eigen::MatrixXd p_new =
        n * s7[j] +
        Eigen::MatrixXd(posterior_.zeta_inv.row(j).asDiagonal());
    const Eigen::VectorXd h_new =
        n * (s6.col(j) - posterior_.c_mu[j] * s5.row(j).transpose());
    nat_p_w_[j] = omr * nat_p_w_[j] + rho * p_new;
    nat_h_w_[j] = omr * nat_h_w_[j] + rho * h_new;
    Eigen::LLT<Eigen::MatrixXd> llt(nat_p_w_[j]);
    if (llt.info() != Eigen::Success)
      throw numeric_error("sbn m_step: weight row precision not PD (row " +
                          std::to_string(j) + ")");
    posterior_.w_sigma[j] = llt.solve(
        Eigen::MatrixXd::Identity(k_count, k_count));
    posterior_.w_sigma[j] =
        0.5 * (posterior_.w_sigma[j] + posterior_.w_sigma[j].transpose().eval());
    posterior_.w_mu[j] = llt.solve(nat_h_w_[j]);
  }

  // Hidden bias b.
  nat_p_b_ = omr * nat_p_b_.array() +
             rho * (1.0 / options_.nu_b + n * s2.array());
  nat_h_b_ = omr * nat_h_b_ + rho * (n * s1);
  posterior_.b_sigma = nat_p_b_.cwiseInverse().asDiagonal();
  posterior_.b_mu = nat_h_b_.array() / nat_p_b_.array();

  // Visible bias c, using the refreshed weight means.
  const Eigen::MatrixXd w_mean = posterior_.w_mean_matrix();
  Eigen::VectorXd h_c_new(j_count);
  for (Eigen::Index j = 0; j < j_count; ++j)
    h_c_new[j] = n * (s3[j] - s5.row(j).dot(w_mean.row(j)));
  nat_p_c_ = omr * nat_p_c_.array() +
             rho * (1.0 / options_.nu_c + n * s4.array());
  nat_h_c_ = omr * nat_h_c_ + rho * h_c_new;
  posterior_.c_sigma = nat_p_c_.cwiseInverse().asDiagonal();
  posterior_.c_mu = nat_h_c_.array() / nat_p_c_.array();

  update_tpbn(posterior_);
}

std::pair<std::string, double> SbnModel::metric() {
  const SbnData& data = test_ ? *test_ : train_;
  return {"reconstruction_accuracy",
          reconstruct_predict(data, posterior_, options_.sweeps)};
}

}  // namespace dpvb::sbn
