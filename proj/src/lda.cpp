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

#include "dpvb/lda.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dpvb/errors.hpp"
#include "dpvb/kernels.hpp"

namespace dpvb::lda {

void Corpus::add_doc(Doc doc) {
  int total = 0;
  int prev = -1;
  for (const auto& [id, count] : doc.words) {
    if (id < 0 || id >= vocab_size_)
      throw std::domain_error("corpus: word id out of range");
    if (count < 1) throw std::domain_error("corpus: count must be >= 1");
    if (id <= prev) throw std::domain_error("corpus: ids must increase");
    prev = id;
    total += count;
  }
  doc.total = total;
  max_len_ = std::max(max_len_, total);
  total_words_ += total;
  docs_.push_back(std::move(doc));
}

std::vector<double> dirichlet_expect_log(std::span<const double> conc) {
  if (conc.empty()) throw std::domain_error("dirichlet_expect_log: empty");
  double sum = 0.0;
  for (double c : conc) {
    if (!(c > 0.0)) throw std::domain_error("dirichlet_expect_log: need > 0");
    sum += c;
  }
  std::vector<double> out(conc.size());
  kernels::digamma_vec(conc, out);
  const double psi_sum_arr[] = {sum};
  double psi_sum[1];
  kernels::digamma_vec(psi_sum_arr, psi_sum);
  for (double& v : out) v -= psi_sum[0];
  return out;
}

Eigen::MatrixXd expected_log_beta(const Eigen::MatrixXd& lambda) {
  const Eigen::Index k_count = lambda.rows();
  const Eigen::Index v_count = lambda.cols();
  Eigen::MatrixXd out(k_count, v_count);
  kernels::digamma_vec({lambda.data(), static_cast<std::size_t>(lambda.size())},
                       {out.data(), static_cast<std::size_t>(out.size())});
  Eigen::VectorXd row_sums = lambda.rowwise().sum();
  std::vector<double> psi_rows(k_count);
  kernels::digamma_vec({row_sums.data(), static_cast<std::size_t>(k_count)},
                       psi_rows);
  for (Eigen::Index k = 0; k < k_count; ++k)
    out.row(k).array() -= psi_rows[k];
  return out;
}

DocPosterior e_step_doc(const Doc& doc, const Eigen::MatrixXd& elog_beta,
                        double alpha, int inner_iters, double tol) {
  const Eigen::Index k_count = elog_beta.rows();
  DocPosterior post;
  post.gamma = Eigen::VectorXd::Constant(
      k_count, alpha + static_cast<double>(doc.total) / k_count);
  post.phi.assign(doc.words.size(), Eigen::VectorXd::Zero(k_count));
  if (doc.words.empty()) {
    post.gamma = Eigen::VectorXd::Constant(k_count, alpha);
    post.converged = true;
    return post;
  }

  Eigen::VectorXd elog_theta(k_count);
  Eigen::VectorXd logits(k_count);
  const auto refresh_elog_theta = [&] {
    const auto v = dirichlet_expect_log(
        {post.gamma.data(), static_cast<std::size_t>(k_count)});
    std::copy(v.begin(), v.end(), elog_theta.data());
  };
  refresh_elog_theta();

  for (int it = 0; it < inner_iters; ++it) {
    Eigen::VectorXd gamma_new = Eigen::VectorXd::Constant(k_count, alpha);
    for (std::size_t w = 0; w < doc.words.size(); ++w) {
      const auto [v, count] = doc.words[w];
      logits = elog_beta.col(v) + elog_theta;
      const std::span<const double> lspan{logits.data(),
                                          static_cast<std::size_t>(k_count)};
      const double m = kernels::max_value(lspan);
      std::span<double> pspan{post.phi[w].data(),
                              static_cast<std::size_t>(k_count)};
      logits.array() -= m;
      kernels::exp_vec(lspan, pspan);
      post.phi[w] /= kernels::sum(pspan);
      kernels::axpy(static_cast<double>(count), pspan,
                    {gamma_new.data(), static_cast<std::size_t>(k_count)});
    }
    const double mean_change =
        (gamma_new - post.gamma).cwiseAbs().sum() / k_count;
    post.gamma = gamma_new;
    refresh_elog_theta();
    if (mean_change < tol) {
      post.converged = true;
      break;
    }
  }
  return post;
}

void accumulate_doc_stats(const Doc& doc, const DocPosterior& post,
                          Eigen::MatrixXd& stats) {
  for (std::size_t w = 0; w < doc.words.size(); ++w) {
    const auto [v, count] = doc.words[w];
    kernels::axpy(static_cast<double>(count),
                  {post.phi[w].data(), static_cast<std::size_t>(post.phi[w].size())},
                  {stats.col(v).data(), static_cast<std::size_t>(stats.rows())});
  }
}

Doc truncate_doc(const Doc& doc, int cap, Rng& rng) {
  if (cap <= 0 || doc.total <= cap) return doc;
  std::vector<int> tokens;
  tokens.reserve(doc.total);
  for (const auto& [id, count] : doc.words)
    tokens.insert(tokens.end(), count, id);
  for (int i = 0; i < cap; ++i) {
    const std::size_t j = i + rng.uniform_index(tokens.size() - i);
    std::swap(tokens[i], tokens[j]);
  }
  tokens.resize(cap);
  std::sort(tokens.begin(), tokens.end());
  Doc out;
  for (int id : tokens) {
    if (!out.words.empty() && out.words.back().first == id)
      ++out.words.back().second;
    else
      out.words.emplace_back(id, 1);
  }
  out.total = cap;
  return out;
}

mechanisms::SensitivityBound lda_sensitivity(int max_doc_length,
                                             double d_effective) {
  if (max_doc_length < 1 || !(d_effective > 0.0))
    throw std::domain_error("lda_sensitivity: invalid arguments");
  return {2.0 * max_doc_length / d_effective};
}

void m_step(LdaState& state, const Eigen::MatrixXd& perturbed_stats,
            double corpus_size, double rho) {
  if (perturbed_stats.rows() != state.lambda.rows() ||
      perturbed_stats.cols() != state.lambda.cols())
    throw std::domain_error("lda m_step: shape mismatch");
  Eigen::MatrixXd target =
      (corpus_size * perturbed_stats).array() + state.eta;
  kernels::lerp({state.lambda.data(), static_cast<std::size_t>(state.lambda.size())},
                {target.data(), static_cast<std::size_t>(target.size())}, rho,
                {state.lambda.data(), static_cast<std::size_t>(state.lambda.size())});
}

double perplexity_bound(const Corpus& test, const LdaState& state,
                        int inner_iters, double tol) {
  if (test.size() == 0 || test.total_words() == 0)
    throw std::domain_error("perplexity_bound: empty test corpus");
  const Eigen::MatrixXd elog_beta = expected_log_beta(state.lambda);
  const Eigen::Index k_count = state.lambda.rows();
  const double alpha = state.alpha;

  double elbo = 0.0;
  const double theta_prior_const =
      std::lgamma(k_count * alpha) - k_count * std::lgamma(alpha);
  for (std::size_t d = 0; d < test.size(); ++d) {
    const Doc& doc = test.doc(d);
    const DocPosterior post =
        e_step_doc(doc, elog_beta, alpha, inner_iters, tol);
    const auto elog_theta = dirichlet_expect_log(
        {post.gamma.data(), static_cast<std::size_t>(k_count)});
    for (std::size_t w = 0; w < doc.words.size(); ++w) {
      const auto [v, count] = doc.words[w];
      for (Eigen::Index k = 0; k < k_count; ++k) {
        const double p = post.phi[w][k];
        if (p > 0.0)
          elbo += count * p *
                  (elog_theta[k] + elog_beta(k, v) - std::log(p));
      }
    }
    double gamma_sum = 0.0;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      elbo += (alpha - post.gamma[k]) * elog_theta[k] +
              std::lgamma(post.gamma[k]);
      gamma_sum += post.gamma[k];
    }
    elbo += theta_prior_const - std::lgamma(gamma_sum);
  }
  return std::exp(-elbo / static_cast<double>(test.total_words()));
}

LdaModel::LdaModel(const Corpus& train, const Corpus* eval, Options options)
    : train_(train), eval_(eval), options_(options) {
  if (options_.topics < 1)
    throw std::domain_error("lda model: topics must be >= 1");
  if (train_.size() == 0) throw std::domain_error("lda model: empty corpus");
  if (options_.alpha == 0.0) options_.alpha = 1.0 / options_.topics;
  if (options_.eta == 0.0) options_.eta = 1.0 / options_.topics;
  // Random positive initialization, as in stock stochastic VB.
  Rng init = Rng(options_.init_seed).child("init");
  state_.alpha = options_.alpha;
  state_.eta = options_.eta;
  state_.lambda.resize(options_.topics, train_.vocab_size());
  const double scale =
      static_cast<double>(train_.total_words()) /
      (static_cast<double>(options_.topics) * train_.vocab_size());
  for (Eigen::Index k = 0; k < state_.lambda.rows(); ++k)
    for (Eigen::Index v = 0; v < state_.lambda.cols(); ++v) {
      // Gamma(100, 0.01*scale)-like spread around `scale`, kept simple.
      const double u = init.uniform();
      state_.lambda(k, v) = state_.eta + scale * (0.5 + u);
    }
  elog_beta_ = expected_log_beta(state_.lambda);
}

mechanisms::BlockStats LdaModel::e_step(std::span<const std::size_t> batch,
                                        std::size_t nominal_batch) {
  const int k_count = options_.topics;
  const int v_count = train_.vocab_size();
  Eigen::MatrixXd stats = Eigen::MatrixXd::Zero(k_count, v_count);
  for (std::size_t idx : batch) {
    const Doc& doc = train_.doc(idx);
    const DocPosterior post = e_step_doc(doc, elog_beta_, options_.alpha,
                                         options_.inner_iters,
                                         options_.inner_tol);
    accumulate_doc_stats(doc, post, stats);
  }
  stats /= static_cast<double>(nominal_batch);

  const int cap = train_.doc_cap() > 0 ? train_.doc_cap()
                                       : train_.max_doc_length();
  mechanisms::BlockStats out;
  mechanisms::Block block;
  block.name = "topic_word_stats";
  block.shape = {static_cast<std::size_t>(k_count),
                 static_cast<std::size_t>(v_count)};
  block.values.resize(static_cast<std::size_t>(k_count) * v_count);
  // Canonical row-major layout for the noise draw order.
  for (int k = 0; k < k_count; ++k)
    for (int v = 0; v < v_count; ++v)
      block.values[static_cast<std::size_t>(k) * v_count + v] = stats(k, v);
  block.sensitivity =
      lda_sensitivity(cap, static_cast<double>(nominal_batch));
  out.blocks.push_back(std::move(block));
  return out;
}

void LdaModel::perturb(mechanisms::BlockStats& stats, double multiplier,
                       Rng& rng) const {
  for (auto& block : stats.blocks) {
    mechanisms::gaussian_perturb_inplace(block.values, block.sensitivity,
                                         multiplier, rng);
    mechanisms::clip_nonnegative_inplace(block.values);
  }
}

void LdaModel::m_step(const mechanisms::BlockStats& stats, double rho,
                      std::size_t /*nominal_batch*/) {
  const int k_count = options_.topics;
  const int v_count = train_.vocab_size();
  Eigen::MatrixXd s_tilde(k_count, v_count);
  const auto& values = stats.blocks[0].values;
  for (int k = 0; k < k_count; ++k)
    for (int v = 0; v < v_count; ++v)
      s_tilde(k, v) = values[static_cast<std::size_t>(k) * v_count + v];
  lda::m_step(state_, s_tilde, static_cast<double>(train_.size()), rho);
  elog_beta_ = expected_log_beta(state_.lambda);
}

std::pair<std::string, double> LdaModel::metric() {
  const Corpus& eval = eval_ ? *eval_ : train_;
  return {"perplexity", perplexity_bound(eval, state_,
                                         options_.metric_inner_iters,
                                         options_.metric_tol)};
}

}  // namespace dpvb::lda
