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

#ifndef DPVB_LDA_HPP_
#define DPVB_LDA_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dpvb/ce_vb.hpp"
#include "dpvb/mechanisms.hpp"
#include "dpvb/rng.hpp"

namespace dpvb::lda {

// Sparse bag-of-words document: (word id, count) pairs, ids strictly
// increasing.
struct Doc {
  std::vector<std::pair<int, int>> words;
  int total = 0;
};

// Documents stay behind this accessor; the read counter lets tests pin down
// that nothing touches the data outside the E-step.
class Corpus {
 public:
  Corpus(int vocab_size, int doc_cap = 0)
      : vocab_size_(vocab_size), doc_cap_(doc_cap) {}

  void add_doc(Doc doc);
  const Doc& doc(std::size_t i) const {
    ++reads_;
    return docs_[i];
  }
  std::size_t size() const { return docs_.size(); }
  int vocab_size() const { return vocab_size_; }
  int doc_cap() const { return doc_cap_; }
  int max_doc_length() const { return max_len_; }
  long total_words() const { return total_words_; }
  long reads() const { return reads_; }

 private:
  int vocab_size_;
  int doc_cap_;
  int max_len_ = 0;
  long total_words_ = 0;
  std::vector<Doc> docs_;
  mutable long reads_ = 0;
};

struct LdaState {
  Eigen::MatrixXd lambda;  // K x V, all entries > 0
  double alpha = 0.0;
  double eta = 0.0;
};

// psi(c_i) - psi(sum c) per coordinate.
std::vector<double> dirichlet_expect_log(std::span<const double> conc);

// Row-wise dirichlet_expect_log of a K x V concentration matrix.
Eigen::MatrixXd expected_log_beta(const Eigen::MatrixXd& lambda);

struct DocPosterior {
  Eigen::VectorXd gamma;                // K
  std::vector<Eigen::VectorXd> phi;     // one K-simplex row per doc word
  bool converged = false;
};

// Fixed point of the per-document E-step against fixed expected log topics.
DocPosterior e_step_doc(const Doc& doc, const Eigen::MatrixXd& elog_beta,
                        double alpha, int inner_iters = 100,
                        double tol = 1e-3);

// stats(k, v) += count * phi_k for every word of the document.
void accumulate_doc_stats(const Doc& doc, const DocPosterior& post,
                          Eigen::MatrixXd& stats);

// Keeps at most cap tokens, sampled without replacement; deterministic
// given the generator state.
Doc truncate_doc(const Doc& doc, int cap, Rng& rng);

// 2 * N_max / D_effective.
mechanisms::SensitivityBound lda_sensitivity(int max_doc_length,
                                             double d_effective);

// lambda <- (1 - rho) * lambda + rho * (eta + D * stats).
void m_step(LdaState& state, const Eigen::MatrixXd& perturbed_stats,
            double corpus_size, double rho);

// exp(-ELBO / word count) on a test corpus, re-fitting the per-document
// posteriors against the trained expected log topics.
double perplexity_bound(const Corpus& test, const LdaState& state,
                        int inner_iters = 100, double tol = 1e-3);

// LDA plugged into the private VB loop. One release per iteration: the
// topic-word statistic block, Gaussian-perturbed and clipped at zero.
class LdaModel : public ce_vb::Model {
 public:
  struct Options {
    int topics = 10;
    double alpha = 0.0;  // 0 = 1/K
    double eta = 0.0;    // 0 = 1/K
    int inner_iters = 100;
    double inner_tol = 1e-3;
    int metric_inner_iters = 200;
    double metric_tol = 1e-6;
    std::uint64_t init_seed = 0;
  };

  // `eval` may be null; the metric then tracks the training corpus.
  LdaModel(const Corpus& train, const Corpus* eval, Options options);

  std::size_t dataset_size() const override { return train_.size(); }
  int releases_per_iteration() const override { return 1; }
  mechanisms::BlockStats e_step(std::span<const std::size_t> batch,
                                std::size_t nominal_batch) override;
  void perturb(mechanisms::BlockStats& stats, double multiplier,
               Rng& rng) const override;
  void m_step(const mechanisms::BlockStats& stats, double rho,
              std::size_t nominal_batch) override;
  std::pair<std::string, double> metric() override;

  const LdaState& state() const { return state_; }
  const Eigen::MatrixXd& elog_beta() const { return elog_beta_; }

 private:
  const Corpus& train_;
  const Corpus* eval_;
  Options options_;
  LdaState state_;
  Eigen::MatrixXd elog_beta_;
};

}  // namespace dpvb::lda

#endif  // DPVB_LDA_HPP_
