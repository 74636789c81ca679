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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dpvb/lda.hpp"
#include "dpvb/rng.hpp"

namespace lda = dpvb::lda;
using dpvb::Rng;

namespace {

lda::Doc make_doc(std::vector<std::pair<int, int>> words) {
  lda::Doc d;
  d.words = std::move(words);
  for (const auto& [id, c] : d.words) d.total += c;
  return d;
}

// Random corpus of docs with lengths up to max_len, for oracle checks.
lda::Corpus random_corpus(int docs, int vocab, int max_len, Rng& rng) {
  lda::Corpus corpus(vocab, max_len);
  for (int d = 0; d < docs; ++d) {
    const int len = 1 + static_cast<int>(rng.uniform_index(max_len));
    std::vector<int> counts(vocab, 0);
    for (int i = 0; i < len; ++i) counts[rng.uniform_index(vocab)]++;
    lda::Doc doc;
    for (int v = 0; v < vocab; ++v)
      if (counts[v] > 0) doc.words.emplace_back(v, counts[v]);
    if (doc.words.empty()) doc.words.emplace_back(0, 1);
    corpus.add_doc(std::move(doc));
  }
  return corpus;
}

Eigen::MatrixXd batch_stats(const lda::Corpus& corpus,
                            const Eigen::MatrixXd& elog_beta, double alpha,
                            double divisor) {
  Eigen::MatrixXd stats =
      Eigen::MatrixXd::Zero(elog_beta.rows(), elog_beta.cols());
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto post = lda::e_step_doc(corpus.doc(d), elog_beta, alpha);
    lda::accumulate_doc_stats(corpus.doc(d), post, stats);
  }
  return stats / divisor;
}

// Exact per-word perplexity of the variational predictive on a tiny corpus:
// sum over all token-topic assignments with collapsed Dirichlet integrals
// for theta and Dirichlet moment ratios for the topics.
double enumeration_perplexity(const lda::Corpus& corpus,
                              const lda::LdaState& state) {
  const int k_count = static_cast<int>(state.lambda.rows());
  const int v_count = static_cast<int>(state.lambda.cols());
  double log_evidence = 0.0;
  long total_words = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    std::vector<int> tokens;
    for (const auto& [v, c] : corpus.doc(d).words)
      tokens.insert(tokens.end(), c, v);
    const int n = static_cast<int>(tokens.size());
    total_words += n;

    double evidence = 0.0;
    std::vector<int> assign(n, 0);
    while (true) {
      // theta integral: Polya urn over topic counts.
      std::vector<int> topic_counts(k_count, 0);
      for (int z : assign) topic_counts[z]++;
      double logp = std::lgamma(k_count * state.alpha) -
                    std::lgamma(k_count * state.alpha + n);
      for (int k = 0; k < k_count; ++k)
        logp += std::lgamma(state.alpha + topic_counts[k]) -
                std::lgamma(state.alpha);
      // topics: E[prod beta^m] under independent Dirichlet rows.
      for (int k = 0; k < k_count; ++k) {
        std::vector<int> word_counts(v_count, 0);
        int topic_total = 0;
        for (int i = 0; i < n; ++i)
          if (assign[i] == k) {
            word_counts[tokens[i]]++;
            topic_total++;
          }
        if (topic_total == 0) continue;
        const double row_sum = state.lambda.row(k).sum();
        logp += std::lgamma(row_sum) - std::lgamma(row_sum + topic_total);
        for (int v = 0; v < v_count; ++v)
          if (word_counts[v] > 0)
            logp += std::lgamma(state.lambda(k, v) + word_counts[v]) -
                    std::lgamma(state.lambda(k, v));
      }
      evidence += std::exp(logp);
      // next assignment
      int pos = 0;
      while (pos < n && ++assign[pos] == k_count) assign[pos++] = 0;
      if (pos == n) break;
    }
    log_evidence += std::log(evidence);
  }
  return std::exp(-log_evidence / static_cast<double>(total_words));
}

}  // namespace

TEST_CASE("dirichlet_expect_log") {
  const std::vector<double> pair = {1.0, 1.0};
  const auto out = lda::dirichlet_expect_log(pair);
  CHECK(out[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(-1.0).epsilon(1e-12));

  const std::vector<double> sym = {2.5, 2.5, 2.5};
  const auto s = lda::dirichlet_expect_log(sym);
  CHECK(s[0] == s[1]);
  CHECK(s[1] == s[2]);

  // psi(2) - psi(4) = -5/6, psi(1) - psi(4) = -11/6.
  const std::vector<double> g = {2.0, 1.0, 1.0};
  const auto got = lda::dirichlet_expect_log(g);
  CHECK(got[0] == doctest::Approx(-5.0 / 6.0).epsilon(1e-12));
  CHECK(got[1] == doctest::Approx(-11.0 / 6.0).epsilon(1e-12));
  CHECK(got[2] == doctest::Approx(-11.0 / 6.0).epsilon(1e-12));

  CHECK_THROWS_AS(lda::dirichlet_expect_log(std::vector<double>{1.0, 0.0}),
                  std::domain_error);
}

TEST_CASE("e_step_doc") {
  SUBCASE("flat topics give uniform phi and symmetric gamma") {
    const Eigen::MatrixXd elog_beta =
        Eigen::MatrixXd::Constant(4, 6, std::log(1.0 / 6.0));
    const auto doc = make_doc({{0, 2}, {3, 1}, {5, 2}});
    const auto post = lda::e_step_doc(doc, elog_beta, 0.3);
    CHECK(post.converged);
    for (const auto& phi : post.phi)
      for (int k = 0; k < 4; ++k)
        CHECK(phi[k] == doctest::Approx(0.25).epsilon(1e-12));
    for (int k = 0; k < 4; ++k)
      CHECK(post.gamma[k] == doctest::Approx(0.3 + 5.0 / 4).epsilon(1e-10));
  }

  SUBCASE("a dominant topic absorbs a single word") {
    Eigen::MatrixXd elog_beta = Eigen::MatrixXd::Constant(2, 3, -11.0);
    elog_beta(1, 0) = -1.0;  // +10 nats for topic 1 in word 0
    const auto doc = make_doc({{0, 1}});
    const auto post = lda::e_step_doc(doc, elog_beta, 0.1);
    CHECK(post.phi[0][1] >= 0.9999);
  }

  SUBCASE("phi rows sum to one, gamma is consistent, gamma >= alpha") {
    Rng rng(4);
    const auto corpus = random_corpus(6, 8, 20, rng);
    Eigen::MatrixXd elog_beta(3, 8);
    for (int k = 0; k < 3; ++k)
      for (int v = 0; v < 8; ++v) elog_beta(k, v) = -3.0 + rng.gaussian();
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const auto& doc = corpus.doc(d);
      const auto post = lda::e_step_doc(doc, elog_beta, 0.4);
      Eigen::VectorXd expect_gamma = Eigen::VectorXd::Constant(3, 0.4);
      for (std::size_t w = 0; w < doc.words.size(); ++w) {
        CHECK(post.phi[w].sum() == doctest::Approx(1.0).epsilon(1e-10));
        expect_gamma += doc.words[w].second * post.phi[w];
      }
      CHECK((post.gamma - expect_gamma).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(post.gamma.minCoeff() >= 0.4);
    }
  }

  SUBCASE("doc stats columns sum to the word counts") {
    Rng rng(5);
    Eigen::MatrixXd elog_beta(3, 5);
    for (int k = 0; k < 3; ++k)
      for (int v = 0; v < 5; ++v) elog_beta(k, v) = -2.0 + rng.gaussian();
    const auto doc = make_doc({{0, 3}, {2, 1}, {4, 2}});
    const auto post = lda::e_step_doc(doc, elog_beta, 0.5);
    Eigen::MatrixXd stats = Eigen::MatrixXd::Zero(3, 5);
    lda::accumulate_doc_stats(doc, post, stats);
    CHECK(stats.col(0).sum() == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(stats.col(1).sum() == doctest::Approx(0.0));
    CHECK(stats.col(2).sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(stats.col(4).sum() == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("truncate_doc") {
  Rng rng(9);
  const auto short_doc = make_doc({{1, 2}, {3, 1}});
  const auto same = lda::truncate_doc(short_doc, 5, rng);
  CHECK(same.words == short_doc.words);

  const auto long_doc = make_doc({{0, 6}, {2, 6}});
  const auto cut = lda::truncate_doc(long_doc, 6, rng);
  CHECK(cut.total == 6);
  int total = 0;
  for (const auto& [id, c] : cut.words) {
    CHECK((id == 0 || id == 2));
    CHECK(c <= 6);
    total += c;
  }
  CHECK(total == 6);

  Rng a(33), b(33);
  const auto cut_a = lda::truncate_doc(long_doc, 4, a);
  const auto cut_b = lda::truncate_doc(long_doc, 4, b);
  CHECK(cut_a.words == cut_b.words);
}

TEST_CASE("lda_sensitivity closed form") {
  CHECK(lda::lda_sensitivity(100, 1000).value == doctest::Approx(0.2));
  CHECK(lda::lda_sensitivity(1, 2).value == doctest::Approx(1.0));
  CHECK_THROWS_AS(lda::lda_sensitivity(0, 10), std::domain_error);
}

TEST_CASE("lda sensitivity brute force over neighboring corpora") {
  Rng rng(77);
  int violations = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int vocab = 2 + static_cast<int>(rng.uniform_index(5));
    const int k_count = 1 + static_cast<int>(rng.uniform_index(3));
    const int docs = 2 + static_cast<int>(rng.uniform_index(4));
    const int cap = 1 + static_cast<int>(rng.uniform_index(6));
    auto corpus = random_corpus(docs, vocab, cap, rng);
    Eigen::MatrixXd elog_beta(k_count, vocab);
    for (int k = 0; k < k_count; ++k)
      for (int v = 0; v < vocab; ++v) elog_beta(k, v) = -rng.uniform() * 5.0;

    const Eigen::MatrixXd full =
        batch_stats(corpus, elog_beta, 0.5, static_cast<double>(docs));
    const double bound = lda::lda_sensitivity(cap, docs).value;
    // Remove each document in turn.
    for (int out = 0; out < docs; ++out) {
      lda::Corpus neighbor(vocab, cap);
      for (int d = 0; d < docs; ++d)
        if (d != out) neighbor.add_doc(corpus.doc(d));
      const Eigen::MatrixXd reduced = batch_stats(
          neighbor, elog_beta, 0.5, static_cast<double>(docs - 1));
      if ((full - reduced).norm() > bound * (1.0 + 1e-12)) ++violations;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("m_step") {
  lda::LdaState state;
  state.alpha = 0.1;
  state.eta = 0.1;
  state.lambda = Eigen::MatrixXd::Constant(2, 3, 1.0);

  SUBCASE("rho=1 with zero stats collapses to the prior") {
    lda::m_step(state, Eigen::MatrixXd::Zero(2, 3), 10.0, 1.0);
    CHECK((state.lambda.array() == 0.1).all());
  }

  SUBCASE("rho=0 keeps lambda") {
    const Eigen::MatrixXd before = state.lambda;
    lda::m_step(state, Eigen::MatrixXd::Constant(2, 3, 5.0), 10.0, 0.0);
    CHECK(state.lambda == before);
  }

  SUBCASE("arithmetic example") {
    lda::m_step(state, Eigen::MatrixXd::Constant(2, 3, 0.05), 10.0, 1.0);
    CHECK(state.lambda(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  }
}

TEST_CASE("perplexity bound") {
  SUBCASE("single-topic bound is finite") {
    lda::Corpus corpus(3);
    corpus.add_doc(make_doc({{0, 1}, {2, 2}}));
    lda::LdaState state;
    state.alpha = 0.5;
    state.eta = 0.5;
    state.lambda = Eigen::MatrixXd::Constant(1, 3, 2.0);
    const double perp = lda::perplexity_bound(corpus, state);
    CHECK(std::isfinite(perp));
    CHECK(perp > 0.0);
  }

  SUBCASE("bound dominates the exact enumeration perplexity") {
    lda::Corpus corpus(3);
    corpus.add_doc(make_doc({{0, 1}, {1, 1}}));
    corpus.add_doc(make_doc({{2, 2}}));
    lda::LdaState state;
    state.alpha = 0.5;
    state.eta = 0.5;
    state.lambda.resize(2, 3);
    state.lambda << 2.0, 1.0, 0.5, 0.7, 1.3, 2.2;
    const double bound = lda::perplexity_bound(corpus, state, 200, 1e-8);
    const double exact = enumeration_perplexity(corpus, state);
    CHECK(bound >= exact);
    CHECK(exact > 1.0);
  }

  SUBCASE("uniform single topic stays near the vocabulary size") {
    const int vocab = 10;
    Rng rng(3);
    lda::Corpus corpus(vocab);
    for (int d = 0; d < 20; ++d) {
      std::vector<int> counts(vocab, 0);
      for (int i = 0; i < 30; ++i) counts[rng.uniform_index(vocab)]++;
      lda::Doc doc;
      for (int v = 0; v < vocab; ++v)
        if (counts[v]) doc.words.emplace_back(v, counts[v]);
      corpus.add_doc(std::move(doc));
    }
    lda::LdaState state;
    state.alpha = 1.0;
    state.eta = 1.0;
    state.lambda = Eigen::MatrixXd::Constant(1, vocab, 50.0);
    CHECK(lda::perplexity_bound(corpus, state) <= vocab * 1.05);
  }

  SUBCASE("empty test corpus is rejected") {
    lda::Corpus corpus(3);
    lda::LdaState state;
    state.alpha = 0.5;
    state.lambda = Eigen::MatrixXd::Constant(1, 3, 1.0);
    CHECK_THROWS_AS(lda::perplexity_bound(corpus, state), std::domain_error);
  }
}

TEST_CASE("batch non-private training decreases the training perplexity") {
  Rng rng(123);
  lda::Corpus corpus(12);
  // Two planted topics over disjoint halves of the vocabulary.
  for (int d = 0; d < 30; ++d) {
    const int base = (d % 2) * 6;
    std::vector<int> counts(12, 0);
    for (int i = 0; i < 25; ++i) {
      const int v = rng.uniform() < 0.9
                        ? base + static_cast<int>(rng.uniform_index(6))
                        : static_cast<int>(rng.uniform_index(12));
      counts[v]++;
    }
    lda::Doc doc;
    for (int v = 0; v < 12; ++v)
      if (counts[v]) doc.words.emplace_back(v, counts[v]);
    corpus.add_doc(std::move(doc));
  }

  lda::LdaModel model(corpus, nullptr,
                      {.topics = 2, .alpha = 0.5, .eta = 0.5, .init_seed = 7});
  dpvb::ce_vb::VipsConfig config;
  config.minibatch_size = 0;  // full batch
  config.max_iters = 15;
  config.noise_multiplier = 0.0;
  config.seed = 7;
  config.schedule = {0.0, 0.0};  // rho = 1
  const auto run = dpvb::ce_vb::run_vips(model, config);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& row : run.trace.rows) {
    CHECK(row.value <= prev * (1.0 + 1e-6));
    prev = row.value;
  }
  CHECK(prev < 12.0);  // beats the uniform predictive
}

TEST_CASE("the LDA M-step never reads the corpus") {
  Rng rng(8);
  auto corpus = random_corpus(10, 6, 8, rng);
  lda::LdaModel model(corpus, nullptr, {.topics = 2, .init_seed = 1});
  const std::vector<std::size_t> batch = {0, 1, 2, 3};
  auto stats = model.e_step(batch, 4);
  const long before = corpus.reads();
  model.m_step(stats, 0.5, 4);
  CHECK(corpus.reads() == before);
}
