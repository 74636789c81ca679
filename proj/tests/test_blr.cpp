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

#include "dpvb/blr.hpp"
#include "dpvb/polya_gamma.hpp"
#include "dpvb/rng.hpp"

namespace blr = dpvb::blr;
using dpvb::Rng;

namespace {

Eigen::VectorXd unit_ball_row(int d, Rng& rng) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.gaussian();
  x /= x.norm();
  x *= std::pow(rng.uniform(), 1.0 / d);
  return x;
}

blr::BlrDataset separable_data(int n, int d, double gap, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  w[0] = 1.0;
  Eigen::MatrixXd inputs(n, d);
  Eigen::VectorXd labels(n);
  int filled = 0;
  while (filled < n) {
    const Eigen::VectorXd x = unit_ball_row(d, rng);
    const double margin = w.dot(x);
    if (std::abs(margin) < gap) continue;
    inputs.row(filled) = x;
    labels[filled] = margin > 0 ? 1.0 : 0.0;
    ++filled;
  }
  return {inputs, labels};
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

}  // namespace

TEST_CASE("e_step") {
  SUBCASE("zero second moment pins every PG mean at 0.25") {
    Eigen::MatrixXd inputs(2, 2);
    inputs << 0.6, 0.0, 0.0, 0.8;
    Eigen::VectorXd labels(2);
    labels << 1.0, 0.0;
    blr::BlrDataset data(inputs, labels);
    const auto stats = blr::e_step(data, all_indices(2),
                                   Eigen::MatrixXd::Zero(2, 2), 2);
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(2, 2);
    scatter(0, 0) = 0.36;
    scatter(1, 1) = 0.64;
    CHECK((stats.s2 - 0.25 * scatter / 2.0).norm() < 1e-12);
  }

  SUBCASE("mirrored labels cancel s1") {
    Eigen::MatrixXd inputs(2, 2);
    inputs << 0.5, 0.5, 0.5, 0.5;
    Eigen::VectorXd labels(2);
    labels << 1.0, 0.0;
    blr::BlrDataset data(inputs, labels);
    const auto stats = blr::e_step(data, all_indices(2),
                                   Eigen::MatrixXd::Identity(2, 2), 2);
    CHECK(stats.s1.norm() < 1e-15);
  }

  SUBCASE("single example against the identity second moment") {
    Eigen::MatrixXd inputs(1, 2);
    inputs << 1.0, 0.0;
    Eigen::VectorXd labels(1);
    labels << 1.0;
    blr::BlrDataset data(inputs, labels);
    const auto stats = blr::e_step(data, all_indices(1),
                                   Eigen::MatrixXd::Identity(2, 2), 1);
    CHECK(stats.s1[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(stats.s1[1] == 0.0);
    CHECK(stats.s2(0, 0) ==
          doctest::Approx(dpvb::polya_gamma::pg_mean(1.0)).epsilon(1e-12));
    CHECK(stats.s2(1, 1) == 0.0);
  }
}

TEST_CASE("sensitivities") {
  const auto [s1, s2] = blr::blr_sensitivities(100.0);
  CHECK(s1.value == doctest::Approx(0.02));
  CHECK(s2.value == doctest::Approx(0.005));
  const auto [t1, t2] = blr::blr_sensitivities(1.0);
  CHECK(t1.value == doctest::Approx(2.0));
  CHECK(t2.value == doctest::Approx(0.5));

  SUBCASE("brute force over neighboring datasets") {
    Rng rng(55);
    int violations = 0;
    for (int trial = 0; trial < 80; ++trial) {
      const int n = 2 + static_cast<int>(rng.uniform_index(7));
      const int d = 1 + static_cast<int>(rng.uniform_index(3));
      Eigen::MatrixXd inputs(n, d);
      Eigen::VectorXd labels(n);
      for (int i = 0; i < n; ++i) {
        inputs.row(i) = unit_ball_row(d, rng);
        labels[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
      }
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < d; ++i) m(i, i) = 2.0 * rng.uniform();
      const blr::BlrDataset data(inputs, labels);
      const auto full = blr::e_step(data, all_indices(n), m, n);
      const auto [b1, b2] = blr::blr_sensitivities(n);
      for (int out = 0; out < n; ++out) {
        Eigen::MatrixXd in2(n - 1, d);
        Eigen::VectorXd lab2(n - 1);
        int r = 0;
        for (int i = 0; i < n; ++i) {
          if (i == out) continue;
          in2.row(r) = inputs.row(i);
          lab2[r] = labels[i];
          ++r;
        }
        const blr::BlrDataset neighbor(in2, lab2);
        const auto reduced =
            blr::e_step(neighbor, all_indices(n - 1), m, n - 1);
        if ((full.s1 - reduced.s1).norm() > b1.value * (1.0 + 1e-12))
          ++violations;
        if ((full.s2 - reduced.s2).norm() > b2.value * (1.0 + 1e-12))
          ++violations;
      }
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("m_step examples") {
  Eigen::MatrixXd inputs(1, 2);
  inputs << 1.0, 0.0;
  Eigen::VectorXd labels(1);
  labels << 1.0;
  blr::BlrDataset data(inputs, labels);

  SUBCASE("zero stats with unit alpha give the unit prior") {
    blr::BlrModel model(data, nullptr, {.a0 = 1.0, .b0 = 1.0});
    dpvb::mechanisms::BlockStats stats;
    stats.blocks.push_back({"s1", {2}, {0.0, 0.0}, {1.0}});
    stats.blocks.push_back({"s2", {2, 2}, {0.0, 0.0, 0.0, 0.0}, {1.0}});
    model.m_step(stats, 1.0, 1);
    CHECK(model.posterior().mu.norm() == 0.0);
    CHECK((model.posterior().sigma - Eigen::MatrixXd::Identity(2, 2)).norm() <
          1e-12);
  }

  SUBCASE("identity stats solve") {
    blr::BlrModel model(data, nullptr, {.a0 = 1.0, .b0 = 1.0});
    dpvb::mechanisms::BlockStats stats;
    stats.blocks.push_back({"s1", {2}, {1.0, 0.0}, {1.0}});
    stats.blocks.push_back({"s2", {2, 2}, {1.0, 0.0, 0.0, 1.0}, {1.0}});
    model.m_step(stats, 1.0, 1);
    CHECK(model.posterior().mu[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.posterior().mu[1] == 0.0);
    CHECK(model.posterior().sigma(0, 0) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("rho = 0 keeps the posterior") {
    blr::BlrModel model(data, nullptr, {.a0 = 1.0, .b0 = 1.0});
    const Eigen::VectorXd mu_before = model.posterior().mu;
    dpvb::mechanisms::BlockStats stats;
    stats.blocks.push_back({"s1", {2}, {1.0, 1.0}, {1.0}});
    stats.blocks.push_back({"s2", {2, 2}, {1.0, 0.0, 0.0, 1.0}, {1.0}});
    model.m_step(stats, 0.0, 1);
    CHECK(model.posterior().mu == mu_before);
  }
}

TEST_CASE("update_alpha") {
  const auto [a, b] = blr::update_alpha(Eigen::VectorXd::Zero(2),
                                        Eigen::MatrixXd::Identity(2, 2), 1.0,
                                        1.0);
  CHECK(a == doctest::Approx(2.0));
  CHECK(b == doctest::Approx(2.0));

  const auto [a2, b2] = blr::update_alpha(Eigen::VectorXd::Zero(3),
                                          Eigen::MatrixXd::Zero(3, 3), 1.5,
                                          0.7);
  CHECK(b2 == doctest::Approx(0.7));

  Eigen::VectorXd mu(2);
  mu << 1.0, 1.0;
  const auto [a3, b3] =
      blr::update_alpha(mu, Eigen::MatrixXd::Zero(2, 2), 1.0, 1.0);
  const auto [a4, b4] =
      blr::update_alpha(2.0 * mu, Eigen::MatrixXd::Zero(2, 2), 1.0, 1.0);
  CHECK(b4 - 1.0 == doctest::Approx(4.0 * (b3 - 1.0)).epsilon(1e-12));
}

TEST_CASE("predict") {
  SUBCASE("centered tight posterior predicts one half") {
    blr::BlrPosterior post;
    post.mu = Eigen::VectorXd::Zero(2);
    post.sigma = 1e-12 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd x(2);
    x << 0.5, 0.5;
    Rng rng(1);
    CHECK(blr::predict(x, post, 200, rng) == doctest::Approx(0.5).epsilon(1e-6));
  }

  SUBCASE("saturated mean") {
    blr::BlrPosterior post;
    post.mu = Eigen::VectorXd::Zero(1);
    post.mu[0] = 10.0;
    post.sigma = 1e-8 * Eigen::MatrixXd::Identity(1, 1);
    Eigen::VectorXd x(1);
    x << 1.0;
    Rng rng(2);
    CHECK(blr::predict(x, post, 200, rng) >= 0.999);
  }

  SUBCASE("1-D Monte Carlo agrees with quadrature") {
    blr::BlrPosterior post;
    post.mu = Eigen::VectorXd::Constant(1, 0.3);
    post.sigma = Eigen::MatrixXd::Constant(1, 1, 0.16);
    Eigen::VectorXd x(1);
    x << 0.9;
    // Simpson over w in [-10, 10].
    const int n = 20000;
    double integral = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double w = -10.0 + 20.0 * i / n;
      const double pdf = std::exp(-0.5 * (w - 0.3) * (w - 0.3) / 0.16) /
                         std::sqrt(2.0 * M_PI * 0.16);
      const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integral += weight * pdf / (1.0 + std::exp(-w * 0.9));
    }
    integral *= (20.0 / n) / 3.0;
    Rng rng(3);
    CHECK(std::abs(blr::predict(x, post, 10000, rng) - integral) < 0.01);
  }

  SUBCASE("deterministic under a fixed seed") {
    blr::BlrPosterior post;
    post.mu = Eigen::VectorXd::Constant(2, 0.2);
    post.sigma = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd x(2);
    x << 0.3, -0.4;
    Rng a(9), b(9);
    CHECK(blr::predict(x, post, 500, a) == blr::predict(x, post, 500, b));
  }
}

TEST_CASE("auc") {
  const std::vector<double> sep_scores = {0.1, 0.2, 0.8, 0.9};
  const std::vector<double> sep_labels = {0.0, 0.0, 1.0, 1.0};
  CHECK(blr::auc(sep_scores, sep_labels) == doctest::Approx(1.0));

  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  CHECK(blr::auc(flat, sep_labels) == doctest::Approx(0.5));

  const std::vector<double> hand_scores = {0.1, 0.4, 0.35, 0.8};
  const std::vector<double> hand_labels = {0.0, 0.0, 1.0, 1.0};
  CHECK(blr::auc(hand_scores, hand_labels) == doctest::Approx(0.75));
}

TEST_CASE("private run: 2J releases and PD covariances throughout") {
  const auto data = separable_data(60, 2, 0.1, 42);
  blr::BlrModel model(data, nullptr, {});
  dpvb::ce_vb::VipsConfig config;
  config.minibatch_size = 20;
  config.max_iters = 15;
  config.noise_multiplier = 1.0;
  config.delta_target = 1e-4;
  config.seed = 5;
  const auto run = dpvb::ce_vb::run_vips(model, config);
  CHECK(run.ledger.releases() == 30);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.posterior().sigma);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK((model.posterior().sigma - model.posterior().sigma.transpose())
            .norm() == 0.0);
}

TEST_CASE("non-private batch training separates planted data") {
  const auto data = separable_data(500, 2, 0.1, 7);
  blr::BlrModel model(data, nullptr, {.metric_seed = 11});
  dpvb::ce_vb::VipsConfig config;
  config.minibatch_size = 0;
  config.max_iters = 30;
  config.noise_multiplier = 0.0;
  config.seed = 11;
  config.schedule = {0.0, 0.0};  // rho = 1
  const auto run = dpvb::ce_vb::run_vips(model, config);
  CHECK(run.trace.rows.back().value >= 0.95);
}

TEST_CASE("the BLR M-step never reads the data") {
  const auto data = separable_data(20, 2, 0.1, 12);
  blr::BlrModel model(data, nullptr, {});
  const std::vector<std::size_t> batch = {0, 1, 2, 3, 4};
  auto stats = model.e_step(batch, 5);
  const long before = data.reads();
  model.m_step(stats, 0.7, 5);
  CHECK(data.reads() == before);
}
