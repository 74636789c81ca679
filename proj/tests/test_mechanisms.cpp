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

#include "dpvb/mechanisms.hpp"
#include "dpvb/rng.hpp"

namespace mech = dpvb::mechanisms;
using dpvb::Rng;

namespace {

double sample_std(const std::vector<double>& xs) {
  double sum = 0.0, sum2 = 0.0;
  for (double x : xs) {
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / xs.size();
  return std::sqrt(sum2 / xs.size() - mean * mean);
}

}  // namespace

TEST_CASE("gaussian_perturb basics") {
  Rng rng(1);
  const std::vector<double> v = {1.0, -2.0, 3.0};

  SUBCASE("zero multiplier is the identity") {
    CHECK(mech::gaussian_perturb(v, {1.0}, 0.0, rng) == v);
  }

  SUBCASE("same seed, same output") {
    Rng a(42), b(42);
    CHECK(mech::gaussian_perturb(v, {0.5}, 2.0, a) ==
          mech::gaussian_perturb(v, {0.5}, 2.0, b));
  }

  SUBCASE("per-coordinate noise std is multiplier times sensitivity") {
    // z = 2, sensitivity 1: sample std over 1e5 draws within [1.98, 2.02]
    // (a five-nines chi-square band around 2).
    Rng r(7);
    std::vector<double> zeros(7, 0.0);
    std::vector<double> draws;
    draws.reserve(100000 / 7 * 7);
    for (int rep = 0; rep < 100000 / 7; ++rep)
      for (double x : mech::gaussian_perturb(zeros, {1.0}, 2.0, r))
        draws.push_back(x);
    const double s = sample_std(draws);
    CHECK(s >= 1.98);
    CHECK(s <= 2.02);
  }

  SUBCASE("invalid sensitivity") {
    Rng r(3);
    std::vector<double> buf = {1.0};
    CHECK_THROWS_AS(mech::gaussian_perturb_inplace(buf, {0.0}, 1.0, r),
                    std::domain_error);
  }
}

TEST_CASE("clip_nonnegative") {
  const std::vector<double> v = {-1.0, 2.0, 0.0};
  CHECK(mech::clip_nonnegative(v) == std::vector<double>{0.0, 2.0, 0.0});
  const std::vector<double> w = {0.5, 1.5};
  CHECK(mech::clip_nonnegative(w) == w);
  CHECK(mech::clip_nonnegative(mech::clip_nonnegative(v)) ==
        mech::clip_nonnegative(v));
}

TEST_CASE("analyze_gauss_perturb") {
  Eigen::MatrixXd m(3, 3);
  m << 1.0, 0.2, -0.3, 0.2, 2.0, 0.4, -0.3, 0.4, 3.0;

  SUBCASE("zero multiplier returns the (symmetrized) input") {
    Rng rng(5);
    CHECK((mech::analyze_gauss_perturb(m, {1.0}, 0.0, rng) - m).norm() == 0.0);
  }

  SUBCASE("output is bit-exactly symmetric") {
    Rng rng(5);
    const Eigen::MatrixXd out = mech::analyze_gauss_perturb(m, {0.7}, 1.3, rng);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(out(i, j) == out(j, i));
  }

  SUBCASE("asymmetric input is rejected") {
    Eigen::MatrixXd bad = m;
    bad(0, 1) += 1e-9;
    Rng rng(5);
    CHECK_THROWS_AS(mech::analyze_gauss_perturb(bad, {1.0}, 1.0, rng),
                    std::domain_error);
  }

  SUBCASE("off-diagonal noise std equals multiplier * sensitivity") {
    // One draw per mirrored pair, so no sqrt(2) inflation.
    Rng rng(11);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 2);
    std::vector<double> off, diag;
    for (int rep = 0; rep < 100000; ++rep) {
      const Eigen::MatrixXd out =
          mech::analyze_gauss_perturb(zero, {1.5}, 1.0, rng);
      off.push_back(out(0, 1));
      diag.push_back(out(0, 0));
      CHECK(out(0, 1) == out(1, 0));
    }
    CHECK(sample_std(off) == doctest::Approx(1.5).epsilon(0.01));
    CHECK(sample_std(diag) == doctest::Approx(1.5).epsilon(0.01));
  }
}

TEST_CASE("project_psd") {
  SUBCASE("identity is untouched") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    CHECK((mech::project_psd(eye, 1e-6) - eye).norm() < 1e-12);
  }

  SUBCASE("negative eigenvalue is floored") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    const Eigen::MatrixXd out = mech::project_psd(m, 1e-6);
    CHECK(out(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out(1, 1) == doctest::Approx(1e-6).epsilon(1e-9));
  }

  SUBCASE("random symmetric matrices come out PD and idempotent") {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
      Eigen::MatrixXd m(20, 20);
      for (int i = 0; i < 20; ++i)
        for (int j = i; j < 20; ++j) {
          m(i, j) = rng.gaussian();
          m(j, i) = m(i, j);
        }
      const Eigen::MatrixXd out = mech::project_psd(m, 1e-6);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out);
      CHECK(es.eigenvalues().minCoeff() >= 1e-6 - 1e-10);
      const Eigen::MatrixXd again = mech::project_psd(out, 1e-6);
      CHECK((again - out).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("block_scaled_perturb") {
  auto make_stats = [](int blocks, std::size_t len, double sens_base) {
    mech::BlockStats stats;
    for (int b = 0; b < blocks; ++b)
      stats.blocks.push_back({"b" + std::to_string(b),
                              {len},
                              std::vector<double>(len, 0.0),
                              {sens_base * (b + 1)}});
    return stats;
  };

  SUBCASE("zero multiplier is the identity") {
    auto stats = make_stats(3, 4, 0.5);
    Rng rng(1);
    mech::block_scaled_perturb_inplace(stats, 0.0, rng);
    for (const auto& b : stats.blocks)
      for (double v : b.values) CHECK(v == 0.0);
  }

  SUBCASE("single block reduces to gaussian_perturb") {
    auto stats = make_stats(1, 6, 0.7);
    Rng a(9), b(9);
    mech::block_scaled_perturb_inplace(stats, 1.3, a);
    const std::vector<double> want =
        mech::gaussian_perturb(std::vector<double>(6, 0.0), {0.7}, 1.3, b);
    CHECK(stats.blocks[0].values == want);
  }

  SUBCASE("recovered per-block noise std is sqrt(m) * z * C_i") {
    const int m = 7;
    const double z = 0.8;
    Rng rng(21);
    std::vector<std::vector<double>> draws(m);
    for (int rep = 0; rep < 6000; ++rep) {
      auto stats = make_stats(m, 3, 0.25);
      mech::block_scaled_perturb_inplace(stats, z, rng);
      for (int b = 0; b < m; ++b)
        for (double v : stats.blocks[b].values) draws[b].push_back(v);
    }
    for (int b = 0; b < m; ++b) {
      const double want = std::sqrt(7.0) * z * 0.25 * (b + 1);
      CHECK(sample_std(draws[b]) == doctest::Approx(want).epsilon(0.02));
    }
  }

  SUBCASE("equal sensitivities match a flat gaussian_perturb in distribution") {
    const int m = 4;
    const double c = 0.5, z = 1.1;
    Rng rng(31);
    std::vector<double> concat_draws;
    for (int rep = 0; rep < 20000; ++rep) {
      auto stats = make_stats(1, 1, c);
      stats.blocks.resize(1);
      auto full = mech::BlockStats{};
      for (int b = 0; b < m; ++b)
        full.blocks.push_back({"b", {2}, {0.0, 0.0}, {c}});
      mech::block_scaled_perturb_inplace(full, z, rng);
      for (const auto& blk : full.blocks)
        for (double v : blk.values) concat_draws.push_back(v);
    }
    CHECK(sample_std(concat_draws) ==
          doctest::Approx(std::sqrt(4.0) * z * c).epsilon(0.01));
  }

  SUBCASE("zero sensitivity rejected") {
    mech::BlockStats stats;
    stats.blocks.push_back({"s", {1}, {0.0}, {0.0}});
    Rng rng(2);
    CHECK_THROWS_AS(mech::block_scaled_perturb_inplace(stats, 1.0, rng),
                    std::domain_error);
  }

  SUBCASE("deterministic under a fixed seed") {
    auto s1 = make_stats(3, 5, 0.4);
    auto s2 = make_stats(3, 5, 0.4);
    Rng a(77), b(77);
    mech::block_scaled_perturb_inplace(s1, 0.9, a);
    mech::block_scaled_perturb_inplace(s2, 0.9, b);
    for (std::size_t i = 0; i < s1.blocks.size(); ++i)
      CHECK(s1.blocks[i].values == s2.blocks[i].values);
  }
}
