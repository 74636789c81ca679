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

#include <cmath>
#include <vector>

#include "dpvb/rng.hpp"

using dpvb::Rng;

TEST_CASE("same seed reproduces the stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.gaussian() == b.gaussian());
  }
}

TEST_CASE("named child streams are stable and distinct") {
  const Rng root(7);
  Rng c1 = root.child("noise");
  Rng c2 = root.child("noise");
  Rng c3 = root.child("sampling");
  CHECK(c1.next_u64() == c2.next_u64());
  CHECK(c1.seed() != c3.seed());
  CHECK(root.child("noise", 0).seed() != root.child("noise", 1).seed());
}

TEST_CASE("uniform_index covers the range") {
  Rng rng(99);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) counts[rng.uniform_index(5)]++;
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("gaussian moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(var == doctest::Approx(1.0).epsilon(0.01));
}
