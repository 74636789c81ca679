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

#ifndef DPVB_RNG_HPP_
#define DPVB_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace dpvb {

// Deterministic generator with named child streams. All draw paths are
// implemented here (not via std distributions) so that a seed reproduces
// byte-identical runs on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller (cosine branch, no caching).
  double gaussian();

  // Child stream derived from this stream's seed and a label. Independent of
  // the parent's draw position.
  Rng child(std::string_view label) const;
  Rng child(std::string_view label, std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dpvb

#endif  // DPVB_RNG_HPP_
