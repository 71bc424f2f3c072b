// Copyright 2026 The streamlid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "streamlid/common.hpp"

namespace streamlid {

// Fixed generator: xoshiro256** seeded through splitmix64. The raw 64-bit
// stream is identical for a given seed on every platform; all derived draws
// consume the stream in a fixed order.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "xoshiro256**";

  explicit Rng(uint64_t seed = 0) { reseed(seed); }

  void reseed(uint64_t seed) {
    seed_ = seed;
    uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection-free modulo is fine here; bias is
  // negligible for the small n this project uses.
  uint64_t below(uint64_t n) {
    if (n == 0) throw UsageError("Rng::below: n must be positive");
    return next_u64() % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Approximate standard normal via Irwin-Hall (sum of 12 uniforms minus 6).
  // Exactly portable: uses only the integer stream and +/-.
  double gaussian() {
    double acc = 0.0;
    for (int i = 0; i < 12; ++i) acc += uniform();
    return acc - 6.0;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream for (seed, label), e.g. one per utterance.
  static Rng derive(uint64_t seed, std::string_view label) {
    return Rng(seed ^ fnv1a64(label));
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t seed_ = 0;
  uint64_t s_[4] = {};
};

}  // namespace streamlid
