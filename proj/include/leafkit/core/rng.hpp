// Copyright 2026 The leafkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace leafkit {

/// Counter-based random stream.
///
/// Output i of stream (seed, stream) is a pure function of (seed, stream, i),
/// so a stream can be saved as three integers and resumed exactly, and child
/// streams can be derived without touching the parent's sequence. The mixing
/// function is the SplitMix64 finalizer.
class CounterRng {
 public:
  struct State {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t counter = 0;
    bool operator==(const State&) const = default;
  };

  CounterRng() = default;
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_{seed, stream, 0} {}
  explicit CounterRng(State s) : state_(s) {}

  const State& state() const { return state_; }

  /// Independent stream keyed by `index`; does not advance this stream.
  CounterRng derive(std::uint64_t index) const {
    return CounterRng(state_.seed, mix(state_.stream ^ mix(index + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t key = mix(state_.seed ^ mix(state_.stream));
    return mix(key + (state_.counter++) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller. Consumes two draws, caches nothing.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  State state_;
};

}  // namespace leafkit
