/*
 * Copyright 2026 the pasoa authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace pasoa {

// Counter-based pseudo-random stream. Every draw is a pure function of
// (key, counter), so substreams for particles, steps or rollouts can be
// derived in O(1) without carrying generator state around. Forked streams
// are independent of the draw order of their parent, which is what makes
// batch runs reproducible across thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kKeyInit)) {}

  // Derive an independent substream from this stream's key and a list of
  // tags (e.g. {step, particle}). Does not consume draws from the parent.
  Rng fork(std::initializer_list<std::uint64_t> tags) const {
    std::uint64_t k = key_;
    for (std::uint64_t t : tags) k = mix(k ^ mix(t + kTagSalt));
    return Rng(k, 0);
  }
  Rng fork(std::uint64_t tag) const { return fork({tag}); }

  std::uint64_t next_u64() { return mix(key_ + kGamma * ++counter_); }

  // Uniform on (0, 1]: never returns 0 so that log(u) is always finite.
  double u01() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Box-Muller, one value per call; no cached state.
  double normal() {
    const double u1 = u01();
    const double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double exponential() { return -std::log(u01()); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection-free multiply-shift; bias is negligible for n << 2^64 and
    // irrelevant here (n is a particle count).
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  std::uint64_t key() const { return key_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kKeyInit = 0x8f1bbcdc5e4a3f21ULL;
  static constexpr std::uint64_t kTagSalt = 0xd6e8feb86659fd93ULL;
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pasoa
