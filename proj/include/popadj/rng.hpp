// Copyright 2026 The popadjust Authors
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

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace popadj {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. The n-th draw is a pure function of
/// (key, n), so streams keyed by (seed_root, scenario, replicate, role) are
/// reproducible regardless of how replicates are scheduled across threads.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key = 0) noexcept : key_(mix64(key)) {}

  /// Stream keyed by a path of identifiers below a root seed.
  static RandomStream derive(std::uint64_t seed_root,
                             std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t k = mix64(seed_root ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t id : path) k = mix64(k ^ mix64(id + 0x9e3779b97f4a7c15ULL));
    return RandomStream(k);
  }

  /// Independent child stream.
  RandomStream split(std::uint64_t id) const noexcept {
    return RandomStream(key_ ^ mix64(id ^ 0xbb67ae8584caa73bULL));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(*this); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Roles of the independent streams used inside one replicate.
enum class StreamRole : std::uint64_t {
  kAcTrial = 1,
  kBcTrial = 2,
  kBootstrap = 3,
  kProbe = 4,
};

}  // namespace popadj
