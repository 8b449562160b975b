// Copyright 2026 The Shuffle Bandits Authors
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

#ifndef SHUFFLE_BANDITS_RANDOM_H_
#define SHUFFLE_BANDITS_RANDOM_H_

#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace shuffle_bandits {

// All simulation randomness flows through a 64-bit Mersenne Twister. Its
// output sequence is fixed by the C++ standard, and every distribution below
// is implemented here rather than via <random>, so a seed reproduces the same
// bits on every standard library and platform.
using Engine = std::mt19937_64;

// Any generator producing full-range 64-bit words. Tests substitute stubs.
template <typename G>
concept BitGenerator =
    std::uniform_random_bit_generator<G> &&
    std::same_as<typename G::result_type, std::uint64_t> &&
    G::min() == 0 && G::max() == std::numeric_limits<std::uint64_t>::max();

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream families. Reward tapes and mechanism noise never share
// a stream.
enum class StreamLabel : std::uint64_t {
  kReward = 0x7265776172640001ULL,
  kMechanismNoise = 0x6e6f697365000002ULL,
  kAdHoc = 0x6164686f63000003ULL,
};

// Identifies one seeded run. Every sub-seed is a pure function of
// (master_seed, run_index, label, arm, batch ordinal).
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t run_index = 0;

  constexpr std::uint64_t Derive(StreamLabel label, std::uint64_t arm,
                                 std::uint64_t batch) const {
    std::uint64_t h = Mix64(master_seed);
    h = Mix64(h ^ run_index);
    h = Mix64(h ^ static_cast<std::uint64_t>(label));
    h = Mix64(h ^ arm);
    return Mix64(h ^ batch);
  }

  Engine MakeEngine(StreamLabel label, std::uint64_t arm,
                    std::uint64_t batch) const {
    return Engine(Derive(label, arm, batch));
  }
};

// Uniform double in [0, 1) with 53 random bits.
template <BitGenerator G>
double UniformDouble(G& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Returns true with probability p. p <= 0 never fires, p >= 1 always fires.
template <BitGenerator G>
bool BernoulliDraw(G& rng, double p) {
  return UniformDouble(rng) < p;
}

// Unbiased integer in [0, bound) by Lemire's multiply-and-reject method.
template <BitGenerator G>
std::uint64_t UniformBelow(G& rng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  u128 product = static_cast<u128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<u128>(rng()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

// Fisher-Yates; every permutation equally likely.
template <typename T, BitGenerator G>
void ShuffleInPlace(std::span<T> values, G& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = UniformBelow(rng, i);
    using std::swap;
    swap(values[i - 1], values[j]);
  }
}

}  // namespace shuffle_bandits

#endif  // SHUFFLE_BANDITS_RANDOM_H_
