// Copyright 2026 The gwa Authors
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

#ifndef GWA_RNG_HPP
#define GWA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Seeded randomness helpers. std::mt19937_64 has a standard-mandated output
// sequence, and the draw/shuffle routines below avoid std::*_distribution
// (whose mapping is implementation-defined), so every value produced here is
// reproducible across compilers and platforms for a given seed.

namespace gwa {

using RngEngine = std::mt19937_64;

inline RngEngine make_engine(std::uint64_t seed) { return RngEngine(seed); }

// Derives an independent stream seed (splitmix64 step). Used when one user
// seed has to drive several generators (mask, weights, token values, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Unbiased draw from [0, n). Rejection sampling, n must be nonzero.
inline std::uint64_t bounded(RngEngine& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& values, RngEngine& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[bounded(rng, i)]);
  }
}

// Uniform double in [0, 1), 53 random bits.
inline double uniform_double(RngEngine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller. One value per call; the sibling sine value
// is discarded so consumption of engine state stays easy to reason about.
inline double standard_normal(RngEngine& rng) {
  const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace gwa

#endif  // GWA_RNG_HPP
