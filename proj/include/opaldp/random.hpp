// Copyright 2026 The opaldp Authors
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

#ifndef OPALDP_RANDOM_HPP_
#define OPALDP_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>

#include "opaldp/error.hpp"

namespace opaldp {

inline constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable 64-bit identifier for a text key (FNV-1a, then a SplitMix64
// finalizer). Used to derive one stream per partition label; unlike
// std::hash it is identical across platforms and builds.
inline constexpr std::uint64_t StreamIdFor(std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : key) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(h);
}

// Seedable, splittable generator. A (seed, stream_id) pair fully determines
// the draw sequence. All floating-point draws are built from raw 64-bit
// engine output, never from std:: distributions, whose algorithms are
// implementation-defined.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_id_(stream_id),
        engine_(SplitMix64(seed ^ SplitMix64(stream_id ^ 0x5851f42d4c957f2dULL))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Child stream sharing this seed; distinct indices give distinct streams.
  RandomSource Substream(std::uint64_t index) const {
    return RandomSource(seed_, SplitMix64(stream_id_ + SplitMix64(index)));
  }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double UniformPositive() {
    return static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer on [0, n), unbiased by rejection.
  std::uint64_t UniformInt(std::uint64_t n) {
    if (n == 0) throw InvalidArgumentError("UniformInt range must be nonempty");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = NextU64();
    } while (x >= limit);
    return x % n;
  }

  // Standard exponential (rate 1).
  double Exponential() { return -std::log(UniformPositive()); }

  // Standard normal via Box-Muller; one output per call.
  double Normal() {
    const double r = std::sqrt(-2.0 * std::log(UniformPositive()));
    return r * std::cos(2.0 * std::numbers::pi * Uniform());
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Draw from Laplace(0, scale), density exp(-|x|/scale) / (2 scale). One
// engine word supplies both the magnitude (top 53 bits) and the sign (bit 0).
inline double LaplaceSample(RandomSource& source, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw InvalidArgumentError("Laplace scale must be positive and finite");
  }
  const std::uint64_t bits = source.NextU64();
  const double u = static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
  const double magnitude = -std::log(u) * scale;
  return (bits & 1U) ? magnitude : -magnitude;
}

}  // namespace opaldp

#endif  // OPALDP_RANDOM_HPP_
