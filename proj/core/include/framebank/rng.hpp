// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

namespace framebank::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Stream tags keep draws for unrelated quantities independent even when the
// frame/layer/head/token indices coincide.
enum class Tag : std::uint64_t {
  kKeyFrameJitter = 1,
  kKeyTokenSpread = 2,
  kKeyNoise = 3,
  kValue = 4,
  kPosition = 5,
  kMetaQ = 6,
  kMetaS = 7,
  kPose = 8,
  kClusterCenter = 9,
  kProbe = 10,
  kInstance = 11,
};

// Derives a stream key from a seed, a tag and up to four indices. The value
// sequence of a stream is a pure function of (key, counter), so any draw is
// reproducible without replaying the rest of the stream. This is the only
// source of randomness in the project.
inline std::uint64_t derive_key(std::uint64_t seed, Tag tag, std::uint64_t a = 0,
                                std::uint64_t b = 0, std::uint64_t c = 0,
                                std::uint64_t d = 0) {
  std::uint64_t h = splitmix64(seed ^ (static_cast<std::uint64_t>(tag) * kGolden));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  h = splitmix64(h ^ d);
  return h;
}

// Counter-based generator over splitmix64.
class Counter {
 public:
  explicit Counter(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return splitmix64(key_ + kGolden * ++ctr_); }

  // Uniform in (0, 1]; never returns 0 so it is safe under log().
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Box-Muller; always consumes exactly two uniforms per call.
  double next_gaussian() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  static constexpr double kTwoPi = 6.28318530717958647692;
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace framebank::rng
