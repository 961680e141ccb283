#pragma once

#include <cstdint>
#include <cmath>

namespace repairlab {

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that streams are
// byte-identical across platforms and standard-library versions; std::<random>
// distributions carry no such guarantee.
//
// Substreams: a generator is derived from (seed, stream id). Stream ids used
// by the failure model are fixed constants (timing / identifiers / geometric /
// strategy); per-trial generators hash the trial index into the stream id.
class Rng {
 public:
  // Documented stream ids.
  static constexpr std::uint64_t kTimingStream = 1;
  static constexpr std::uint64_t kIdStream = 2;
  static constexpr std::uint64_t kGeometricStream = 3;
  static constexpr std::uint64_t kStrategyStream = 4;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (stream * 0x9e3779b97f4a7c15ULL);
    for (auto& w : s_) w = splitmix64(x);
  }

  static std::uint64_t derive_trial_stream(std::uint64_t base_stream,
                                           std::uint64_t trial) {
    std::uint64_t x = base_stream + 0x100000001b3ULL * (trial + 1);
    return splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1 (Lemire's multiply-shift rejection).
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t l = static_cast<std::uint64_t>(m);
    if (l < n) {
      std::uint64_t t = -n % n;
      while (l < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        l = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Exponential with the given rate.
  double next_exponential(double rate) {
    return -std::log1p(-next_double()) / rate;
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace repairlab
