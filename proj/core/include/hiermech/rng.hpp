#pragma once

#include <cstdint>

namespace hiermech {

// Counter-based SplitMix64 stream.
//
// The i-th raw output (0-based) is exactly mix64(seed + (i+1) * kGolden), a
// pure function of the 64-bit seed and the index, so any run can be replayed
// from its seed alone and streams can be split without sharing state.
class Rng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // SplitMix64 finalizer: bijective 64-bit mix.
  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  // Seed for a named child stream. Children of distinct (seed, index) pairs
  // are distinct, and a child's outputs are unrelated to the parent's.
  static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ (index + 1));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform on {0, 2^-52, 2*2^-52, ..., 1 - 2^-52}.
  //
  // Deliberately 52-bit (not 53): every value has a zero low mantissa bit, so
  // halving, averaging with 1, and the affine maps used elsewhere in the
  // library stay exactly representable and replays are bit-identical.
  double uniform01() {
    return static_cast<double>(next_u64() >> 12) * 0x1.0p-52;
  }

  // Unbiased integer in [0, n), n >= 1. Lemire's multiply-shift with
  // rejection; fixed-width 128-bit arithmetic, identical on all platforms.
  std::uint64_t uniform_below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t floor = (0 - n) % n;
      while (lo < floor) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace hiermech
