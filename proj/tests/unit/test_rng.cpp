#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "hiermech/rng.hpp"

using namespace hiermech;

TEST_SUITE("rng") {

TEST_CASE("raw outputs match the reference mix") {
  // Published SplitMix64 vectors for seed 0, plus two locally frozen seeds.
  Rng r0(0);
  CHECK_EQ(r0.next_u64(), 0xe220a8397b1dcdafull);
  CHECK_EQ(r0.next_u64(), 0x6e789e6aa1b965f4ull);
  CHECK_EQ(r0.next_u64(), 0x06c45d188009454full);

  Rng r1(1);
  CHECK_EQ(r1.next_u64(), 0x910a2dec89025cc1ull);
  CHECK_EQ(r1.next_u64(), 0xbeeb8da1658eec67ull);

  Rng r42(42);
  CHECK_EQ(r42.next_u64(), 0xbdd732262feb6e95ull);
}

TEST_CASE("outputs are a pure function of seed and index") {
  Rng a(987654321), b(987654321);
  for (int i = 0; i < 100; ++i) CHECK_EQ(a.next_u64(), b.next_u64());
  // i-th output is mix64(seed + (i+1) * golden), reachable without the stream.
  const std::uint64_t seed = 555;
  Rng c(seed);
  c.next_u64();
  c.next_u64();
  CHECK_EQ(c.next_u64(), Rng::mix64(seed + 3 * Rng::kGolden));
}

TEST_CASE("derive is the frozen child-seed map") {
  CHECK_EQ(Rng::derive(7, 0), 0x6268de564d05820bull);
  CHECK_EQ(Rng::derive(7, 1), 0x1d5f8287a3bc79bdull);
  CHECK_NE(Rng::derive(7, 0), Rng::derive(8, 0));
  CHECK_EQ(Rng::derive(7, 2), Rng::mix64(Rng::mix64(7) ^ 3));
}

TEST_CASE("uniform01 is the top 52 bits") {
  Rng r(0);
  CHECK_EQ(r.uniform01(), 0.8833108082136425);
  Rng s(2026);
  for (int i = 0; i < 1000; ++i) {
    const double u = s.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    // 52-bit grid: scaling by 2^52 recovers an integer, so the low mantissa
    // bit is free and halving / affine maps stay exact.
    const double scaled = std::ldexp(u, 52);
    CHECK_EQ(scaled, std::floor(scaled));
  }
}

TEST_CASE("uniform_below stays in range and is unbiased enough") {
  Rng r(31337);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t x = r.uniform_below(5);
    REQUIRE(x < 5);
    ++counts[static_cast<std::size_t>(x)];
  }
  for (int c : counts) {
    CHECK(c > 1700);  // expected 2000, sd ~40
    CHECK(c < 2300);
  }
  Rng s(1);
  CHECK_EQ(s.uniform_below(1), 0);
}

}  // TEST_SUITE
