#include "heavytail/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

using heavytail::CounterRng;
using Block = std::array<std::uint32_t, 4>;

// Reference vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  EXPECT_EQ(CounterRng::philox_block({0, 0, 0, 0}, {0, 0}),
            (Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerAllOnes) {
  EXPECT_EQ(CounterRng::philox_block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                     {0xffffffff, 0xffffffff}),
            (Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  EXPECT_EQ(CounterRng::philox_block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                     {0xa4093822, 0x299f31d0}),
            (Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, SameSeedAndStreamRepeat) {
  CounterRng a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(CounterRng, StreamsAndSeedsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (std::uint64_t stream = 0; stream < 64; ++stream) {
      CounterRng r(seed, stream);
      firsts.insert(r());
    }
  }
  EXPECT_EQ(firsts.size(), 4u * 64u);
}

TEST(CounterRng, DiscardSkipsWholeBlocks) {
  CounterRng a(3, 1), b(3, 1);
  for (int i = 0; i < 10; ++i) a();
  b.discard_blocks(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(CounterRng, UniformIsInOpenClosedUnitInterval) {
  CounterRng r(9, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform_open_closed();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
    sum += u;
  }
  // Mean 1/2, sd of the mean sqrt(1/12 / n).
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(CounterRng, WorksWithStandardDistributions) {
  CounterRng r(1, 2);
  std::normal_distribution<double> normal;
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = normal(r);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.03);
}

TEST(CounterRng, TuningStreamsAreDisjointFromTrialIndices) {
  EXPECT_NE(heavytail::tuning_stream(0), 0u);
  EXPECT_GE(heavytail::tuning_stream(5), std::uint64_t{1} << 63);
}
