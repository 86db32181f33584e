#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "nlirf/rng.hpp"

using nlirf::CounterRng;
using nlirf::StreamPurpose;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto out = nlirf::philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = nlirf::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                     {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = nlirf::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                     {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(CounterRng, DrawsArePureFunctionsOfTheirAddress) {
  const CounterRng a(42), b(42);
  EXPECT_EQ(a.normal(17, 3), b.normal(17, 3));
  EXPECT_EQ(a.uniform(5, 0), a.uniform(5, 0));
  const double later = a.normal(1000, 1);
  (void)a.normal(3, 0);
  EXPECT_EQ(a.normal(1000, 1), later);
}

TEST(CounterRng, StreamsAreSeparated) {
  const CounterRng base(7);
  EXPECT_NE(base.normal(0, 0), CounterRng(8).normal(0, 0));
  EXPECT_NE(base.normal(0, 0), base.with_replicate(1).normal(0, 0));
  EXPECT_NE(base.normal(0, 0), CounterRng(7, 0, StreamPurpose::kIrfReplicate).normal(0, 0));
  EXPECT_NE(base.normal(0, 0), base.normal(1, 0));
  EXPECT_NE(base.normal(0, 0), base.normal(0, 1));
}

TEST(CounterRng, UniformStaysInsideOpenInterval) {
  const CounterRng rng(1);
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t t = 0; t < 200000; ++t) {
    const double u = rng.uniform(t);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
}

TEST(CounterRng, NormalMoments) {
  const CounterRng rng(3);
  const int n = 400000;
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int t = 0; t < n; ++t) {
    for (std::uint32_t lane = 0; lane < 2; ++lane) {
      const double z = rng.normal(static_cast<std::uint64_t>(t), lane);
      s1 += z;
      s2 += z * z;
      s3 += z * z * z;
      s4 += z * z * z * z;
    }
  }
  const double m = 2.0 * n;
  // Standard errors: mean 1/sqrt(m), variance sqrt(2/m), third moment sqrt(15/m), fourth sqrt(96/m).
  EXPECT_NEAR(s1 / m, 0.0, 4.0 / std::sqrt(m));
  EXPECT_NEAR(s2 / m, 1.0, 4.0 * std::sqrt(2.0 / m));
  EXPECT_NEAR(s3 / m, 0.0, 4.0 * std::sqrt(15.0 / m));
  EXPECT_NEAR(s4 / m, 3.0, 4.0 * std::sqrt(96.0 / m));
}

TEST(CounterRng, PairedLanesAreUncorrelated) {
  const CounterRng rng(11);
  const int n = 200000;
  double sxy = 0.0;
  for (int t = 0; t < n; ++t) sxy += rng.normal(static_cast<std::uint64_t>(t), 0) * rng.normal(static_cast<std::uint64_t>(t), 1);
  EXPECT_NEAR(sxy / n, 0.0, 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(CounterRng, BelowIsUniformOverSmallRange) {
  const CounterRng rng(5);
  int counts[7] = {0};
  const int n = 70000;
  for (int t = 0; t < n; ++t) ++counts[rng.below(7, static_cast<std::uint64_t>(t))];
  for (int c : counts) {
    // Binomial(70000, 1/7): sd ~ 92.6.
    EXPECT_NEAR(c, 10000, 5 * 92.6);
  }
}
