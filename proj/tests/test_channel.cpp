#include <random>

#include <gtest/gtest.h>

#include "plc/channel.hpp"

using namespace plc;

namespace {
SignStream random_stream(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SignStream s(n);
  for (auto& b : s) b = {(rng() & 1u) != 0, (rng() & 2u) != 0};
  return s;
}
}  // namespace

TEST(Corrupt, ZeroRateIsIdentity) {
  const auto s = random_stream(1000, 1);
  const auto r = corrupt(s, {0.0, 5});
  EXPECT_EQ(r.corrupted, s);
  for (auto f : r.flips) EXPECT_EQ(f, (FlipIndicator{false, false}));
}

TEST(Corrupt, HalfRateStatistics) {
  const auto s = random_stream(50000, 2);  // 10^5 bits
  const auto r = corrupt(s, {0.5, 7});
  std::size_t flips = 0;
  for (auto f : r.flips) flips += std::size_t(f.re) + std::size_t(f.im);
  EXPECT_NEAR(double(flips) / 1e5, 0.5, 0.01);
}

TEST(Corrupt, IndicatorRelationHoldsExactly) {
  const auto s = random_stream(5000, 3);
  const auto r = corrupt(s, {0.1, 9});
  for (std::size_t m = 0; m < s.size(); ++m) {
    EXPECT_EQ(s[m].re(), r.corrupted[m].re() * (1.0 - 2.0 * r.flips[m].re));
    EXPECT_EQ(s[m].im(), r.corrupted[m].im() * (1.0 - 2.0 * r.flips[m].im));
  }
}

TEST(Corrupt, SingleRealFlip) {
  const SignStream s{{true, false}};
  // Find a seed that flips exactly the real bit at p = 0.5.
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const auto r = corrupt(s, {0.5, seed});
    if (r.flips[0].re && !r.flips[0].im) {
      EXPECT_EQ(r.corrupted[0].re(), -s[0].re());
      EXPECT_EQ(r.corrupted[0].im(), s[0].im());
      return;
    }
  }
  FAIL() << "no seed produced a single real flip";
}

TEST(Corrupt, DeterministicAndValidated) {
  const auto s = random_stream(300, 4);
  EXPECT_EQ(corrupt(s, {0.2, 11}).corrupted, corrupt(s, {0.2, 11}).corrupted);
  EXPECT_THROW(corrupt(s, {0.6, 1}), invalid_argument);
  EXPECT_THROW(corrupt(s, {-0.1, 1}), invalid_argument);
}
