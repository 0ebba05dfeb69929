#include "tailcomb/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tailcomb;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}),
            (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}),
            (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, PureFunctionOfSeedStreamCounter) {
  RngStream a(42, 7), b(42, 7), c(42, 8), e(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, e.next_u64());
  }
  // Resuming from a block counter reproduces the tail of the sequence.
  RngStream full(9, 3);
  for (int i = 0; i < 10; ++i) full.next_u64();
  RngStream resumed(9, 3, 5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(full.next_u64(), resumed.next_u64());
}

TEST(RngStream, UniformOpenInterval) {
  RngStream rng(1, 0);
  double sum = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngStream, NormalMoments) {
  RngStream rng(2, 0);
  constexpr int n = 400000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

// Mean of 2 Gamma(nu/2) (the chi-square with nu degrees of freedom) is nu.
TEST(RngStream, GammaMean) {
  for (double nu : {1.0, 5.0, 25.0}) {
    RngStream rng(3, static_cast<std::uint64_t>(nu));
    constexpr int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += 2.0 * rng.gamma(0.5 * nu);
    const double se = std::sqrt(2.0 * nu / n);
    EXPECT_NEAR(sum / n, nu, 4.0 * se) << "nu=" << nu;
  }
}

TEST(RngStream, ExponentialMean) {
  RngStream rng(4, 0);
  constexpr int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.exponential();
  EXPECT_NEAR(sum / n, 1.0, 4.0 / std::sqrt(n));
}
