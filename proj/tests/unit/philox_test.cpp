// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "sublora/philox.hpp"

namespace sublora {
namespace {

// Known-answer vectors published with the Random123 library.
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerOnes) {
  const PhiloxCounter out =
      philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  const PhiloxCounter out = philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                          {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, PositionKeyedDrawsIgnoreOrder) {
  const CounterRng rng(42, Stream::onehot_index);
  const double late = rng.uniform(1000);
  for (std::uint64_t p = 0; p < 1000; ++p) (void)rng.uniform(p);
  EXPECT_EQ(rng.uniform(1000), late);
}

TEST(Philox, StreamsAndSeedsDiffer) {
  const CounterRng a(1, Stream::onehot_index), b(1, Stream::theta_init), c(2, Stream::onehot_index);
  EXPECT_NE(a.bits64(0), b.bits64(0));
  EXPECT_NE(a.bits64(0), c.bits64(0));
}

TEST(Philox, UniformInUnitInterval) {
  RngStream s(7, Stream::task_data);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Philox, NormalMoments) {
  RngStream s(9, Stream::model_weights);
  double m1 = 0.0, m2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
  }
  EXPECT_NEAR(m1 / n, 0.0, 0.02);
  EXPECT_NEAR(m2 / n, 1.0, 0.03);
}

TEST(Philox, BelowIsInRangeAndCoversAll) {
  const CounterRng rng(3, Stream::fastfood_perm);
  std::set<std::uint64_t> seen;
  for (std::uint64_t p = 0; p < 2000; ++p) {
    const auto v = rng.below(p, 7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
  for (std::uint64_t p = 0; p < 100; ++p) EXPECT_EQ(rng.below(p, 1), 0u);
}

TEST(Philox, DeriveSeedSpreads) {
  std::set<std::uint64_t> out;
  for (std::uint64_t s = 0; s < 100; ++s) out.insert(derive_seed(123, s));
  EXPECT_EQ(out.size(), 100u);
  EXPECT_EQ(derive_seed(5, 6), derive_seed(5, 6));
}

}  // namespace
}  // namespace sublora
