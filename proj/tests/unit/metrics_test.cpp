// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "regnas/errors.hpp"
#include "regnas/metrics.hpp"
#include "regnas/rng.hpp"

namespace regnas {
namespace {

using CV = CorrectnessVector;

CV random_vector(Rng& rng, std::size_t n, double p) {
  CV c(n);
  for (std::size_t i = 0; i < n; ++i) c.set(i, rng.bernoulli(p));
  return c;
}

TEST(Top1, HandCounts) {
  EXPECT_DOUBLE_EQ(top1(CV::from_string("1111")), 1.0);
  EXPECT_DOUBLE_EQ(top1(CV::from_string("1110")), 0.75);
  EXPECT_DOUBLE_EQ(top1(CV::from_string("0000")), 0.0);
  EXPECT_THROW(top1(CV{}), ConfigError);
}

TEST(Flips, HandEnumeration) {
  const auto ref = CV::from_string("1110");
  const auto target = CV::from_string("1011");
  EXPECT_DOUBLE_EQ(nfr(ref, target), 0.25);
  EXPECT_DOUBLE_EQ(pfr(ref, target), 0.25);
  EXPECT_DOUBLE_EQ(top1(target) - top1(ref), pfr(ref, target) - nfr(ref, target));
  EXPECT_EQ(negative_flip_count(ref, target), 1u);
  EXPECT_EQ(positive_flip_count(ref, target), 1u);
}

TEST(Flips, SelfComparisonIsZero) {
  const auto c = CV::from_string("1011001");
  EXPECT_DOUBLE_EQ(nfr(c, c), 0.0);
  EXPECT_DOUBLE_EQ(pfr(c, c), 0.0);
}

TEST(Flips, AllWrongReferenceCannotRegress) {
  EXPECT_DOUBLE_EQ(nfr(CV::from_string("0000"), CV::from_string("0101")), 0.0);
}

TEST(Flips, LengthMismatchIsEvaluatorError) {
  EXPECT_THROW(nfr(CV::from_string("101"), CV::from_string("1010")), EvaluatorError);
}

TEST(Flips, IdentityAndBoundsOnRandomPairs) {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(300);
    const auto r = random_vector(rng, n, rng.uniform01());
    const auto t = random_vector(rng, n, rng.uniform01());
    const auto nf = static_cast<std::int64_t>(negative_flip_count(r, t));
    const auto pf = static_cast<std::int64_t>(positive_flip_count(r, t));
    ASSERT_EQ(static_cast<std::int64_t>(t.count_correct()) -
                  static_cast<std::int64_t>(r.count_correct()),
              pf - nf);
    ASSERT_LE(nf, std::min<std::int64_t>(static_cast<std::int64_t>(r.count_correct()),
                                         static_cast<std::int64_t>(n - t.count_correct())));
    ASSERT_LE(nfr(r, t), std::min(top1(r), 1.0 - top1(t)) + 1e-15);
    ASSERT_GE(nfr(r, t), 0.0);
  }
}

TEST(CorrectnessVector, PackedRoundTrip) {
  Rng rng(3);
  for (std::size_t n : {1u, 7u, 8u, 9u, 63u, 64u, 65u, 1000u}) {
    const auto c = random_vector(rng, n, 0.5);
    const auto bytes = c.packed();
    EXPECT_EQ(bytes.size(), (n + 7) / 8);
    EXPECT_EQ(CV::from_packed(n, bytes), c);
  }
}

TEST(CorrectnessVector, PackingIsLsbFirst) {
  const auto c = CV::from_string("100000001");
  const auto bytes = c.packed();
  ASSERT_EQ(bytes.size(), 2u);
  EXPECT_EQ(bytes[0], 0x01);
  EXPECT_EQ(bytes[1], 0x01);
}

TEST(CorrectnessVector, RejectsBadInput) {
  EXPECT_THROW(CV::from_string("10x1"), ConfigError);
  EXPECT_THROW(CV(0), ConfigError);
  const std::vector<std::uint8_t> one_byte{0xff};
  EXPECT_THROW(CV::from_packed(9, one_byte), ConfigError);
}

TEST(Reward, Presets) {
  EXPECT_DOUBLE_EQ(reward(0.7711, 0.0251, RewardConfig::r0()), 0.7711);
  EXPECT_NEAR(reward(0.7711, 0.0251, RewardConfig::r2()), 0.7460, 1e-12);
  EXPECT_DOUBLE_EQ(reward(0.9, 0.0, RewardConfig::r1()), 0.0);
  EXPECT_DOUBLE_EQ(reward(0.9, 0.1, RewardConfig::r1()), -0.1);
}

TEST(Reward, Parse) {
  EXPECT_EQ(RewardConfig::parse("r0"), RewardConfig::r0());
  EXPECT_EQ(RewardConfig::parse("R2"), RewardConfig::r2());
  EXPECT_EQ(RewardConfig::parse("1,0.5"), (RewardConfig{1.0, 0.5}));
  for (const char* bad : {"r3", "0,0", "-1,1", "1", "a,b", "1,inf"}) {
    EXPECT_THROW(RewardConfig::parse(bad), ConfigError) << bad;
  }
}

TEST(NfrMatrixTest, IdenticalModelsGiveZeroMatrix) {
  const auto c = CV::from_string("1101");
  const auto m = nfr_matrix({c, c});
  EXPECT_DOUBLE_EQ(m.nfr[0][1], 0.0);
  EXPECT_DOUBLE_EQ(m.nfr[1][0], 0.0);
  EXPECT_DOUBLE_EQ(m.mean_pairwise_nfr(), 0.0);
}

TEST(NfrMatrixTest, ThreeHandBuiltModels) {
  // a = 1110 (0.75), b = 1011 (0.75), c = 0100 (0.25).
  // (a, b): tie, a first -> a correct & b wrong at sample 1 -> 1/4.
  // (a, c): c lower -> c correct & a wrong: none -> 0.
  // (b, c): c lower -> c correct & b wrong at sample 1 -> 1/4.
  const auto m = nfr_matrix(
      {CV::from_string("1110"), CV::from_string("1011"), CV::from_string("0100")},
      {"a", "b", "c"});
  const std::vector<std::vector<double>> expected = {
      {0.0, 0.25, 0.0}, {0.25, 0.0, 0.25}, {0.0, 0.25, 0.0}};
  EXPECT_EQ(m.nfr, expected);
  EXPECT_EQ(m.flips[0][1], 1u);
  EXPECT_DOUBLE_EQ(m.mean_pairwise_nfr(), 0.5 / 3.0);
  EXPECT_EQ(m.to_csv(),
            "model,a,b,c\n"
            "a,0.750000,0.250000,0.000000\n"
            "b,0.250000,0.750000,0.250000\n"
            "c,0.000000,0.250000,0.250000\n");
}

TEST(NfrMatrixTest, LowerTop1ModelIsFirstArgument) {
  const auto low = CV::from_string("1000");
  const auto high = CV::from_string("0111");
  EXPECT_DOUBLE_EQ(pairwise_nfr(low, high), nfr(low, high));
  EXPECT_DOUBLE_EQ(pairwise_nfr(high, low), nfr(low, high));
}

TEST(RelativeChange, NfrColumnExample) {
  const double rc = relative_change(2.16, 3.25);
  EXPECT_NEAR(rc, -0.335385, 1e-6);
  EXPECT_DOUBLE_EQ(std::round(rc * 1000.0) / 10.0, -33.5);
}

TEST(RelativeChange, Top1ColumnExample) {
  const double rc = relative_change(78.80, 79.21);
  EXPECT_NEAR(rc, -0.005176, 1e-6);
  EXPECT_DOUBLE_EQ(std::trunc(rc * 10000.0) / 100.0, -0.51);
}

TEST(RelativeChange, EqualAndZeroBaseline) {
  EXPECT_DOUBLE_EQ(relative_change(0.4, 0.4), 0.0);
  EXPECT_THROW(relative_change(1.0, 0.0), ConfigError);
}

}  // namespace
}  // namespace regnas
