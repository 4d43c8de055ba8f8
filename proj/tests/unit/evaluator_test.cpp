// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "regnas/errors.hpp"
#include "regnas/evaluator.hpp"
#include "regnas/rng.hpp"
#include "regnas/search.hpp"
#include "stats.hpp"

namespace regnas {
namespace {

using testing::fixture_space;
using testing::space_from_json;

SyntheticParams params(std::uint64_t seed, double sigma, std::size_t n = 1000, double beta = 1.0,
                       int block = 8) {
  SyntheticParams p;
  p.seed = seed;
  p.sigma = sigma;
  p.n_samples = n;
  p.beta = beta;
  p.channel_block = block;
  return p;
}

// Margin recomputed from the documented construction.
double oracle_margin(const SyntheticParams& p, const Architecture& a, int block, std::size_t i) {
  const double cap = static_cast<double>(weight_count(a)) /
                     static_cast<double>(weight_count(a.space().maximal()));
  const double d = to_unit_interval(hash_words(p.seed, {1, i}));
  if (p.sigma == 0.0) return p.beta * cap - d;
  const auto units = weight_units(a, block);
  double sum = 0.0;
  for (const auto& u : units) {
    sum += (to_unit_interval(hash_words(p.seed, {2, i, u.key()})) + 0x1.0p-54 - 0.5) *
           std::sqrt(12.0);
  }
  return p.beta * cap - d + p.sigma * (sum / std::sqrt(static_cast<double>(units.size())));
}

TEST(Synthetic, MarginMatchesConstruction) {
  const auto sp = fixture_space("oracle_space.json");
  const auto p = params(11, 0.3);
  const SyntheticSupernet ev(sp, p);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = random_sample(sp, s);
    const auto all = ev.margins(a);
    for (std::size_t i : {0u, 1u, 17u, 999u}) {
      EXPECT_EQ(ev.margin(a, i), oracle_margin(p, a, ev.channel_block(), i));
      EXPECT_EQ(all[i], ev.margin(a, i));
    }
  }
}

TEST(Synthetic, NoiseFreeMarginIsCapacityMinusDifficulty) {
  const auto sp = fixture_space("oracle_space.json");
  const SyntheticSupernet ev(sp, params(5, 0.0));
  const auto a = random_sample(sp, 3);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(ev.margin(a, i), ev.capacity(a) - ev.difficulty(i));
  }
}

TEST(Synthetic, HalfCapacityIsCorrectBelowDifficultyHalf) {
  const auto sp = space_from_json(R"({"input_resolution": 4, "stem_channels": 8, "stages": [
      {"depth_choices": [1], "kernel_choices": [3], "width_choices": [8, 16]}]})");
  const SyntheticSupernet ev(sp, params(9, 0.0, 2000));
  const Architecture half(sp, {{{3, 8}}});
  ASSERT_DOUBLE_EQ(ev.capacity(half), 0.5);
  const auto bits = ev.evaluate(half);
  for (std::size_t i = 0; i < 2000; ++i) EXPECT_EQ(bits.get(i), ev.difficulty(i) < 0.5);
}

TEST(Synthetic, LargeGainMakesMaximalAllCorrect) {
  const auto sp = fixture_space("oracle_space.json");
  const SyntheticSupernet ev(sp, params(1, 0.0, 500, 2.0));
  EXPECT_EQ(ev.evaluate(sp->maximal()).count_correct(), 500u);
}

TEST(Synthetic, RepeatedCallsAreBitIdentical) {
  const auto sp = fixture_space("trend_space.json");
  const SyntheticSupernet ev(sp, params(3, 0.5, 4000, 1.0, 16));
  const auto a = random_sample(sp, 8);
  EXPECT_EQ(ev.evaluate(a), ev.evaluate(a));
  EXPECT_EQ(ev.margin(a, 123), ev.margin(a, 123));
  const SyntheticSupernet twin(sp, params(3, 0.5, 4000, 1.0, 16));
  EXPECT_EQ(twin.evaluate(a), ev.evaluate(a));
}

TEST(Synthetic, EvaluationIsAFunctionOfTheUnitSet) {
  const auto sp = fixture_space("tiny_space.json");
  const SyntheticSupernet ev(sp, params(2, 0.3, 256));
  std::map<std::vector<WeightUnit>, CorrectnessVector> by_units;
  for (const auto& a : enumerate_architectures(sp)) {
    const auto units = weight_units(a, ev.channel_block());
    const auto bits = ev.evaluate(a);
    const auto [it, inserted] = by_units.emplace(units, bits);
    if (!inserted) {
      EXPECT_EQ(it->second, bits);
    }
  }
}

TEST(Synthetic, HashedAndTabulatedDeviatesAgree) {
  // Block 1 makes the unit table large enough that 128 samples exceed the
  // precomputed-deviate limit while 64 do not.
  const auto sp = fixture_space("trend_space.json");
  const SyntheticSupernet dense(sp, params(21, 0.3, 64, 1.0, 1));
  const SyntheticSupernet hashed(sp, params(21, 0.3, 128, 1.0, 1));
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto a = random_sample(sp, s);
    const auto md = dense.margins(a);
    const auto mh = hashed.margins(a);
    for (std::size_t i = 0; i < 64; ++i) ASSERT_EQ(md[i], mh[i]);
  }
}

TEST(Synthetic, DeviatesHaveUnitMoments) {
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = SyntheticSupernet::deviate(4, static_cast<std::uint64_t>(i), 77);
    sum += g;
    sq += g * g;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Synthetic, SharingWeightsMeansAgreeing) {
  const auto sp = fixture_space("oracle_space.json");
  const SyntheticSupernet ev(sp, params(77, 0.3, 10000));
  std::vector<double> fraction, churn;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto a = random_sample(sp, 2 * i);
    const auto b = random_sample(sp, 2 * i + 1);
    const auto ca = ev.evaluate(a);
    const auto cb = ev.evaluate(b);
    const auto& lower = ca.count_correct() <= cb.count_correct() ? a : b;
    fraction.push_back(static_cast<double>(shared_weight_count(a, b)) /
                       static_cast<double>(weight_count(lower)));
    churn.push_back(pairwise_nfr(ca, cb));
  }
  const auto c = testing::spearman(fraction, churn);
  EXPECT_LT(c.rho, 0.0);
  EXPECT_LT(c.p_negative, 0.01);
}

TEST(Synthetic, ParamsValidateAndMerge) {
  SyntheticParams base;
  base.seed = 4;
  const auto p = SyntheticParams::from_json({{"sigma", 0.5}}, base);
  EXPECT_EQ(p.seed, 4u);
  EXPECT_EQ(p.sigma, 0.5);
  EXPECT_EQ(SyntheticParams::from_json(p.to_json()).to_json(), p.to_json());
  for (const auto& bad : {nlohmann::json{{"n_samples", 0}}, nlohmann::json{{"sigma", -1.0}},
                          nlohmann::json{{"channel_block", 0}}, nlohmann::json{{"beta", -0.5}}}) {
    EXPECT_THROW(SyntheticParams::from_json(bad).validate(), ConfigError) << bad.dump();
  }
}

TEST(Synthetic, ForeignArchitectureIsRejected) {
  const SyntheticSupernet ev(fixture_space("tiny_space.json"), params(1, 0.3, 10));
  EXPECT_THROW(ev.evaluate(fixture_space("oracle_space.json")->maximal()), ConfigError);
}

class TableTest : public ::testing::Test {
 protected:
  SpacePtr sp = fixture_space("tiny_space.json");
  std::shared_ptr<const SyntheticSupernet> synthetic =
      std::make_shared<SyntheticSupernet>(sp, params(6, 0.3, 300));
};

TEST_F(TableTest, TabulatedSpaceRoundTrips) {
  const auto models = tabulate(sp, *synthetic);
  ASSERT_EQ(models.size(), 16u);
  const testing::TempDir dir("table");
  write_predictions_binary(dir / "t.bin", models);
  const auto table = std::make_shared<const PredictionTable>(PredictionTable::load(sp, dir / "t.bin"));
  const TableEvaluator ev(table);
  EXPECT_EQ(ev.n_samples(), 300u);
  for (const auto& a : enumerate_architectures(sp)) EXPECT_EQ(ev.evaluate(a), synthetic->evaluate(a));
}

TEST_F(TableTest, SupportsBruteForceSearch) {
  const TableEvaluator ev(std::make_shared<const PredictionTable>(sp, tabulate(sp, *synthetic)));
  const auto via_table =
      brute_force_search(sp, ev, RewardConfig::r0(), CostConstraint::flops_budget(1.0));
  const auto direct =
      brute_force_search(sp, *synthetic, RewardConfig::r0(), CostConstraint::flops_budget(1.0));
  EXPECT_EQ(via_table.best.arch, direct.best.arch);
  EXPECT_EQ(via_table.best.reward, direct.best.reward);
}

TEST_F(TableTest, MissNamesTheDigest) {
  auto models = tabulate(sp, *synthetic);
  const auto missing = architecture_from_encoding_string(sp, models.back().name);
  models.pop_back();
  const PredictionTable table(sp, models);
  EXPECT_FALSE(table.contains(missing));
  try {
    table.lookup(missing);
    FAIL() << "expected an evaluator error";
  } catch (const EvaluatorError& e) {
    EXPECT_NE(std::string(e.what()).find(missing.digest()), std::string::npos);
  }
}

TEST_F(TableTest, RejectsDuplicatesAndForeignEncodings) {
  auto models = tabulate(sp, *synthetic);
  auto dup = models;
  dup.push_back(dup.front());
  EXPECT_THROW(PredictionTable(sp, dup), ConfigError);
  auto comma = models;
  comma.push_back({"1,3,8,1,3,8", comma.front().bits});
  EXPECT_THROW(PredictionTable(sp, comma), ConfigError);
  auto foreign = models;
  foreign.push_back({"2-3-8-1-3-8", foreign.front().bits});
  EXPECT_THROW(PredictionTable(sp, foreign), ConfigError);
}

TEST_F(TableTest, RejectsLengthMismatch) {
  auto models = tabulate(sp, *synthetic);
  models.back().bits = CorrectnessVector(10);
  EXPECT_THROW(PredictionTable(sp, models), Error);
}

TEST(Caching, IsTransparent) {
  const auto sp = fixture_space("oracle_space.json");
  auto inner = std::make_shared<SyntheticSupernet>(sp, params(8, 0.3, 500));
  const CachingEvaluator cache(inner);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto a = random_sample(sp, s % 10);
    EXPECT_EQ(cache.evaluate(a), inner->evaluate(a));
  }
  EXPECT_LE(cache.cached(), 10u);
  EXPECT_EQ(cache.describe(), inner->describe());
}

}  // namespace
}  // namespace regnas
