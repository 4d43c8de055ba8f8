// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "regnas/drivers.hpp"
#include "regnas/errors.hpp"

namespace regnas {
namespace {

using testing::fixture_space;

class DriversTest : public ::testing::Test {
 protected:
  SpacePtr sp = fixture_space("trend_space.json");
  std::shared_ptr<const Evaluator> ev = [this] {
    SyntheticParams p;
    p.seed = 31;
    p.n_samples = 2000;
    p.channel_block = 16;
    return std::make_shared<CachingEvaluator>(std::make_shared<SyntheticSupernet>(sp, p));
  }();
  SearchConfig base = [] {
    SearchConfig c;
    c.generations = 5;
    c.population = 20;
    c.rng_seed = 8;
    return c;
  }();
};

TEST_F(DriversTest, SmallToLargeChainsContainment) {
  const auto f = family_search({15, 30, 60}, sp, *ev, base, FamilyMode::kSmallToLarge);
  ASSERT_EQ(f.members.size(), 3u);
  EXPECT_EQ(f.matrix.names, (std::vector<std::string>{"A1", "A2", "A3"}));
  EXPECT_EQ(f.configs[0].reward, RewardConfig::r0());
  EXPECT_FALSE(f.configs[0].cas_enabled);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_LT(f.members[i].best.cost, f.budgets[i]);
    EXPECT_DOUBLE_EQ(f.matrix.top1[i], f.members[i].best.top1);
  }
  const auto& a1 = f.members[0].best.arch;
  const auto& a2 = f.members[1].best.arch;
  const auto& a3 = f.members[2].best.arch;
  EXPECT_TRUE(contains(a1, a2));
  EXPECT_TRUE(contains(a2, a3));
  EXPECT_TRUE(contains(a1, a3));
  EXPECT_TRUE(f.configs[2].cas_enabled);
  EXPECT_EQ(*f.configs[2].reference, a2);
}

// Members searched independently with R0 at the same budgets and seeds churn
// more between each other than a constrained family.
TEST(FamilySearch, ChurnsLessThanIndependentR0Models) {
  const auto sp = fixture_space("trend_space.json");
  constexpr int kSeeds = 10;
  int below = 0;
  for (std::uint64_t s = 0; s < kSeeds; ++s) {
    SyntheticParams p;
    p.seed = 500 + s;
    p.n_samples = 2000;
    p.sigma = 0.5;
    p.channel_block = 16;
    const CachingEvaluator ev(std::make_shared<SyntheticSupernet>(sp, p));
    SearchConfig base;
    base.generations = 10;
    base.population = 40;
    base.rng_seed = s;
    const auto f = family_search({15, 30, 60}, sp, ev, base);
    std::vector<CorrectnessVector> independent;
    for (auto cfg : f.configs) {
      cfg.reward = RewardConfig::r0();
      cfg.reference.reset();
      cfg.cas_enabled = false;
      independent.push_back(ev.evaluate(evolutionary_search(cfg, sp, ev).best.arch));
    }
    const auto baseline = nfr_matrix(independent, {"B1", "B2", "B3"});
    bool all_below = true;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = i + 1; j < 3; ++j) {
        all_below = all_below && f.matrix.nfr[i][j] < baseline.nfr[i][j];
      }
    }
    below += all_below;
  }
  EXPECT_GE(below, 7) << below << "/" << kSeeds;
}

TEST_F(DriversTest, LargeToSmallAnchorsOnLargestBudget) {
  const auto f = family_search({15, 30}, sp, *ev, base, FamilyMode::kLargeToSmall);
  EXPECT_EQ(f.configs[1].reward, RewardConfig::r0());
  EXPECT_FALSE(f.configs[0].cas_enabled);
  EXPECT_EQ(*f.configs[0].reference, f.members[1].best.arch);
  EXPECT_EQ(family_to_json(f)["mode"], "l2s");
}

TEST_F(DriversTest, FourBudgetsGiveFourByFourMatrix) {
  const auto f = family_search({8, 15, 30, 60}, sp, *ev, base);
  EXPECT_EQ(f.matrix.nfr.size(), 4u);
  for (const auto& row : f.matrix.nfr) EXPECT_EQ(row.size(), 4u);
}

TEST_F(DriversTest, BudgetListIsValidated) {
  EXPECT_THROW(family_search({15}, sp, *ev, base), ConfigError);
  EXPECT_THROW(family_search({30, 15}, sp, *ev, base), ConfigError);
  EXPECT_THROW(family_search({15, 15}, sp, *ev, base), ConfigError);
  EXPECT_THROW(parse_family_mode("sideways"), ConfigError);
}

TEST_F(DriversTest, SweepOfOneEqualsPlainR2Search) {
  auto cfg = base;
  cfg.constraint = CostConstraint::flops_budget(15);
  const auto ref = evolutionary_search(cfg, sp, *ev).best.arch;
  cfg.constraint = CostConstraint::flops_budget(30);
  cfg.reference = ref;
  const auto rows = lambda_sweep({1.0}, sp, *ev, cfg);
  ASSERT_EQ(rows.size(), 1u);
  cfg.reward = RewardConfig::r2();
  const auto plain = evolutionary_search(cfg, sp, *ev);
  EXPECT_EQ(rows[0].top1, plain.best.top1);
  EXPECT_EQ(rows[0].nfr, *plain.best.nfr);
  EXPECT_EQ(rows[0].cost, plain.best.cost);
}

TEST_F(DriversTest, SweepTableShape) {
  auto cfg = base;
  cfg.generations = 2;
  cfg.constraint = CostConstraint::flops_budget(30);
  cfg.reference = sp->minimal();
  const std::vector<double> ratios = {0.05, 0.1, 0.2, 0.5, 1, 2, 5, 10, 20};
  const auto csv = sweep_csv(lambda_sweep(ratios, sp, *ev, cfg));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "ratio,cost,top1,nfr");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  cfg.reference.reset();
  EXPECT_THROW(lambda_sweep(ratios, sp, *ev, cfg), ConfigError);
}

TEST_F(DriversTest, TransitivityReportRoundTrips) {
  const auto r = transitivity_check(sp, *ev, base, 15, 30, 60);
  EXPECT_DOUBLE_EQ(r.gap, r.nfr_transitive - r.nfr_direct);
  EXPECT_EQ(TransitivityReport::from_json(nlohmann::json::parse(r.to_json().dump())), r);
  EXPECT_THROW(transitivity_check(sp, *ev, base, 30, 15, 60), ConfigError);
}

TEST(Transitivity, DegenerateSinglePointSpace) {
  const auto sp = testing::space_from_json(R"({"stages": [{"depth_choices": [1],
      "kernel_choices": [3], "width_choices": [8]}], "input_resolution": 4})");
  SyntheticParams p;
  p.n_samples = 100;
  const SyntheticSupernet ev(sp, p);
  SearchConfig base;
  base.generations = 2;
  base.population = 4;
  const auto r = transitivity_check(sp, ev, base, 1, 1, 1);
  EXPECT_EQ(r.nfr_direct, 0.0);
  EXPECT_EQ(r.nfr_transitive, 0.0);
}

}  // namespace
}  // namespace regnas
