// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "regnas/archspace.hpp"
#include "regnas/errors.hpp"

namespace regnas {
namespace {

using testing::fixture_space;
using testing::space_from_json;

SpacePtr two_choice_space() {
  return space_from_json(R"({"input_resolution": 8, "stem_channels": 8, "stages": [
      {"depth_choices": [1, 2], "kernel_choices": [3, 5], "width_choices": [8, 16]},
      {"depth_choices": [1, 2], "kernel_choices": [3, 5], "width_choices": [8, 16]}]})");
}

TEST(RandomSample, SinglePointSpace) {
  const auto sp = space_from_json(R"({"stages": [{"depth_choices": [1], "kernel_choices": [3],
      "width_choices": [8]}]})");
  EXPECT_EQ(random_sample(sp, 1), sp->maximal());
}

TEST(RandomSample, DeterministicPerSeed) {
  const auto sp = fixture_space("trend_space.json");
  EXPECT_EQ(random_sample(sp, 17), random_sample(sp, 17));
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s) differing += !(random_sample(sp, s) == random_sample(sp, s + 100));
  EXPECT_GT(differing, 15);
}

TEST(RandomSample, ChoiceFrequenciesAreUniform) {
  const auto sp = two_choice_space();
  const int n = 10000;
  std::map<int, int> depth0, kernel0, width0;
  for (int i = 0; i < n; ++i) {
    const auto a = random_sample(sp, static_cast<std::uint64_t>(i));
    ++depth0[a.depth(0)];
    ++kernel0[a.layer(0, 0).kernel];
    ++width0[a.layer(0, 0).width];
  }
  const double sd = std::sqrt(n * 0.25);
  for (const auto* counts : {&depth0, &kernel0, &width0}) {
    ASSERT_EQ(counts->size(), 2u);
    for (const auto& [value, count] : *counts) EXPECT_LT(std::fabs(count - n / 2.0), 5 * sd);
  }
}

TEST(ConstrainedSample, MaximalReferenceForcesMaximal) {
  const auto sp = fixture_space("oracle_space.json");
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(constrained_sample(sp->maximal(), s), sp->maximal());
  }
}

TEST(ConstrainedSample, DepthNeverBelowReference) {
  const auto sp = space_from_json(R"({"stages": [{"depth_choices": [2, 3, 4],
      "kernel_choices": [3, 5], "width_choices": [8, 16]}]})");
  const Architecture ref(sp, {{{3, 8}, {3, 8}}});
  std::map<int, int> depths;
  for (std::uint64_t s = 0; s < 3000; ++s) {
    const auto a = constrained_sample(ref, s);
    ++depths[a.depth(0)];
    ASSERT_TRUE(contains(ref, a));
  }
  EXPECT_EQ(depths.size(), 3u);
  EXPECT_EQ(depths.begin()->first, 2);
}

TEST(Mutate, ZeroProbabilityIsIdentity) {
  const auto sp = fixture_space("trend_space.json");
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = random_sample(sp, s);
    EXPECT_EQ(mutate(a, 0.0, s + 1), a);
  }
}

TEST(Mutate, SinglePointSpaceIsFixed) {
  const auto sp = space_from_json(R"({"stages": [{"depth_choices": [2], "kernel_choices": [3],
      "width_choices": [8]}]})");
  EXPECT_EQ(mutate(sp->maximal(), 1.0, 3), sp->maximal());
}

TEST(Mutate, FullProbabilityChangesMostGenes) {
  const auto sp = fixture_space("trend_space.json");
  int changed = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto a = random_sample(sp, s);
    changed += !(mutate(a, 1.0, s) == a);
  }
  EXPECT_GT(changed, 90);
}

TEST(ConstrainedMutate, ClosedUnderContainment) {
  const auto sp = fixture_space("trend_space.json");
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto ref = random_sample(sp, s);
    const auto a = constrained_sample(ref, s + 1);
    ASSERT_TRUE(contains(ref, constrained_mutate(ref, a, 0.3, s + 2)));
  }
}

TEST(ConstrainedMutate, RejectsParentOutsideSubspace) {
  const auto sp = fixture_space("oracle_space.json");
  EXPECT_THROW(constrained_mutate(sp->maximal(), sp->minimal(), 0.1, 1), ConfigError);
}

TEST(Crossover, SelfCrossoverIsIdentity) {
  const auto sp = fixture_space("trend_space.json");
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = random_sample(sp, s);
    EXPECT_EQ(crossover(a, a, s), a);
  }
}

TEST(Crossover, ParentsDifferingInOneStageYieldOneOfThem) {
  const auto sp = two_choice_space();
  const Architecture a(sp, {{{3, 8}}, {{5, 16}, {3, 8}}});
  const Architecture b(sp, {{{3, 8}}, {{3, 8}}});
  int as = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const auto c = crossover(a, b, s);
    ASSERT_TRUE(c == a || c == b);
    as += c == a;
  }
  EXPECT_GT(as, 120);
  EXPECT_LT(as, 280);
}

TEST(Crossover, StagesComeWholeFromOneParent) {
  const auto sp = fixture_space("trend_space.json");
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto a = random_sample(sp, 2 * s);
    const auto b = random_sample(sp, 2 * s + 1);
    const auto c = crossover(a, b, s);
    for (std::size_t st = 0; st < sp->num_stages(); ++st) {
      ASSERT_TRUE(c.stages()[st] == a.stages()[st] || c.stages()[st] == b.stages()[st]);
    }
  }
}

TEST(ConstrainedCrossover, ClosedUnderContainment) {
  const auto sp = fixture_space("trend_space.json");
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto ref = random_sample(sp, s);
    const auto a = constrained_sample(ref, s + 1);
    const auto b = constrained_sample(ref, s + 2);
    ASSERT_TRUE(contains(ref, constrained_crossover(ref, a, b, s + 3)));
  }
}

}  // namespace
}  // namespace regnas
