// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <span>

#include "regnas/archspace.hpp"
#include "regnas/errors.hpp"
#include "regnas/rng.hpp"

namespace regnas {

namespace {

/// Suffix of an ascending choice list holding values >= lo.
std::span<const int> at_least(const std::vector<int>& choices, int lo) {
  auto it = std::lower_bound(choices.begin(), choices.end(), lo);
  return {it, choices.end()};
}

int pick(std::span<const int> choices, Rng& rng) {
  return choices[static_cast<std::size_t>(rng.uniform_index(choices.size()))];
}

// Lower bounds imposed by an optional reference on stage s.
struct StageBounds {
  int min_depth = 0;
  const Architecture::StageGenes* ref_genes = nullptr;

  int min_kernel(std::size_t j) const {
    return ref_genes && j < ref_genes->size() ? (*ref_genes)[j].kernel : 0;
  }
  int min_width(std::size_t j) const {
    return ref_genes && j < ref_genes->size() ? (*ref_genes)[j].width : 0;
  }
};

StageBounds bounds_for(const Architecture* ref, std::size_t s) {
  if (!ref) return {};
  return {ref->depth(s), &ref->stages()[s]};
}

LayerChoice fresh_layer(const StageDef& st, const StageBounds& b, std::size_t j, Rng& rng) {
  LayerChoice c;
  c.kernel = pick(at_least(st.kernel_choices, b.min_kernel(j)), rng);
  c.width = pick(at_least(st.width_choices, b.min_width(j)), rng);
  return c;
}

Architecture sample_impl(const SpacePtr& space, const Architecture* ref, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Architecture::StageGenes> stages(space->num_stages());
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StageDef& st = space->stage(s);
    const StageBounds b = bounds_for(ref, s);
    const int depth = pick(at_least(st.depth_choices, b.min_depth), rng);
    for (std::size_t j = 0; j < static_cast<std::size_t>(depth); ++j) {
      stages[s].push_back(fresh_layer(st, b, j, rng));
    }
  }
  return Architecture(space, std::move(stages));
}

Architecture mutate_impl(const Architecture& a, const Architecture* ref, double p,
                         std::uint64_t seed) {
  Rng rng(seed);
  const SearchSpace& space = a.space();
  std::vector<Architecture::StageGenes> stages = a.stages();
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StageDef& st = space.stage(s);
    const StageBounds b = bounds_for(ref, s);
    auto& genes = stages[s];
    const std::size_t old_depth = genes.size();
    std::size_t depth = old_depth;
    if (rng.bernoulli(p)) {
      depth = static_cast<std::size_t>(pick(at_least(st.depth_choices, b.min_depth), rng));
    }
    const std::size_t kept = std::min(old_depth, depth);
    genes.resize(kept);
    for (std::size_t j = 0; j < kept; ++j) {
      if (rng.bernoulli(p)) genes[j].kernel = pick(at_least(st.kernel_choices, b.min_kernel(j)), rng);
      if (rng.bernoulli(p)) genes[j].width = pick(at_least(st.width_choices, b.min_width(j)), rng);
    }
    for (std::size_t j = kept; j < depth; ++j) genes.push_back(fresh_layer(st, b, j, rng));
  }
  return Architecture(a.space_ptr(), std::move(stages));
}

Architecture crossover_impl(const Architecture& a, const Architecture& b, std::uint64_t seed) {
  if (!a.space().same_as(b.space())) {
    throw ConfigError("crossover parents belong to different search spaces");
  }
  Rng rng(seed);
  std::vector<Architecture::StageGenes> stages;
  stages.reserve(a.num_stages());
  for (std::size_t s = 0; s < a.num_stages(); ++s) {
    stages.push_back(rng.bernoulli(0.5) ? a.stages()[s] : b.stages()[s]);
  }
  return Architecture(a.space_ptr(), std::move(stages));
}

void require_contains(const Architecture& ref, const Architecture& a, const char* what) {
  if (!contains(ref, a)) {
    throw ConfigError(std::string(what) + " does not contain the reference architecture");
  }
}

}  // namespace

Architecture random_sample(const SpacePtr& space, std::uint64_t seed) {
  return sample_impl(space, nullptr, seed);
}

Architecture constrained_sample(const Architecture& ref, std::uint64_t seed) {
  return sample_impl(ref.space_ptr(), &ref, seed);
}

Architecture mutate(const Architecture& a, double mutate_prob, std::uint64_t seed) {
  return mutate_impl(a, nullptr, mutate_prob, seed);
}

Architecture constrained_mutate(const Architecture& ref, const Architecture& a,
                                double mutate_prob, std::uint64_t seed) {
  require_contains(ref, a, "mutation input");
  return mutate_impl(a, &ref, mutate_prob, seed);
}

Architecture crossover(const Architecture& a, const Architecture& b, std::uint64_t seed) {
  return crossover_impl(a, b, seed);
}

Architecture constrained_crossover(const Architecture& ref, const Architecture& a,
                                   const Architecture& b, std::uint64_t seed) {
  require_contains(ref, a, "first crossover parent");
  require_contains(ref, b, "second crossover parent");
  return crossover_impl(a, b, seed);
}

}  // namespace regnas
