// SPDX-License-Identifier: Apache-2.0
//
// Evolutionary architecture search under a hard cost constraint, optionally
// restricted to architectures containing a reference (CAS), and an
// exhaustive oracle for small spaces.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regnas/archspace.hpp"
#include "regnas/costmodel.hpp"
#include "regnas/evaluator.hpp"
#include "regnas/metrics.hpp"

namespace regnas {

/// Which model is the first argument of nfr when scoring a candidate.
enum class NfrOrientation {
  kReferenceFirst,  ///< nfr(reference, candidate)
  kCandidateFirst,  ///< nfr(candidate, reference)
};

struct SearchConfig {
  int generations = 20;
  int population = 100;
  double mutate_prob = 0.1;
  double mutation_ratio = 0.5;
  double parent_fraction = 0.25;
  RewardConfig reward = RewardConfig::r2();
  CostConstraint constraint = CostConstraint::flops_budget(600.0);
  bool cas_enabled = false;
  std::optional<Architecture> reference;
  std::uint64_t rng_seed = 0;

  bool crossover = true;  ///< false: the whole refill is mutations
  int max_retries = 100;  ///< rejection-sampling attempts per population slot
  NfrOrientation orientation = NfrOrientation::kReferenceFirst;
  unsigned threads = 0;  ///< scoring workers; 0 = default_threads()

  /// Throws ConfigError on any invalid field.
  void validate() const;

  std::size_t num_parents() const;
  std::size_t num_offspring() const;
  std::size_t num_mutations() const;
  std::size_t num_crossovers() const;
  /// population + (generations - 1) * offspring.
  std::size_t planned_evaluations() const;

  /// Everything except the thread count, which never affects results.
  nlohmann::json to_json() const;
};

struct ScoredCandidate {
  Architecture arch;
  std::string digest;
  double top1 = 0.0;
  std::optional<double> nfr;  ///< absent without a reference
  double reward = 0.0;
  double cost = 0.0;
};

/// Higher reward first, then lower canonical encoding.
bool better_candidate(const ScoredCandidate& a, const ScoredCandidate& b);

struct GenerationLog {
  int generation = 0;
  ScoredCandidate best;  ///< best so far
  std::vector<ScoredCandidate> population;  ///< sorted best first
};

struct SearchResult {
  ScoredCandidate best;
  std::vector<GenerationLog> log;
  /// Population slots filled over the run; equals planned_evaluations().
  std::size_t candidates_evaluated = 0;
  /// Distinct architectures scored (duplicates are memoized).
  std::size_t unique_evaluated = 0;
  /// Every distinct architecture in first-evaluation order.
  std::vector<ScoredCandidate> evaluated;
};

SearchResult evolutionary_search(const SearchConfig& cfg, const SpacePtr& space,
                                 const Evaluator& evaluator);

struct BruteForceResult {
  ScoredCandidate best;
  std::vector<ScoredCandidate> feasible;  ///< in encoding order
  std::size_t enumerated = 0;
};

/// Exact argmax over the space. The reference, when given, is used for the
/// NFR term; `cas` additionally restricts the feasible set to architectures
/// containing it. Throws InfeasibleError when nothing is feasible.
BruteForceResult brute_force_search(const SpacePtr& space, const Evaluator& evaluator,
                                    const RewardConfig& reward, const CostConstraint& constraint,
                                    const std::optional<Architecture>& reference = std::nullopt,
                                    bool cas = false, std::uint64_t cap = 1'000'000,
                                    NfrOrientation orientation = NfrOrientation::kReferenceFirst);

// --- Serialization -----------------------------------------------------------

nlohmann::json candidate_to_json(const ScoredCandidate& c);
/// One JSON object per generation, for JSONL logs.
nlohmann::json generation_to_json(const GenerationLog& g);
nlohmann::json search_summary_json(const SearchResult& r, const SearchConfig& cfg);
/// digest,encoding,top1,nfr,cost,in_subspace over every evaluated candidate.
/// in_subspace is 1 when the reference is contained; nfr and in_subspace are
/// empty without a reference.
std::string scatter_csv(const std::vector<ScoredCandidate>& candidates,
                        const std::optional<Architecture>& reference);

}  // namespace regnas
