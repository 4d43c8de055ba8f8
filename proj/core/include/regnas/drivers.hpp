// SPDX-License-Identifier: Apache-2.0
//
// Multi-search experiments built on evolutionary_search: model families
// searched along ascending budgets, reward-weight sweeps and the
// direct-versus-chained transitivity check.
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regnas/search.hpp"

namespace regnas {

enum class FamilyMode {
  kSmallToLarge,  ///< A1 unconstrained, each A_i constrained against A_{i-1}
  kLargeToSmall,  ///< A_n unconstrained, each smaller model scored against the next larger
};

FamilyMode parse_family_mode(const std::string& text);  // "s2l" | "l2s"
std::string to_string(FamilyMode mode);

struct FamilyResult {
  FamilyMode mode = FamilyMode::kSmallToLarge;
  std::vector<double> budgets;         ///< ascending
  std::vector<SearchResult> members;   ///< members[i] searched at budgets[i]
  std::vector<SearchConfig> configs;   ///< configuration each member ran with
  NfrMatrix matrix;                    ///< names A1..An
};

/// `base` supplies the cost kind, schedule, seed and the reward used for the
/// constrained members (R2 by default); its reference and CAS flag are
/// ignored. Member i runs with seed split_seed(base.rng_seed, 0x66616d, i).
///
/// kSmallToLarge: A1 uses R0 at budgets[0]; A_i uses base.reward with CAS
/// against A_{i-1}.
/// kLargeToSmall: A_n uses R0 at budgets.back(); A_i uses base.reward against
/// reference A_{i+1} without CAS (a smaller model cannot contain a larger one).
FamilyResult family_search(const std::vector<double>& budgets, const SpacePtr& space,
                           const Evaluator& evaluator, const SearchConfig& base,
                           FamilyMode mode = FamilyMode::kSmallToLarge);

nlohmann::json family_to_json(const FamilyResult& f);

struct SweepRow {
  double ratio = 0.0;
  double cost = 0.0;
  double top1 = 0.0;
  double nfr = 0.0;
};

/// One search per ratio with reward (1, ratio), all from base.rng_seed.
/// base must carry a reference.
std::vector<SweepRow> lambda_sweep(const std::vector<double>& ratios, const SpacePtr& space,
                                   const Evaluator& evaluator, const SearchConfig& base);

/// "ratio,cost,top1,nfr" with top1 and nfr in percent.
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct TransitivityReport {
  std::vector<double> budgets;       ///< b1, b2, b3
  std::vector<int> a1, a2, a3_direct, a3_transitive;  ///< encodings
  double nfr_direct = 0.0;      ///< nfr(A1, A3) with A3 searched against A1
  double nfr_transitive = 0.0;  ///< nfr(A1, A3') with A3' searched against A2
  double gap = 0.0;             ///< nfr_transitive - nfr_direct

  nlohmann::json to_json() const;
  static TransitivityReport from_json(const nlohmann::json& j);
  friend bool operator==(const TransitivityReport&, const TransitivityReport&) = default;
};

/// A1 is R0 at b1; A2 is constrained against A1 at b2; A3' is constrained
/// against A2 and A3 against A1, both at b3. Requires b1 <= b2 <= b3.
TransitivityReport transitivity_check(const SpacePtr& space, const Evaluator& evaluator,
                                      const SearchConfig& base, double b1, double b2, double b3);

}  // namespace regnas
