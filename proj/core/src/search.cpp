// SPDX-License-Identifier: Apache-2.0
#include "regnas/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "regnas/errors.hpp"
#include "regnas/parallel.hpp"
#include "regnas/rng.hpp"
#include "regnas/serialization.hpp"

namespace regnas {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kOffspringStream = 2;

/// Scores architectures against an optional fixed reference.
class Scorer {
 public:
  Scorer(const Evaluator& evaluator, const RewardConfig& reward, const CostConstraint& constraint,
         const std::optional<Architecture>& reference, NfrOrientation orientation)
      : evaluator_(evaluator), reward_(reward), constraint_(constraint), orientation_(orientation) {
    if (reference) {
      ref_bits_ = evaluator.evaluate(*reference);
      if (ref_bits_->size() != evaluator.n_samples()) {
        throw EvaluatorError("evaluator returned a bitmap of the wrong length");
      }
    }
  }

  ScoredCandidate score(const Architecture& a) const {
    const CorrectnessVector bits = evaluator_.evaluate(a);
    ScoredCandidate c{a, a.digest(), top1(bits), std::nullopt, 0.0, constraint_.cost(a)};
    double nfr_term = 0.0;
    if (ref_bits_) {
      nfr_term = orientation_ == NfrOrientation::kReferenceFirst ? nfr(*ref_bits_, bits)
                                                                 : nfr(bits, *ref_bits_);
      c.nfr = nfr_term;
    }
    c.reward = reward(c.top1, nfr_term, reward_);
    return c;
  }

 private:
  const Evaluator& evaluator_;
  RewardConfig reward_;
  const CostConstraint& constraint_;
  NfrOrientation orientation_;
  std::optional<CorrectnessVector> ref_bits_;
};

/// Memo of scored architectures keyed by encoding, filled in parallel.
class ScoreBook {
 public:
  ScoreBook(const Scorer& scorer, unsigned threads) : scorer_(scorer), threads_(threads) {}

  std::vector<ScoredCandidate> score_all(const std::vector<Architecture>& population) {
    std::vector<Architecture> fresh;
    std::map<std::vector<int>, bool> queued;
    for (const Architecture& a : population) {
      auto code = a.encode();
      if (book_.count(code) == 0 && queued.emplace(std::move(code), true).second) {
        fresh.push_back(a);
      }
    }
    std::vector<std::optional<ScoredCandidate>> scored(fresh.size());
    parallel_for(fresh.size(), [&](std::size_t i) { scored[i] = scorer_.score(fresh[i]); },
                 threads_);
    for (auto& s : scored) {
      order_.push_back(*s);
      book_.emplace(s->arch.encode(), std::move(*s));
    }
    std::vector<ScoredCandidate> out;
    out.reserve(population.size());
    for (const Architecture& a : population) out.push_back(book_.at(a.encode()));
    return out;
  }

  const std::vector<ScoredCandidate>& order() const { return order_; }

 private:
  const Scorer& scorer_;
  unsigned threads_;
  std::map<std::vector<int>, ScoredCandidate> book_;
  std::vector<ScoredCandidate> order_;
};

std::string orientation_name(NfrOrientation o) {
  return o == NfrOrientation::kReferenceFirst ? "reference_first" : "candidate_first";
}

}  // namespace

// --- SearchConfig ------------------------------------------------------------

void SearchConfig::validate() const {
  if (generations < 1) throw ConfigError("generations must be >= 1");
  if (population < 1) throw ConfigError("population must be >= 1");
  if (!(parent_fraction > 0.0 && parent_fraction <= 1.0)) {
    throw ConfigError("parent_fraction must lie in (0, 1]");
  }
  if (!(mutation_ratio >= 0.0 && mutation_ratio <= 1.0)) {
    throw ConfigError("mutation_ratio must lie in [0, 1]");
  }
  if (!(mutate_prob >= 0.0 && mutate_prob <= 1.0)) {
    throw ConfigError("mutate_prob must lie in [0, 1]");
  }
  if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
  reward.validate();
  if (!std::isfinite(constraint.threshold) || constraint.threshold <= 0.0) {
    throw ConfigError("cost threshold must be finite and > 0");
  }
  if (cas_enabled && !reference) throw ConfigError("CAS requires a reference architecture");
}

std::size_t SearchConfig::num_parents() const {
  const auto k = static_cast<std::size_t>(std::llround(parent_fraction * population));
  return std::clamp<std::size_t>(k, 1, static_cast<std::size_t>(population));
}

std::size_t SearchConfig::num_offspring() const {
  return static_cast<std::size_t>(population) - num_parents();
}

std::size_t SearchConfig::num_mutations() const {
  if (!crossover) return num_offspring();
  const auto m = static_cast<std::size_t>(
      std::floor(static_cast<double>(num_offspring()) * mutation_ratio + 0.5));
  return std::min(m, num_offspring());
}

std::size_t SearchConfig::num_crossovers() const { return num_offspring() - num_mutations(); }

std::size_t SearchConfig::planned_evaluations() const {
  return static_cast<std::size_t>(population) +
         static_cast<std::size_t>(generations - 1) * num_offspring();
}

nlohmann::json SearchConfig::to_json() const {
  nlohmann::json j = {{"generations", generations},
                      {"population", population},
                      {"mutate_prob", mutate_prob},
                      {"mutation_ratio", mutation_ratio},
                      {"parent_fraction", parent_fraction},
                      {"reward", {{"lambda1", reward.lambda1}, {"lambda2", reward.lambda2}}},
                      {"constraint",
                       {{"kind", constraint.kind == CostKind::kFlops ? "flops" : "latency"},
                        {"threshold", constraint.threshold}}},
                      {"cas_enabled", cas_enabled},
                      {"rng_seed", rng_seed},
                      {"crossover", crossover},
                      {"max_retries", max_retries},
                      {"nfr_orientation", orientation_name(orientation)}};
  j["reference"] = reference ? nlohmann::json(reference->encode()) : nlohmann::json(nullptr);
  return j;
}

bool better_candidate(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.reward != b.reward) return a.reward > b.reward;
  return encoding_less(a.arch, b.arch);
}

// --- Evolutionary search -------------------------------------------------------

SearchResult evolutionary_search(const SearchConfig& cfg, const SpacePtr& space,
                                 const Evaluator& evaluator) {
  cfg.validate();
  if (!space) throw ConfigError("search requires a search space");
  if (cfg.reference && !cfg.reference->space().same_as(*space)) {
    throw ConfigError("reference architecture belongs to a different search space");
  }
  const Architecture* ref = cfg.reference ? &*cfg.reference : nullptr;
  const bool cas = cfg.cas_enabled;
  const auto retries = static_cast<std::uint64_t>(cfg.max_retries);

  Scorer scorer(evaluator, cfg.reward, cfg.constraint, cfg.reference, cfg.orientation);
  ScoreBook book(scorer, cfg.threads);

  std::vector<Architecture> population;
  population.reserve(static_cast<std::size_t>(cfg.population));
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(cfg.population); ++i) {
    std::optional<Architecture> accepted;
    for (std::uint64_t t = 0; t < retries && !accepted; ++t) {
      const std::uint64_t seed = hash_words(cfg.rng_seed, {kInitStream, i, t});
      Architecture a = cas ? constrained_sample(*ref, seed) : random_sample(space, seed);
      if (cfg.constraint.satisfies(a)) accepted = std::move(a);
    }
    if (!accepted) {
      throw InfeasibleError("no architecture satisfying " + cfg.constraint.describe() +
                            (cas ? " and containing the reference" : std::string()) + " after " +
                            std::to_string(retries) + " samples");
    }
    population.push_back(std::move(*accepted));
  }

  std::vector<GenerationLog> log;
  std::size_t candidates = 0;
  const std::size_t parents_n = cfg.num_parents();
  const std::size_t mutations_n = cfg.num_mutations();
  const std::size_t offspring_n = cfg.num_offspring();
  std::optional<ScoredCandidate> best;

  for (int g = 0; g < cfg.generations; ++g) {
    candidates += g == 0 ? population.size() : offspring_n;
    std::vector<ScoredCandidate> scored = book.score_all(population);
    std::stable_sort(scored.begin(), scored.end(), better_candidate);
    if (!best || better_candidate(scored.front(), *best)) best = scored.front();
    log.push_back({g + 1, *best, scored});
    if (g + 1 == cfg.generations) break;

    // Parents are the top distinct architectures; a population with fewer
    // distinct members than parent slots repeats them in rank order.
    std::vector<const ScoredCandidate*> parents;
    for (const auto& c : scored) {
      if (parents.size() == parents_n) break;
      if (parents.empty() || !(parents.back()->arch == c.arch)) parents.push_back(&c);
    }
    for (std::size_t p = 0, distinct = parents.size(); parents.size() < parents_n; ++p) {
      parents.push_back(parents[p % distinct]);
    }
    std::vector<Architecture> next;
    next.reserve(population.size());
    for (const auto* p : parents) next.push_back(p->arch);
    for (std::size_t i = 0; i < offspring_n; ++i) {
      std::optional<Architecture> child;
      std::optional<Architecture> fallback;
      for (std::uint64_t t = 0; t < retries && !child; ++t) {
        Rng rng(hash_words(cfg.rng_seed, {kOffspringStream, static_cast<std::uint64_t>(g), i, t}));
        const Architecture& pa = parents[rng.uniform_index(parents_n)]->arch;
        if (!fallback) fallback = pa;
        Architecture c = pa;
        if (i < mutations_n) {
          const std::uint64_t op_seed = rng.next();
          c = cas ? constrained_mutate(*ref, pa, cfg.mutate_prob, op_seed)
                  : mutate(pa, cfg.mutate_prob, op_seed);
        } else {
          const Architecture& pb = parents[rng.uniform_index(parents_n)]->arch;
          const std::uint64_t op_seed = rng.next();
          c = cas ? constrained_crossover(*ref, pa, pb, op_seed) : crossover(pa, pb, op_seed);
        }
        if (cfg.constraint.satisfies(c)) child = std::move(c);
      }
      next.push_back(child ? std::move(*child) : std::move(*fallback));
    }
    population = std::move(next);
  }

  return SearchResult{*best, std::move(log), candidates, book.order().size(), book.order()};
}

// --- Brute force -------------------------------------------------------------

BruteForceResult brute_force_search(const SpacePtr& space, const Evaluator& evaluator,
                                    const RewardConfig& reward, const CostConstraint& constraint,
                                    const std::optional<Architecture>& reference, bool cas,
                                    std::uint64_t cap, NfrOrientation orientation) {
  if (!space) throw ConfigError("search requires a search space");
  reward.validate();
  if (cas && !reference) throw ConfigError("CAS requires a reference architecture");
  if (!space->size_saturated() && space->size() > cap) {
    throw ConfigError("space has " + std::to_string(space->size()) +
                      " architectures, above the brute-force cap of " + std::to_string(cap));
  }
  if (space->size_saturated()) throw ConfigError("space too large for brute force");

  Scorer scorer(evaluator, reward, constraint, reference, orientation);
  std::size_t enumerated = 0;
  std::vector<Architecture> feasible;
  for_each_architecture(space, [&](const Architecture& a) {
    ++enumerated;
    if (cas && !contains(*reference, a)) return true;
    if (!constraint.satisfies(a)) return true;
    feasible.push_back(a);
    return true;
  });
  if (feasible.empty()) {
    throw InfeasibleError("no architecture satisfies " + constraint.describe() +
                          (cas ? " and contains the reference" : std::string()));
  }
  std::vector<std::optional<ScoredCandidate>> scored(feasible.size());
  parallel_for(feasible.size(), [&](std::size_t i) { scored[i] = scorer.score(feasible[i]); });
  std::vector<ScoredCandidate> all;
  all.reserve(scored.size());
  for (auto& c : scored) all.push_back(std::move(*c));
  ScoredCandidate best = all.front();
  for (const auto& c : all) {
    if (better_candidate(c, best)) best = c;
  }
  return BruteForceResult{std::move(best), std::move(all), enumerated};
}

// --- Serialization -------------------------------------------------------------

nlohmann::json candidate_to_json(const ScoredCandidate& c) {
  nlohmann::json j = {{"digest", c.digest},
                      {"encoding", c.arch.encode()},
                      {"top1", c.top1},
                      {"reward", c.reward},
                      {"cost", c.cost}};
  if (c.nfr) j["nfr"] = *c.nfr;
  return j;
}

nlohmann::json generation_to_json(const GenerationLog& g) {
  nlohmann::json pop = nlohmann::json::array();
  for (const auto& c : g.population) pop.push_back(candidate_to_json(c));
  nlohmann::json j = {{"generation", g.generation},
                      {"best_reward", g.best.reward},
                      {"best_top1", g.best.top1},
                      {"best_digest", g.best.digest},
                      {"population", pop}};
  if (g.best.nfr) j["best_nfr"] = *g.best.nfr;
  return j;
}

nlohmann::json search_summary_json(const SearchResult& r, const SearchConfig& cfg) {
  nlohmann::json j = {{"best", candidate_to_json(r.best)},
                      {"generations", r.log.size()},
                      {"candidates_evaluated", r.candidates_evaluated},
                      {"unique_evaluated", r.unique_evaluated},
                      {"config", cfg.to_json()}};
  if (cfg.reference) {
    j["reference_digest"] = cfg.reference->digest();
    j["best_contains_reference"] = contains(*cfg.reference, r.best.arch);
  }
  return j;
}

std::string scatter_csv(const std::vector<ScoredCandidate>& candidates,
                        const std::optional<Architecture>& reference) {
  std::ostringstream out;
  out.precision(17);
  out << "digest,encoding,top1,nfr,cost,in_subspace\n";
  for (const auto& c : candidates) {
    out << c.digest << ',' << encoding_string(c.arch, '-') << ',' << c.top1 << ',';
    if (c.nfr) out << *c.nfr;
    out << ',' << c.cost << ',';
    if (reference) out << (contains(*reference, c.arch) ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

}  // namespace regnas
