// SPDX-License-Identifier: Apache-2.0
#include "regnas/drivers.hpp"

#include <cmath>
#include <sstream>

#include "regnas/errors.hpp"
#include "regnas/rng.hpp"

namespace regnas {

namespace {

constexpr std::uint64_t kFamilyStream = 0x66616d;
constexpr std::uint64_t kTransitivityStream = 0x747261;

SearchConfig member_config(const SearchConfig& base, double budget, std::uint64_t seed) {
  SearchConfig cfg = base;
  cfg.constraint = base.constraint.with_threshold(budget);
  cfg.rng_seed = seed;
  cfg.reference.reset();
  cfg.cas_enabled = false;
  cfg.orientation = NfrOrientation::kReferenceFirst;
  return cfg;
}

SearchConfig unconstrained(SearchConfig cfg) {
  cfg.reward = RewardConfig::r0();
  return cfg;
}

SearchConfig against(SearchConfig cfg, const Architecture& ref, bool cas) {
  cfg.reference = ref;
  cfg.cas_enabled = cas;
  return cfg;
}

}  // namespace

FamilyMode parse_family_mode(const std::string& text) {
  if (text == "s2l") return FamilyMode::kSmallToLarge;
  if (text == "l2s") return FamilyMode::kLargeToSmall;
  throw ConfigError("family mode must be s2l or l2s, got '" + text + "'");
}

std::string to_string(FamilyMode mode) {
  return mode == FamilyMode::kSmallToLarge ? "s2l" : "l2s";
}

FamilyResult family_search(const std::vector<double>& budgets, const SpacePtr& space,
                           const Evaluator& evaluator, const SearchConfig& base,
                           FamilyMode mode) {
  if (budgets.size() < 2) throw ConfigError("a family needs at least two budgets");
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (!(budgets[i] > budgets[i - 1])) throw ConfigError("budgets must be strictly ascending");
  }
  const std::size_t n = budgets.size();
  std::vector<std::optional<SearchResult>> members(n);
  std::vector<std::optional<SearchConfig>> configs(n);

  auto run = [&](std::size_t i, const SearchConfig& cfg) {
    configs[i] = cfg;
    members[i] = evolutionary_search(cfg, space, evaluator);
  };
  auto cfg_at = [&](std::size_t i) {
    return member_config(base, budgets[i], split_seed(base.rng_seed, kFamilyStream, i));
  };

  if (mode == FamilyMode::kSmallToLarge) {
    run(0, unconstrained(cfg_at(0)));
    for (std::size_t i = 1; i < n; ++i) {
      run(i, against(cfg_at(i), members[i - 1]->best.arch, true));
    }
  } else {
    run(n - 1, unconstrained(cfg_at(n - 1)));
    for (std::size_t i = n - 1; i-- > 0;) {
      run(i, against(cfg_at(i), members[i + 1]->best.arch, false));
    }
  }

  FamilyResult out;
  out.mode = mode;
  out.budgets = budgets;
  std::vector<CorrectnessVector> bits;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    out.members.push_back(std::move(*members[i]));
    out.configs.push_back(std::move(*configs[i]));
    bits.push_back(evaluator.evaluate(out.members[i].best.arch));
    names.push_back("A" + std::to_string(i + 1));
  }
  out.matrix = nfr_matrix(bits, names);
  return out;
}

nlohmann::json family_to_json(const FamilyResult& f) {
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    nlohmann::json m = candidate_to_json(f.members[i].best);
    m["name"] = f.matrix.names.at(i);
    m["budget"] = f.budgets[i];
    m["cas"] = f.configs[i].cas_enabled;
    m["reward"] = f.configs[i].reward.to_string();
    members.push_back(m);
  }
  return {{"mode", to_string(f.mode)},
          {"budgets", f.budgets},
          {"members", members},
          {"nfr", f.matrix.nfr},
          {"mean_pairwise_nfr", f.matrix.mean_pairwise_nfr()}};
}

std::vector<SweepRow> lambda_sweep(const std::vector<double>& ratios, const SpacePtr& space,
                                   const Evaluator& evaluator, const SearchConfig& base) {
  if (ratios.empty()) throw ConfigError("sweep needs at least one ratio");
  if (!base.reference) throw ConfigError("sweep needs a reference architecture");
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    if (!std::isfinite(ratio) || ratio <= 0.0) throw ConfigError("sweep ratios must be > 0");
    SearchConfig cfg = base;
    cfg.reward = {1.0, ratio};
    const SearchResult r = evolutionary_search(cfg, space, evaluator);
    rows.push_back({ratio, r.best.cost, r.best.top1, r.best.nfr.value_or(0.0)});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "ratio,cost,top1,nfr\n";
  for (const auto& r : rows) {
    out << r.ratio << ',' << r.cost << ',' << 100.0 * r.top1 << ',' << 100.0 * r.nfr << '\n';
  }
  return out.str();
}

nlohmann::json TransitivityReport::to_json() const {
  return {{"budgets", budgets},       {"a1", a1},
          {"a2", a2},                 {"a3_direct", a3_direct},
          {"a3_transitive", a3_transitive},
          {"nfr_direct", nfr_direct}, {"nfr_transitive", nfr_transitive},
          {"gap", gap}};
}

TransitivityReport TransitivityReport::from_json(const nlohmann::json& j) {
  try {
    TransitivityReport r;
    r.budgets = j.at("budgets").get<std::vector<double>>();
    r.a1 = j.at("a1").get<std::vector<int>>();
    r.a2 = j.at("a2").get<std::vector<int>>();
    r.a3_direct = j.at("a3_direct").get<std::vector<int>>();
    r.a3_transitive = j.at("a3_transitive").get<std::vector<int>>();
    r.nfr_direct = j.at("nfr_direct").get<double>();
    r.nfr_transitive = j.at("nfr_transitive").get<double>();
    r.gap = j.at("gap").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad transitivity report: ") + e.what());
  }
}

TransitivityReport transitivity_check(const SpacePtr& space, const Evaluator& evaluator,
                                      const SearchConfig& base, double b1, double b2, double b3) {
  if (!(b1 <= b2 && b2 <= b3)) throw ConfigError("transitivity budgets must be ascending");
  auto cfg_at = [&](double budget, std::uint64_t tag) {
    return member_config(base, budget, split_seed(base.rng_seed, kTransitivityStream, tag));
  };
  const Architecture a1 = evolutionary_search(unconstrained(cfg_at(b1, 1)), space, evaluator).best.arch;
  const Architecture a2 = evolutionary_search(against(cfg_at(b2, 2), a1, true), space, evaluator).best.arch;
  const Architecture a3t = evolutionary_search(against(cfg_at(b3, 3), a2, true), space, evaluator).best.arch;
  const Architecture a3d = evolutionary_search(against(cfg_at(b3, 3), a1, true), space, evaluator).best.arch;

  const CorrectnessVector r1 = evaluator.evaluate(a1);
  TransitivityReport rep;
  rep.budgets = {b1, b2, b3};
  rep.a1 = a1.encode();
  rep.a2 = a2.encode();
  rep.a3_direct = a3d.encode();
  rep.a3_transitive = a3t.encode();
  rep.nfr_direct = nfr(r1, evaluator.evaluate(a3d));
  rep.nfr_transitive = nfr(r1, evaluator.evaluate(a3t));
  rep.gap = rep.nfr_transitive - rep.nfr_direct;
  return rep;
}

}  // namespace regnas
