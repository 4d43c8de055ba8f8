// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

#include <fmt/format.h>

#include "regnas/drivers.hpp"
#include "regnas/errors.hpp"
#include "regnas/parallel.hpp"
#include "regnas/prediction_io.hpp"
#include "regnas/rng.hpp"
#include "regnas/serialization.hpp"

namespace regnas::cli {

namespace {

constexpr std::uint64_t kSampleTag = 0x73616d;

SearchConfig make_config(RunContext& ctx, const GaOptions& ga) {
  SearchConfig cfg;
  cfg.generations = ga.generations;
  cfg.population = ga.population;
  cfg.mutate_prob = ga.mutate_prob;
  cfg.mutation_ratio = ga.mutation_ratio;
  cfg.parent_fraction = ga.parent_fraction;
  cfg.crossover = !ga.no_crossover;
  cfg.max_retries = ga.max_retries;
  cfg.rng_seed = ga.seed;
  cfg.reward = RewardConfig::parse(ga.reward);
  cfg.threads = ctx.threads();
  ctx.set_seed(ga.seed);
  return cfg;
}

std::vector<double> parse_budgets(const std::string& text, std::size_t min_count) {
  auto budgets = parse_list(text, "budget");
  if (budgets.size() < min_count) {
    throw ConfigError(fmt::format("need at least {} budgets, got {}", min_count, budgets.size()));
  }
  return budgets;
}

std::string fmt_value(double v) { return fmt::format("{:.17g}", v); }

void print_best(RunContext& ctx, const std::string& label, const ScoredCandidate& c) {
  ctx.out() << fmt::format("{} {} top1={:.4f}", label, encoding_string(c.arch), c.top1);
  if (c.nfr) ctx.out() << fmt::format(" nfr={:.4f}", *c.nfr);
  ctx.out() << fmt::format(" cost={:.4f}\n", c.cost);
}

std::string flips_csv(const NfrMatrix& m) {
  std::string out = "model";
  for (const auto& n : m.names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out += m.names[i];
    for (std::size_t j = 0; j < m.names.size(); ++j) {
      out += fmt::format(",{}", i == j ? m.correct[i] : m.flips[i][j]);
    }
    out += "\n";
  }
  return out;
}

void write_family(RunContext& ctx, const FamilyResult& f, const std::string& prefix,
                  const std::string& matrix_name) {
  ctx.write_json(prefix + "family.json", family_to_json(f));
  ctx.write(matrix_name, f.matrix.to_csv());
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    ctx.write_json(prefix + "members/" + f.matrix.names[i] + "/summary.json",
                   search_summary_json(f.members[i], f.configs[i]));
  }
}

}  // namespace

int cmd_space_validate(RunContext& ctx, const std::string& space) {
  const auto doc = load_json_file(ctx.input(space));
  const auto report = validate_space(space_def_from_json(doc));
  nlohmann::json j = {{"ok", report.ok},
                      {"space_size", report.space_size},
                      {"size_saturated", report.size_saturated},
                      {"log10_size", report.log10_size},
                      {"violations", report.violations}};
  if (report.ok) {
    const auto sp = SearchSpace::create(space_def_from_json(doc));
    j["encoding_length"] = sp->encoding_length();
    j["max_mflops"] = flops(sp->maximal());
    j["min_mflops"] = flops(sp->minimal());
    ctx.out() << fmt::format("valid: {}{} architectures (log10 {:.4f})\n",
                             report.size_saturated ? ">= " : "", report.space_size,
                             report.log10_size);
  } else {
    for (const auto& v : report.violations) ctx.err() << "violation: " << v << "\n";
  }
  if (ctx.has_out_dir()) ctx.write_json("validate.json", j);
  return report.ok ? 0 : static_cast<int>(ErrorKind::kConfig);
}

int cmd_sample(RunContext& ctx, const SampleOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  const auto& space = loaded.space;
  std::optional<Architecture> ref;
  if (!o.ref.empty()) ref = load_reference(ctx, space, o.ref);
  std::optional<CostConstraint> constraint;
  if (!o.constraint.empty()) constraint = parse_constraint(ctx, o.constraint);
  if (o.count == 0) throw ConfigError("-n must be positive");
  if (o.max_retries < 1) throw ConfigError("--max-retries must be positive");
  ctx.set_seed(o.seed);
  ctx.config()["sample"] = {{"n", o.count},
                            {"seed", o.seed},
                            {"reference", ref ? nlohmann::json(ref->encode()) : nlohmann::json()},
                            {"constraint", constraint ? constraint->describe() : ""},
                            {"max_retries", o.max_retries}};

  std::vector<Architecture> archs;
  archs.reserve(o.count);
  for (std::size_t i = 0; i < o.count; ++i) {
    std::optional<Architecture> pick;
    for (int t = 0; t < o.max_retries && !pick; ++t) {
      const std::uint64_t s = hash_words(o.seed, {kSampleTag, i, static_cast<std::uint64_t>(t)});
      Architecture a = ref ? constrained_sample(*ref, s) : random_sample(space, s);
      if (!constraint || constraint->satisfies(a)) pick = std::move(a);
    }
    if (!pick) {
      throw InfeasibleError(fmt::format("no sample satisfied {} after {} attempts",
                                        constraint->describe(), o.max_retries));
    }
    archs.push_back(std::move(*pick));
  }

  std::string listing;
  for (const auto& a : archs) {
    nlohmann::json line = {{"digest", a.digest()}, {"encoding", a.encode()}, {"mflops", flops(a)}};
    if (constraint) line["cost"] = constraint->cost(a);
    listing += line.dump() + "\n";
  }
  if (ctx.has_out_dir()) {
    ctx.write("samples.jsonl", listing);
  } else {
    ctx.out() << listing;
  }

  if (o.scatter) {
    const auto evaluator = make_evaluator(ctx, loaded, o.eval);
    const auto reward_cfg = RewardConfig::parse(o.reward);
    std::optional<CorrectnessVector> ref_bits;
    if (ref) ref_bits = evaluator->evaluate(*ref);
    std::vector<std::optional<ScoredCandidate>> scored(archs.size());
    parallel_for(
        archs.size(),
        [&](std::size_t i) {
          const auto bits = evaluator->evaluate(archs[i]);
          const double t = top1(bits);
          std::optional<double> n;
          if (ref_bits) n = nfr(*ref_bits, bits);
          const double cost = constraint ? constraint->cost(archs[i]) : flops(archs[i]);
          scored[i].emplace(ScoredCandidate{archs[i], archs[i].digest(), t, n,
                                            reward(t, n.value_or(0.0), reward_cfg), cost});
        },
        ctx.threads());
    std::vector<ScoredCandidate> rows;
    for (auto& s : scored) rows.push_back(std::move(*s));
    const auto csv = scatter_csv(rows, ref);
    if (ctx.has_out_dir()) {
      ctx.write("scatter.csv", csv);
    } else {
      ctx.out() << csv;
    }
  }
  return 0;
}

int cmd_search(RunContext& ctx, const SearchOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  const auto evaluator = make_evaluator(ctx, loaded, o.eval);
  SearchConfig cfg = make_config(ctx, o.ga);
  if (o.constraint.empty()) throw ConfigError("--constraint is required");
  cfg.constraint = parse_constraint(ctx, o.constraint);
  if (!o.ref.empty()) cfg.reference = load_reference(ctx, loaded.space, o.ref);
  cfg.cas_enabled = o.cas;
  cfg.validate();
  ctx.config()["search"] = cfg.to_json();

  const auto result = evolutionary_search(cfg, loaded.space, *evaluator);
  if (cfg.cas_enabled && !contains(*cfg.reference, result.best.arch)) {
    throw Error(ErrorKind::kInfeasible, "best architecture escaped the reference subspace");
  }

  std::string log;
  for (const auto& g : result.log) log += generation_to_json(g).dump() + "\n";
  ctx.write_json("summary.json", search_summary_json(result, cfg));
  ctx.write("log.jsonl", log);
  ctx.write("scatter.csv", scatter_csv(result.evaluated, cfg.reference));
  print_best(ctx, "best", result.best);
  return 0;
}

int cmd_family(RunContext& ctx, const FamilyOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  const auto evaluator = make_evaluator(ctx, loaded, o.eval);
  const auto budgets = parse_budgets(o.budgets, 2);
  SearchConfig base = make_config(ctx, o.ga);
  base.constraint = budget_constraint(ctx, o.lut, budgets.front());
  const FamilyMode mode = parse_family_mode(o.mode);
  ctx.config()["family"] = {{"budgets", budgets}, {"mode", to_string(mode)},
                            {"base", base.to_json()}};

  const auto f = family_search(budgets, loaded.space, *evaluator, base, mode);
  write_family(ctx, f, "", "nfr_matrix.csv");
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    print_best(ctx, f.matrix.names[i], f.members[i].best);
  }
  ctx.out() << fmt::format("mean pairwise nfr {:.6f}\n", f.matrix.mean_pairwise_nfr());
  return 0;
}

int cmd_direction(RunContext& ctx, const FamilyOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  const auto evaluator = make_evaluator(ctx, loaded, o.eval);
  const auto budgets = parse_budgets(o.budgets, 2);
  SearchConfig base = make_config(ctx, o.ga);
  base.constraint = budget_constraint(ctx, o.lut, budgets.front());

  std::vector<FamilyMode> modes;
  if (o.mode == "both") {
    modes = {FamilyMode::kSmallToLarge, FamilyMode::kLargeToSmall};
  } else {
    modes = {parse_family_mode(o.mode)};
  }
  ctx.config()["direction"] = {{"budgets", budgets}, {"mode", o.mode}, {"base", base.to_json()}};

  nlohmann::json report = {{"budgets", budgets}, {"modes", nlohmann::json::object()}};
  for (const FamilyMode mode : modes) {
    const auto f = family_search(budgets, loaded.space, *evaluator, base, mode);
    const std::string tag = to_string(mode);
    write_family(ctx, f, tag + "/", "nfr_matrix_" + tag + ".csv");
    double mean_top1 = 0.0;
    for (const auto& m : f.members) mean_top1 += m.best.top1;
    mean_top1 /= static_cast<double>(f.members.size());
    report["modes"][tag] = {{"mean_pairwise_nfr", f.matrix.mean_pairwise_nfr()},
                            {"mean_top1", mean_top1},
                            {"family", family_to_json(f)}};
    ctx.out() << fmt::format("{}: mean top1 {:.6f} mean pairwise nfr {:.6f}\n", tag, mean_top1,
                             f.matrix.mean_pairwise_nfr());
  }
  ctx.write_json("direction.json", report);
  return 0;
}

int cmd_transitivity(RunContext& ctx, const FamilyOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  const auto evaluator = make_evaluator(ctx, loaded, o.eval);
  const auto budgets = parse_budgets(o.budgets, 3);
  if (budgets.size() != 3) throw ConfigError("transitivity takes exactly three budgets");
  SearchConfig base = make_config(ctx, o.ga);
  base.constraint = budget_constraint(ctx, o.lut, budgets.front());
  ctx.config()["transitivity"] = {{"budgets", budgets}, {"base", base.to_json()}};

  const auto r =
      transitivity_check(loaded.space, *evaluator, base, budgets[0], budgets[1], budgets[2]);
  ctx.write_json("transitivity.json", r.to_json());
  ctx.out() << fmt::format("nfr direct {:.6f} transitive {:.6f} gap {:+.6f}\n", r.nfr_direct,
                           r.nfr_transitive, r.gap);
  return 0;
}

int cmd_sweep(RunContext& ctx, const SweepOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  const auto evaluator = make_evaluator(ctx, loaded, o.eval);
  const auto ratios = parse_list(o.ratios, "ratio");
  SearchConfig base = make_config(ctx, o.ga);
  if (o.constraint.empty()) throw ConfigError("--constraint is required");
  if (o.ref.empty()) throw ConfigError("--ref is required");
  base.constraint = parse_constraint(ctx, o.constraint);
  base.reference = load_reference(ctx, loaded.space, o.ref);
  base.cas_enabled = o.cas;
  ctx.config()["sweep"] = {{"ratios", ratios}, {"base", base.to_json()}};

  const auto rows = lambda_sweep(ratios, loaded.space, *evaluator, base);
  const auto csv = sweep_csv(rows);
  ctx.write("sweep.csv", csv);
  ctx.out() << csv;
  return 0;
}

int cmd_audit(RunContext& ctx, const AuditOptions& o) {
  std::vector<NamedCorrectness> models;
  for (const auto& file : o.files) {
    auto loaded = read_predictions(ctx.input(file));
    for (auto& m : loaded) models.push_back(std::move(m));
  }
  if (models.size() < 2) throw ConfigError("audit needs at least two models");
  std::set<std::string> seen;
  for (const auto& m : models) {
    if (!seen.insert(m.name).second) throw ConfigError("duplicate model name '" + m.name + "'");
    if (m.bits.size() != models.front().bits.size()) {
      throw EvaluatorError(fmt::format("model '{}' has {} samples, '{}' has {}", m.name,
                                       m.bits.size(), models.front().name,
                                       models.front().bits.size()));
    }
  }
  auto index_of = [&](const std::string& name, std::size_t fallback) {
    if (name.empty()) return fallback;
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (models[i].name == name) return i;
    }
    throw ConfigError("no model named '" + name + "'");
  };
  const std::size_t ref = index_of(o.ref, 0);
  const std::size_t base = index_of(o.baseline, models.size() - 1);

  std::vector<CorrectnessVector> bits;
  std::vector<std::string> names;
  for (const auto& m : models) {
    bits.push_back(m.bits);
    names.push_back(m.name);
  }
  const NfrMatrix matrix = nfr_matrix(bits, names);

  auto change = [](double m1, double m2) -> std::optional<double> {
    if (m2 == 0.0) return std::nullopt;
    return relative_change(m1, m2);
  };
  auto cell = [](const std::optional<double>& v, double scale) {
    return v ? fmt_value(*v * scale) : std::string("NA");
  };
  const double base_top1 = matrix.top1[base];
  const double base_nfr = nfr(bits[ref], bits[base]);
  std::string rel = "model,top1,nfr_vs_ref,top1_change,top1_change_pct,nfr_change,nfr_change_pct\n";
  nlohmann::json rel_json = nlohmann::json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double t = matrix.top1[i];
    const double n = nfr(bits[ref], bits[i]);
    const auto dt = change(t, base_top1);
    const auto dn = change(n, base_nfr);
    rel += fmt::format("{},{},{},{},{},{},{}\n", names[i], fmt_value(t), fmt_value(n),
                       cell(dt, 1.0), cell(dt, 100.0), cell(dn, 1.0), cell(dn, 100.0));
    rel_json.push_back({{"model", names[i]},
                        {"top1", t},
                        {"nfr_vs_ref", n},
                        {"top1_change", dt ? nlohmann::json(*dt) : nlohmann::json()},
                        {"nfr_change", dn ? nlohmann::json(*dn) : nlohmann::json()}});
  }

  nlohmann::json report = {{"models", names},
                           {"n_samples", matrix.n_samples},
                           {"reference", names[ref]},
                           {"baseline", names[base]},
                           {"top1", matrix.top1},
                           {"correct", matrix.correct},
                           {"nfr", matrix.nfr},
                           {"flips", matrix.flips},
                           {"mean_pairwise_nfr", matrix.mean_pairwise_nfr()},
                           {"relative_change", rel_json}};
  ctx.config()["audit"] = {{"reference", names[ref]}, {"baseline", names[base]}};

  ctx.out() << matrix.to_csv();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto dn = change(nfr(bits[ref], bits[i]), base_nfr);
    const auto dt = change(matrix.top1[i], base_top1);
    ctx.out() << fmt::format("{}: top1 change {} nfr change {} (vs {})\n", names[i],
                             dt ? fmt::format("{:+.1f}%", *dt * 100.0) : "NA",
                             dn ? fmt::format("{:+.1f}%", *dn * 100.0) : "NA", names[base]);
  }
  if (ctx.has_out_dir()) {
    ctx.write("nfr_matrix.csv", matrix.to_csv());
    ctx.write("nfr_flips.csv", flips_csv(matrix));
    ctx.write("relative_change.csv", rel);
    ctx.write_json("audit.json", report);
  }
  return 0;
}

int cmd_table(RunContext& ctx, const TableOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  const auto evaluator = make_evaluator(ctx, loaded, o.eval);
  if (o.format != "bin" && o.format != "csv") throw ConfigError("--format must be bin or csv");
  ctx.config()["table"] = {{"format", o.format}};
  const auto models = tabulate(loaded.space, *evaluator);
  if (o.format == "bin") {
    write_predictions_binary(ctx.output("predictions.bin"), models);
  } else {
    write_predictions_csv(ctx.output("predictions.csv"), models);
  }
  ctx.out() << fmt::format("tabulated {} architectures x {} samples\n", models.size(),
                           evaluator->n_samples());
  return 0;
}

int cmd_lut(RunContext& ctx, const LutOptions& o) {
  const auto loaded = load_space_input(ctx, o.space);
  ctx.config()["lut"] = {{"ms_per_mmac", o.ms_per_mmac},
                         {"per_layer_ms", o.per_layer_ms},
                         {"overhead_ms", o.overhead_ms}};
  const auto lut =
      LatencyLUT::synthesize(*loaded.space, o.ms_per_mmac, o.per_layer_ms, o.overhead_ms);
  ctx.write_json("lut.json", lut.to_json());
  ctx.out() << fmt::format("{} entries, maximal {:.4f} ms\n", lut.size(),
                           latency(loaded.space->maximal(), lut));
  return 0;
}

}  // namespace regnas::cli
