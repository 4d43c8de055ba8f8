// SPDX-License-Identifier: Apache-2.0
#include "regnas/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commands.hpp"
#include "regnas/errors.hpp"
#include "regnas/parallel.hpp"
#include "regnas/serialization.hpp"

namespace regnas {

namespace {

namespace fs = std::filesystem;
using cli::RunContext;

struct GlobalOptions {
  std::string out;
  unsigned threads = 0;
};

struct RerunOptions {
  std::string manifest;
};

void add_run_options(CLI::App* cmd, GlobalOptions& g, bool out_required) {
  auto* out = cmd->add_option("-o,--out", g.out, "Output directory");
  if (out_required) out->required();
  cmd->add_option("--threads", g.threads, "Worker threads (0: REGNAS_THREADS or all cores)");
}

void add_eval_options(CLI::App* cmd, cli::EvalOptions& e) {
  cmd->add_option("--synthetic", e.synthetic_file, "JSON file of synthetic evaluator parameters");
  cmd->add_option("--table", e.table_file, "Prediction table (binary or CSV) to look up instead");
  cmd->add_option("--eval-seed", e.seed, "Synthetic evaluator seed");
  cmd->add_option("--samples", e.n_samples, "Synthetic evaluation-set size");
  cmd->add_option("--beta", e.beta, "Synthetic capacity gain");
  cmd->add_option("--sigma", e.sigma, "Synthetic noise scale");
  cmd->add_option("--channel-block", e.channel_block, "Requested channel block of weight units");
}

void add_ga_options(CLI::App* cmd, cli::GaOptions& ga) {
  cmd->add_option("--reward", ga.reward, "r0, r1, r2 or 'l1,l2'")->capture_default_str();
  cmd->add_option("--seed", ga.seed, "Search seed")->capture_default_str();
  cmd->add_option("--generations", ga.generations)->capture_default_str();
  cmd->add_option("--population", ga.population)->capture_default_str();
  cmd->add_option("--mutate-prob", ga.mutate_prob)->capture_default_str();
  cmd->add_option("--mutation-ratio", ga.mutation_ratio)->capture_default_str();
  cmd->add_option("--parent-fraction", ga.parent_fraction)->capture_default_str();
  cmd->add_flag("--no-crossover", ga.no_crossover, "Refill with mutations only");
  cmd->add_option("--max-retries", ga.max_retries)->capture_default_str();
}

// Drops --out/-o and --threads (with their values) from a recorded command line.
std::vector<std::string> strip_run_options(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--out" || a == "-o" || a == "--threads") {
      ++i;
      continue;
    }
    if (a.rfind("--out=", 0) == 0 || a.rfind("--threads=", 0) == 0) continue;
    kept.push_back(a);
  }
  return kept;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CwdGuard {
 public:
  explicit CwdGuard(const fs::path& dir) : saved_(fs::current_path()) { fs::current_path(dir); }
  ~CwdGuard() {
    std::error_code ec;
    fs::current_path(saved_, ec);
  }
  CwdGuard(const CwdGuard&) = delete;
  CwdGuard& operator=(const CwdGuard&) = delete;

 private:
  fs::path saved_;
};

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_rerun(const RerunOptions& o, const GlobalOptions& g, std::ostream& out,
              std::ostream& err) {
  const fs::path manifest_path = fs::absolute(o.manifest);
  const auto m = load_json_file(manifest_path);
  for (const char* key : {"command", "args", "cwd", "inputs", "outputs"}) {
    if (!m.contains(key)) throw ConfigError(fmt::format("manifest lacks \"{}\"", key));
  }
  const fs::path original = manifest_path.parent_path();
  const fs::path target = fs::absolute(g.out);
  if (fs::weakly_canonical(original) == fs::weakly_canonical(target)) {
    throw ConfigError("rerun output directory must differ from the original");
  }

  bool ok = true;
  for (const auto& [path, digest] : m.at("inputs").items()) {
    std::string now;
    try {
      now = cli::file_digest(path);
    } catch (const Error&) {
      now = "missing";
    }
    if (now != digest.get<std::string>()) {
      err << fmt::format("input changed: {} ({} -> {})\n", path, digest.get<std::string>(), now);
      ok = false;
    }
  }
  if (!ok) return 1;

  auto args = strip_run_options(m.at("args").get<std::vector<std::string>>());
  args.push_back("--out");
  args.push_back(target.string());
  if (g.threads != 0) {
    args.push_back("--threads");
    args.push_back(std::to_string(g.threads));
  }

  int code = 0;
  {
    CwdGuard guard(m.at("cwd").get<std::string>());
    code = dispatch(args, out, err);
  }
  if (code != 0) return code;

  for (const auto& name : m.at("outputs")) {
    const std::string n = name.get<std::string>();
    const bool same = fs::exists(original / n) && fs::exists(target / n) &&
                      read_bytes(original / n) == read_bytes(target / n);
    out << (same ? "identical " : "DIFFERS ") << n << "\n";
    ok = ok && same;
  }
  out << (ok ? "rerun reproduced all outputs\n" : "rerun mismatch\n");
  return ok ? 0 : 1;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regression-constrained architecture search", "regnas"};
  app.require_subcommand(1);
  app.set_version_flag("--version", REGNAS_VERSION);

  GlobalOptions g;
  std::string space_file;
  std::function<int(RunContext&)> run;
  std::string command;

  auto* space = app.add_subcommand("space", "Search-space utilities");
  space->require_subcommand(1);
  auto* validate = space->add_subcommand("validate", "Check a space file and print its size");
  validate->add_option("space", space_file, "Space JSON")->required();
  add_run_options(validate, g, false);
  validate->callback([&] {
    command = "space validate";
    run = [&](RunContext& ctx) { return cli::cmd_space_validate(ctx, space_file); };
  });

  cli::SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "Draw architectures, optionally scored");
  sample_cmd->add_option("space", sample.space, "Space JSON")->required();
  sample_cmd->add_option("-n", sample.count, "Number of samples")->capture_default_str();
  sample_cmd->add_option("--seed", sample.seed)->capture_default_str();
  sample_cmd->add_option("--ref", sample.ref, "Reference: sample its containing subspace");
  sample_cmd->add_option("--constraint", sample.constraint, "flops:T or latency:T@lut.json");
  sample_cmd->add_option("--reward", sample.reward)->capture_default_str();
  sample_cmd->add_option("--max-retries", sample.max_retries)->capture_default_str();
  sample_cmd->add_flag("--scatter", sample.scatter, "Evaluate samples and emit scatter CSV");
  add_eval_options(sample_cmd, sample.eval);
  add_run_options(sample_cmd, g, false);
  sample_cmd->callback([&] {
    command = "sample";
    run = [&](RunContext& ctx) { return cli::cmd_sample(ctx, sample); };
  });

  cli::SearchOptions search;
  auto* search_cmd = app.add_subcommand("search", "Evolutionary search under a cost budget");
  search_cmd->add_option("space", search.space, "Space JSON")->required();
  search_cmd->add_option("--constraint", search.constraint, "flops:T or latency:T@lut.json")
      ->required();
  search_cmd->add_option("--ref", search.ref, "Reference architecture (file or encoding)");
  search_cmd->add_flag("--cas", search.cas, "Only consider architectures containing --ref");
  add_ga_options(search_cmd, search.ga);
  add_eval_options(search_cmd, search.eval);
  add_run_options(search_cmd, g, true);
  search_cmd->callback([&] {
    command = "search";
    run = [&](RunContext& ctx) { return cli::cmd_search(ctx, search); };
  });

  cli::FamilyOptions family;
  cli::FamilyOptions direction;
  cli::FamilyOptions transitivity;
  auto add_family_like = [&](cli::FamilyOptions& family, const char* name, const char* help,
                             const char* default_mode) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("space", family.space, "Space JSON")->required();
    cmd->add_option("--budgets", family.budgets, "Comma-separated ascending budgets")->required();
    cmd->add_option("--lut", family.lut, "Latency table; budgets are then milliseconds");
    if (default_mode != nullptr) {
      family.mode = default_mode;
      cmd->add_option("--mode", family.mode)->capture_default_str();
    }
    add_ga_options(cmd, family.ga);
    add_eval_options(cmd, family.eval);
    add_run_options(cmd, g, true);
    return cmd;
  };
  add_family_like(family, "family", "Search a model family along ascending budgets", "s2l")
      ->callback([&] {
        command = "family";
        run = [&](RunContext& ctx) { return cli::cmd_family(ctx, family); };
      });
  auto* direction_cmd =
      add_family_like(direction, "direction", "Compare small-to-large and large-to-small families",
                      nullptr);
  direction.mode = "both";
  direction_cmd->add_option("--mode", direction.mode, "both, s2l or l2s")->capture_default_str();
  direction_cmd->callback([&] {
    command = "direction";
    run = [&](RunContext& ctx) { return cli::cmd_direction(ctx, direction); };
  });
  add_family_like(transitivity, "transitivity", "Compare direct and chained constraints over three budgets",
                  nullptr)
      ->callback([&] {
        command = "transitivity";
        run = [&](RunContext& ctx) { return cli::cmd_transitivity(ctx, transitivity); };
      });

  cli::SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Vary the NFR weight of the reward");
  sweep_cmd->add_option("space", sweep.space, "Space JSON")->required();
  sweep_cmd->add_option("--constraint", sweep.constraint)->required();
  sweep_cmd->add_option("--ref", sweep.ref, "Reference architecture")->required();
  sweep_cmd->add_flag("--cas", sweep.cas);
  sweep_cmd->add_option("--ratios", sweep.ratios, "NFR weights, Top-1 weight fixed at 1")
      ->capture_default_str();
  add_ga_options(sweep_cmd, sweep.ga);
  add_eval_options(sweep_cmd, sweep.eval);
  add_run_options(sweep_cmd, g, true);
  sweep_cmd->callback([&] {
    command = "sweep";
    run = [&](RunContext& ctx) { return cli::cmd_sweep(ctx, sweep); };
  });

  cli::AuditOptions audit;
  auto* audit_cmd = app.add_subcommand("audit", "Pairwise NFR of external prediction files");
  audit_cmd->add_option("files", audit.files, "Prediction files (binary or CSV)")->required();
  audit_cmd->add_option("--ref", audit.ref, "Model whose NFR is tracked (default: first)");
  audit_cmd->add_option("--baseline", audit.baseline,
                        "Model relative changes are taken against (default: last)");
  add_run_options(audit_cmd, g, false);
  audit_cmd->callback([&] {
    command = "audit";
    run = [&](RunContext& ctx) { return cli::cmd_audit(ctx, audit); };
  });

  cli::TableOptions table;
  auto* table_cmd = app.add_subcommand("table", "Tabulate an enumerable space's predictions");
  table_cmd->add_option("space", table.space, "Space JSON")->required();
  table_cmd->add_option("--format", table.format, "bin or csv")->capture_default_str();
  add_eval_options(table_cmd, table.eval);
  add_run_options(table_cmd, g, true);
  table_cmd->callback([&] {
    command = "table";
    run = [&](RunContext& ctx) { return cli::cmd_table(ctx, table); };
  });

  cli::LutOptions lut;
  auto* lut_cmd = app.add_subcommand("lut", "Synthesize a latency table for a space");
  lut_cmd->add_option("space", lut.space, "Space JSON")->required();
  lut_cmd->add_option("--ms-per-mmac", lut.ms_per_mmac)->capture_default_str();
  lut_cmd->add_option("--per-layer-ms", lut.per_layer_ms)->capture_default_str();
  lut_cmd->add_option("--overhead-ms", lut.overhead_ms)->capture_default_str();
  add_run_options(lut_cmd, g, true);
  lut_cmd->callback([&] {
    command = "lut";
    run = [&](RunContext& ctx) { return cli::cmd_lut(ctx, lut); };
  });

  RerunOptions rerun;
  bool is_rerun = false;
  auto* rerun_cmd = app.add_subcommand("rerun", "Replay a run from its manifest and compare");
  rerun_cmd->add_option("manifest", rerun.manifest, "manifest.json of a previous run")->required();
  add_run_options(rerun_cmd, g, true);
  rerun_cmd->callback([&] { is_rerun = true; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kConfig);
  }

  if (is_rerun) return run_rerun(rerun, g, out, err);

  const auto start = std::chrono::steady_clock::now();
  RunContext ctx(command, args, out, err);
  ctx.set_threads(g.threads != 0 ? g.threads : default_threads());
  ctx.set_out_dir(g.out);
  const int code = run(ctx);
  const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
  if (code == 0) ctx.write_manifest(wall.count());
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace regnas
