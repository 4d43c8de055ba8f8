// SPDX-License-Identifier: Apache-2.0
#include "context.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "regnas/errors.hpp"
#include "regnas/serialization.hpp"

#ifndef REGNAS_VERSION
#define REGNAS_VERSION "0.0.0"
#endif

namespace regnas::cli {

namespace fs = std::filesystem;

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return to_hex64(fnv1a64(bytes.data(), bytes.size()));
}

RunContext::RunContext(std::string command, std::vector<std::string> args, std::ostream& out,
                       std::ostream& err)
    : command_(std::move(command)), args_(std::move(args)), out_(out), err_(err) {}

void RunContext::set_out_dir(const std::string& dir) {
  if (dir.empty()) return;
  out_dir_ = fs::absolute(dir);
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir_.string());
}

fs::path RunContext::input(const std::string& path) {
  const fs::path abs = fs::absolute(path).lexically_normal();
  if (!fs::is_regular_file(abs)) throw ConfigError("input file not found: " + path);
  inputs_[abs.string()] = file_digest(abs);
  return abs;
}

fs::path RunContext::output(const std::string& name) {
  if (out_dir_.empty()) throw ConfigError("this command needs --out");
  const fs::path target = out_dir_ / name;
  fs::create_directories(target.parent_path());
  if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
  return target;
}

void RunContext::write(const std::string& name, const std::string& content) {
  const fs::path target = output(name);
  std::ofstream f(target, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + target.string());
  f << content;
}

void RunContext::write_json(const std::string& name, const nlohmann::json& j) {
  write(name, j.dump(2) + "\n");
}

void RunContext::write_manifest(double wall_clock_seconds) const {
  if (out_dir_.empty()) return;
  nlohmann::json m = {{"command", command_},
                      {"args", args_},
                      {"cwd", fs::current_path().string()},
                      {"engine_version", REGNAS_VERSION},
                      {"config", config_},
                      {"inputs", inputs_},
                      {"outputs", outputs_},
                      {"threads", threads_},
                      {"wall_clock_seconds", wall_clock_seconds}};
  m["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  std::ofstream f(out_dir_ / kManifestName, std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest");
  f << m.dump(2) << "\n";
}

LoadedSpace load_space_input(RunContext& ctx, const std::string& path) {
  const fs::path abs = ctx.input(path);
  nlohmann::json doc = load_json_file(abs);
  return {SearchSpace::create(space_def_from_json(doc)), std::move(doc)};
}

EvaluatorPtr make_evaluator(RunContext& ctx, const LoadedSpace& space, const EvalOptions& opts) {
  if (!opts.table_file.empty()) {
    const fs::path abs = ctx.input(opts.table_file);
    auto table = std::make_shared<const PredictionTable>(PredictionTable::load(space.space, abs));
    auto ev = std::make_shared<const TableEvaluator>(table);
    ctx.config()["evaluator"] = {{"kind", "table"}, {"entries", table->size()},
                                 {"n_samples", table->n_samples()}};
    return ev;
  }
  SyntheticParams p;
  if (space.document.contains("synthetic")) {
    p = SyntheticParams::from_json(space.document.at("synthetic"), p);
  }
  if (!opts.synthetic_file.empty()) {
    p = SyntheticParams::from_json(load_json_file(ctx.input(opts.synthetic_file)), p);
  }
  if (opts.seed) p.seed = *opts.seed;
  if (opts.n_samples) p.n_samples = *opts.n_samples;
  if (opts.beta) p.beta = *opts.beta;
  if (opts.sigma) p.sigma = *opts.sigma;
  if (opts.channel_block) p.channel_block = *opts.channel_block;
  p.validate();
  auto synthetic = std::make_shared<const SyntheticSupernet>(space.space, p);
  ctx.config()["evaluator"] = synthetic->describe();
  return std::make_shared<const CachingEvaluator>(synthetic);
}

Architecture load_reference(RunContext& ctx, const SpacePtr& space, const std::string& text) {
  if (fs::is_regular_file(text)) return load_architecture(space, ctx.input(text));
  if (text.find_first_not_of("0123456789,- ") == std::string::npos) {
    return architecture_from_encoding_string(space, text);
  }
  throw ConfigError("reference '" + text + "' is neither a file nor an encoding");
}

CostConstraint parse_constraint(RunContext& ctx, const std::string& text) {
  if (const auto at = text.find('@'); at != std::string::npos) {
    const fs::path lut = ctx.input(text.substr(at + 1));
    return CostConstraint::parse(text.substr(0, at) + "@" + lut.string());
  }
  return CostConstraint::parse(text);
}

CostConstraint budget_constraint(RunContext& ctx, const std::string& lut, double threshold) {
  if (lut.empty()) return CostConstraint::flops_budget(threshold);
  auto table = std::make_shared<const LatencyLUT>(LatencyLUT::load(ctx.input(lut)));
  return CostConstraint::latency_budget(threshold, table);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(std::string("bad ") + what + " list '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

}  // namespace regnas::cli
