// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regnas/archspace.hpp"
#include "regnas/costmodel.hpp"
#include "regnas/evaluator.hpp"

namespace regnas::cli {

inline constexpr const char* kManifestName = "manifest.json";

/// FNV-1a 64 of the file's bytes as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// State of one command invocation: records inputs and outputs and writes
/// the run manifest.
class RunContext {
 public:
  RunContext(std::string command, std::vector<std::string> args, std::ostream& out,
             std::ostream& err);

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  void set_out_dir(const std::string& dir);
  bool has_out_dir() const { return !out_dir_.empty(); }
  void set_threads(unsigned threads) { threads_ = threads; }
  unsigned threads() const { return threads_; }

  /// Absolute path of an input file, recorded with its digest.
  std::filesystem::path input(const std::string& path);

  /// Writes out_dir/name (creating parent directories) and records it.
  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  /// Path of out_dir/name for writers that take a path; records the output.
  std::filesystem::path output(const std::string& name);

  nlohmann::json& config() { return config_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  /// No-op without an output directory.
  void write_manifest(double wall_clock_seconds) const;

 private:
  std::string command_;
  std::vector<std::string> args_;
  std::ostream& out_;
  std::ostream& err_;
  std::filesystem::path out_dir_;
  unsigned threads_ = 0;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  nlohmann::json config_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
};

struct EvalOptions {
  std::string synthetic_file;
  std::string table_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_samples;
  std::optional<double> beta;
  std::optional<double> sigma;
  std::optional<int> channel_block;
};

struct LoadedSpace {
  SpacePtr space;
  nlohmann::json document;
};

LoadedSpace load_space_input(RunContext& ctx, const std::string& path);

/// Synthetic parameters come from the space's "synthetic" block, then the
/// --synthetic file, then individual flags. --table selects the table
/// evaluator instead.
EvaluatorPtr make_evaluator(RunContext& ctx, const LoadedSpace& space, const EvalOptions& opts);

/// A JSON architecture file, or an inline encoding such as "1,3,16,0,0".
Architecture load_reference(RunContext& ctx, const SpacePtr& space, const std::string& text);

/// "flops:300" or "latency:30@lut.json"; the table file is recorded as input.
CostConstraint parse_constraint(RunContext& ctx, const std::string& text);
/// Budget kind for multi-budget commands: flops, or latency when lut is set.
CostConstraint budget_constraint(RunContext& ctx, const std::string& lut, double threshold);

std::vector<double> parse_list(const std::string& text, const char* what);

}  // namespace regnas::cli
