// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "context.hpp"
#include "regnas/search.hpp"

namespace regnas::cli {

struct GaOptions {
  int generations = 20;
  int population = 100;
  double mutate_prob = 0.1;
  double mutation_ratio = 0.5;
  double parent_fraction = 0.25;
  bool no_crossover = false;
  int max_retries = 100;
  std::uint64_t seed = 0;
  std::string reward = "r2";
};

struct SpaceOptions {
  std::string space;
  EvalOptions eval;
  GaOptions ga;
};

struct SampleOptions {
  std::string space;
  EvalOptions eval;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  std::string ref;
  std::string constraint;
  std::string reward = "r2";
  bool scatter = false;
  int max_retries = 100;
};

struct SearchOptions : SpaceOptions {
  std::string constraint;
  std::string ref;
  bool cas = false;
};

struct FamilyOptions : SpaceOptions {
  std::string budgets;
  std::string lut;
  std::string mode = "s2l";
};

struct SweepOptions : SpaceOptions {
  std::string constraint;
  std::string ref;
  bool cas = false;
  std::string ratios = "0.05,0.1,0.2,0.5,1,2,5,10,20";
};

struct AuditOptions {
  std::vector<std::string> files;
  std::string ref;
  std::string baseline;
};

struct TableOptions {
  std::string space;
  EvalOptions eval;
  std::string format = "bin";
};

struct LutOptions {
  std::string space;
  double ms_per_mmac = 0.02;
  double per_layer_ms = 0.01;
  double overhead_ms = 1.0;
};

int cmd_space_validate(RunContext& ctx, const std::string& space);
int cmd_sample(RunContext& ctx, const SampleOptions& o);
int cmd_search(RunContext& ctx, const SearchOptions& o);
int cmd_family(RunContext& ctx, const FamilyOptions& o);
int cmd_direction(RunContext& ctx, const FamilyOptions& o);
int cmd_transitivity(RunContext& ctx, const FamilyOptions& o);
int cmd_sweep(RunContext& ctx, const SweepOptions& o);
int cmd_audit(RunContext& ctx, const AuditOptions& o);
int cmd_table(RunContext& ctx, const TableOptions& o);
int cmd_lut(RunContext& ctx, const LutOptions& o);

}  // namespace regnas::cli
