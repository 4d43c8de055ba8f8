// SPDX-License-Identifier: Apache-2.0
//
// Compute cost of an architecture and the hard budget constraint C(a) < tau.
//
// Flops are counted as multiply-accumulates (MACs), not 2 * MACs, and
// reported in Mflops = 10^6 MACs. Slots are plain k x k convolutions.
//
// Spatial size: the first stage sees input_resolution x input_resolution
// (the stem does not downsample). The first layer of stage s applies the
// stage stride, output = ceil(input / stride); later layers keep the size.
#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regnas/archspace.hpp"

namespace regnas {

/// Spatial size seen at the input of slot (s, j).
int layer_input_size(const SearchSpace& space, std::size_t s, std::size_t j);
/// Spatial size produced by slot (s, j).
int layer_output_size(const SearchSpace& space, std::size_t s, std::size_t j);

std::uint64_t macs(const Architecture& a);
/// MACs / 10^6.
double flops(const Architecture& a);

struct LatencySignature {
  int stage = 0;
  int slot = 0;
  int kernel = 0;
  int width = 0;
  int c_in = 0;
  int hw = 0;  ///< input spatial size of the layer

  friend auto operator<=>(const LatencySignature&, const LatencySignature&) = default;
  std::string to_string() const;
};

/// Signature of every layer any architecture of the space can contain.
std::vector<LatencySignature> required_signatures(const SearchSpace& space);

/// Exact-match per-layer latency table plus a fixed overhead.
///
/// JSON: {"overhead_ms": 1.0, "entries": [{"stage":0,"slot":0,"kernel":3,
///        "width":16,"c_in":3,"hw":32,"ms":0.12}, ...]}
class LatencyLUT {
 public:
  LatencyLUT(double overhead_ms, std::map<LatencySignature, double> entries);

  static LatencyLUT from_json(const nlohmann::json& j);
  static LatencyLUT load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  /// Linear model ms = per_layer_ms + ms_per_mmac * layer_Mflops over the
  /// space's required signatures. Monotone by construction.
  static LatencyLUT synthesize(const SearchSpace& space, double ms_per_mmac,
                               double per_layer_ms, double overhead_ms);

  double overhead_ms() const noexcept { return overhead_ms_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Throws ConfigError naming the signature when absent.
  double lookup(const LatencySignature& sig) const;

  /// Throws ConfigError listing every signature the space needs but the table
  /// lacks. Returns warnings where latency decreases as kernel, width or c_in
  /// grow (containment monotonicity then no longer holds).
  std::vector<std::string> validate(const SearchSpace& space) const;

 private:
  double overhead_ms_ = 0.0;
  std::map<LatencySignature, double> entries_;
};

/// overhead + sum over active slots of lut[signature].
double latency(const Architecture& a, const LatencyLUT& lut);

enum class CostKind { kFlops, kLatency };

struct CostConstraint {
  CostKind kind = CostKind::kFlops;
  double threshold = 0.0;  ///< Mflops or milliseconds
  std::shared_ptr<const LatencyLUT> lut;

  static CostConstraint flops_budget(double mflops);
  static CostConstraint latency_budget(double ms, std::shared_ptr<const LatencyLUT> lut);

  /// "flops:300" or "latency:30@lut.json" (relative paths resolve against
  /// base_dir). Non-positive or non-finite thresholds are rejected.
  static CostConstraint parse(const std::string& text,
                              const std::filesystem::path& base_dir = {});

  /// Same kind and table with a different threshold.
  CostConstraint with_threshold(double tau) const;

  double cost(const Architecture& a) const;
  bool satisfies(const Architecture& a) const { return cost(a) < threshold; }
  std::string describe() const;
};

inline bool satisfies(const Architecture& a, const CostConstraint& c) { return c.satisfies(a); }

}  // namespace regnas
