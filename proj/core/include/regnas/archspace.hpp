// SPDX-License-Identifier: Apache-2.0
//
// Elastic architecture space: stages of layer slots with per-stage depth and
// per-slot kernel size and width choices, in the once-for-all style.
//
// Weights nest: a kernel of size k shares the centered k_min x k_min window of
// any larger kernel, a layer of width c shares the first c output channels, and
// a stage of depth d shares the first d layers. Under this convention the
// weight-containment relation between two architectures is a partial order.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace regnas {

struct StageDef {
  int max_depth = 1;
  std::vector<int> depth_choices;
  std::vector<int> kernel_choices;
  std::vector<int> width_choices;
  int stride = 1;

  friend bool operator==(const StageDef&, const StageDef&) = default;
};

struct SearchSpaceDef {
  std::vector<StageDef> stages;
  int input_resolution = 224;
  int stem_channels = 3;
  int num_classes = 1000;  // metadata only

  friend bool operator==(const SearchSpaceDef&, const SearchSpaceDef&) = default;
};

inline constexpr std::uint64_t kSpaceSizeCap = (std::uint64_t{1} << 63) - 1;

struct ValidationReport {
  bool ok = false;
  std::vector<std::string> violations;
  /// Number of distinct architectures, saturated at kSpaceSizeCap.
  std::uint64_t space_size = 0;
  bool size_saturated = false;
  /// log10 of the exact size; finite even when the integer saturates.
  double log10_size = 0.0;
};

ValidationReport validate_space(const SearchSpaceDef& def);

class Architecture;

/// A validated, immutable search space. Architectures hold a shared pointer to
/// the space they belong to.
class SearchSpace : public std::enable_shared_from_this<SearchSpace> {
 public:
  /// Throws ConfigError listing every violated invariant.
  static std::shared_ptr<const SearchSpace> create(SearchSpaceDef def);

  const SearchSpaceDef& def() const noexcept { return def_; }
  std::size_t num_stages() const noexcept { return def_.stages.size(); }
  const StageDef& stage(std::size_t s) const { return def_.stages.at(s); }

  std::uint64_t size() const noexcept { return report_.space_size; }
  bool size_saturated() const noexcept { return report_.size_saturated; }
  const ValidationReport& report() const noexcept { return report_; }

  /// Length of the canonical integer encoding: sum over stages of
  /// 1 + 2 * max_depth.
  std::size_t encoding_length() const noexcept { return encoding_length_; }
  std::size_t max_total_slots() const noexcept;

  /// Largest architecture: every axis at its maximum choice.
  Architecture maximal() const;
  /// Smallest architecture: every axis at its minimum choice.
  Architecture minimal() const;

  /// Structural equality of definitions, used to reject mixed-space inputs.
  bool same_as(const SearchSpace& other) const noexcept {
    return this == &other || def_ == other.def_;
  }

 private:
  SearchSpace(SearchSpaceDef def, ValidationReport report);

  SearchSpaceDef def_;
  ValidationReport report_;
  std::size_t encoding_length_ = 0;
};

using SpacePtr = std::shared_ptr<const SearchSpace>;

struct LayerChoice {
  int kernel = 0;
  int width = 0;

  friend bool operator==(const LayerChoice&, const LayerChoice&) = default;
};

/// One point of a search space. Only active slots (j < depth) carry genes.
class Architecture {
 public:
  using StageGenes = std::vector<LayerChoice>;

  /// Validates every gene against the space; throws ConfigError otherwise.
  Architecture(SpacePtr space, std::vector<StageGenes> stages);

  const SearchSpace& space() const noexcept { return *space_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }

  std::size_t num_stages() const noexcept { return stages_.size(); }
  int depth(std::size_t s) const { return static_cast<int>(stages_.at(s).size()); }
  const LayerChoice& layer(std::size_t s, std::size_t j) const { return stages_.at(s).at(j); }
  const std::vector<StageGenes>& stages() const noexcept { return stages_; }

  /// Input channels of slot (s, j): the stem for the very first slot, the
  /// previous slot's width inside a stage, and the widest active layer of the
  /// previous stage across a stage boundary.
  int input_channels(std::size_t s, std::size_t j) const;

  /// Fixed-length canonical encoding. Per stage: depth, then (kernel, width)
  /// for each of max_depth slots with 0 for inactive slots.
  std::vector<int> encode() const;
  static Architecture decode(SpacePtr space, const std::vector<int>& code);

  /// 16 lowercase hex digits of FNV-1a-64 over the encoding, each value
  /// serialized as a 4-byte little-endian two's-complement integer.
  std::string digest() const;

  friend bool operator==(const Architecture& a, const Architecture& b) {
    return a.space_->same_as(*b.space_) && a.stages_ == b.stages_;
  }

 private:
  SpacePtr space_;
  std::vector<StageGenes> stages_;
};

/// Lexicographic order of canonical encodings; the project-wide tie-break.
bool encoding_less(const Architecture& a, const Architecture& b);

std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t h = 0xcbf29ce484222325ull) noexcept;
std::string to_hex64(std::uint64_t v);

/// True iff every weight of ref is also a weight of target: per stage the
/// target is at least as deep, and each of ref's active slots has a kernel and
/// width no smaller in the target. Throws ConfigError on mismatched spaces.
bool contains(const Architecture& ref, const Architecture& target);

/// Sum over active slots of k^2 * c_in * c_out (bias and BN excluded).
std::uint64_t weight_count(const Architecture& a);

/// Size of the nested weight intersection: over slots active in both,
/// min(k)^2 * min(c_in) * min(c_out).
std::uint64_t shared_weight_count(const Architecture& a, const Architecture& b);

/// Calls fn for every architecture in lexicographic encoding order. Stops early
/// when fn returns false.
void for_each_architecture(const SpacePtr& space,
                           const std::function<bool(const Architecture&)>& fn);

/// Enumerates the whole space; throws ConfigError if it exceeds cap.
std::vector<Architecture> enumerate_architectures(const SpacePtr& space,
                                                  std::uint64_t cap = 1'000'000);

// --- Weight units --------------------------------------------------------

/// Atomic shareable tensor slice of one layer slot: one kernel ring, one block
/// of input channels and one block of output channels. Ring r covers the
/// annulus between kernel_choices[r-1] and kernel_choices[r] (ring 0 is the
/// whole innermost window).
struct WeightUnit {
  int stage = 0;
  int slot = 0;
  int ring = 0;
  int in_block = 0;
  int out_block = 0;

  /// Stable 64-bit key: stage<<48 | slot<<40 | ring<<32 | in_block<<16 | out_block.
  std::uint64_t key() const noexcept;

  friend bool operator==(const WeightUnit&, const WeightUnit&) = default;
  friend auto operator<=>(const WeightUnit&, const WeightUnit&) = default;
};

/// Block size actually used for unit enumeration: gcd of the requested block
/// and every channel count in the space (stem and all widths), so a unit set
/// determines channel counts exactly.
int effective_channel_block(const SearchSpace& space, int requested_block);

/// Units of a, sorted by (stage, slot, ring, in_block, out_block).
/// channel_block must be an effective block for the space.
std::vector<WeightUnit> weight_units(const Architecture& a, int channel_block);

/// Number of scalar weights a unit stands for.
std::uint64_t unit_weight_count(const SearchSpace& space, const WeightUnit& u,
                                int channel_block);

// --- Sampling and variation operators ------------------------------------
//
// All operators are pure functions of their inputs and seed. The constrained
// variants truncate each choice list to values >= the reference's value on
// the reference's active slots, so results always contain the reference.

Architecture random_sample(const SpacePtr& space, std::uint64_t seed);
Architecture constrained_sample(const Architecture& ref, std::uint64_t seed);

Architecture mutate(const Architecture& a, double mutate_prob, std::uint64_t seed);
/// Requires contains(ref, a); throws ConfigError otherwise.
Architecture constrained_mutate(const Architecture& ref, const Architecture& a,
                                double mutate_prob, std::uint64_t seed);

/// Per stage, inherits the depth and all slot genes from one parent chosen
/// uniformly.
Architecture crossover(const Architecture& a, const Architecture& b, std::uint64_t seed);
/// Requires both parents to contain ref; throws ConfigError otherwise.
Architecture constrained_crossover(const Architecture& ref, const Architecture& a,
                                   const Architecture& b, std::uint64_t seed);

}  // namespace regnas
