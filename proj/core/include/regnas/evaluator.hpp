// SPDX-License-Identifier: Apache-2.0
//
// Architecture evaluators: anything that maps an architecture to a
// per-sample correctness bitmap on a fixed evaluation set.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "regnas/archspace.hpp"
#include "regnas/metrics.hpp"
#include "regnas/prediction_io.hpp"

namespace regnas {

/// Evaluators are immutable after construction and safe to call from many
/// threads at once.
class Evaluator {
 public:
  virtual ~Evaluator() = default;

  virtual CorrectnessVector evaluate(const Architecture& a) const = 0;
  virtual std::size_t n_samples() const = 0;
  /// Short self-description recorded in run manifests.
  virtual nlohmann::json describe() const = 0;
};

using EvaluatorPtr = std::shared_ptr<const Evaluator>;

// --- Synthetic supernet ----------------------------------------------------

struct SyntheticParams {
  std::uint64_t seed = 0;
  std::size_t n_samples = 10'000;
  double beta = 1.0;      ///< capacity gain
  double sigma = 0.3;     ///< noise scale
  int channel_block = 8;  ///< requested channel-block size for weight units

  /// Reads any subset of {"seed","n_samples","beta","sigma","channel_block"}.
  static SyntheticParams from_json(const nlohmann::json& j);
  /// Fields missing from j keep their value in base.
  static SyntheticParams from_json(const nlohmann::json& j, SyntheticParams base);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Deterministic stand-in for a weight-sharing supernet.
///
/// Sample i has difficulty d_i in [0, 1). Architecture a gets the margin
///
///   margin_i(a) = beta * cap(a) - d_i + sigma * sum_{u in units(a)} g(i, u) / sqrt(|units(a)|)
///
/// with cap(a) = weight_count(a) / weight_count(maximal) and g a zero-mean,
/// unit-variance deviate, and is correct on i iff margin_i(a) > 0. Two
/// architectures sharing many weight units share most of their noise, so they
/// agree sample-by-sample; disjoint ones flip independently.
///
/// Construction of the random terms (keys as in hash_words):
///   d_i       = to_unit_interval(hash_words(seed, {1, i}))
///   g(i, u)   = (to_unit_interval(hash_words(seed, {2, i, u.key()})) + 2^-54 - 0.5) * sqrt(12)
/// Noise is summed over units in weight_units() order.
class SyntheticSupernet final : public Evaluator {
 public:
  SyntheticSupernet(SpacePtr space, SyntheticParams params);

  const SyntheticParams& params() const noexcept { return params_; }
  const SearchSpace& space() const noexcept { return *space_; }
  /// Block size used for unit enumeration (see effective_channel_block).
  int channel_block() const noexcept { return block_; }

  double difficulty(std::size_t i) const;
  double capacity(const Architecture& a) const;
  /// Throws ConfigError when i >= n_samples.
  double margin(const Architecture& a, std::size_t i) const;
  std::vector<double> margins(const Architecture& a) const;

  CorrectnessVector evaluate(const Architecture& a) const override;
  std::size_t n_samples() const override { return params_.n_samples; }
  nlohmann::json describe() const override;

  static double deviate(std::uint64_t seed, std::uint64_t sample, std::uint64_t unit_key);

 private:
  void require_space(const Architecture& a) const;
  std::size_t dense_index(const WeightUnit& u) const;
  double noise_sum(const std::vector<WeightUnit>& units, std::size_t i) const;

  SpacePtr space_;
  SyntheticParams params_;
  int block_ = 1;
  double max_weights_ = 1.0;
  std::vector<double> difficulty_;

  // Per-slot layout of the dense unit index; deviates are precomputed
  // unit-major when the table fits, otherwise hashed on demand.
  struct SlotLayout {
    std::size_t offset = 0;
    std::size_t in_blocks = 0;
    std::size_t out_blocks = 0;
  };
  std::vector<std::vector<SlotLayout>> layout_;
  std::vector<double> deviates_;
};

// --- Prediction tables -----------------------------------------------------

/// Externally produced correctness bitmaps keyed by architecture. Model names
/// in the underlying prediction file are canonical encodings joined by '-'
/// (or ',').
class PredictionTable {
 public:
  /// Rejects duplicate architectures, digest collisions, foreign encodings and
  /// length mismatches.
  PredictionTable(SpacePtr space, const std::vector<NamedCorrectness>& models,
                  nlohmann::json provenance = {});

  static PredictionTable load(SpacePtr space, const std::filesystem::path& path);

  /// Throws EvaluatorError naming the digest when the architecture is absent.
  const CorrectnessVector& lookup(const Architecture& a) const;
  bool contains(const Architecture& a) const;

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t n_samples() const noexcept { return n_samples_; }
  const nlohmann::json& provenance() const noexcept { return provenance_; }

 private:
  struct Entry {
    std::vector<int> encoding;
    CorrectnessVector bits;
  };
  SpacePtr space_;
  std::size_t n_samples_ = 0;
  std::map<std::string, Entry> entries_;  // by digest
  nlohmann::json provenance_;
};

class TableEvaluator final : public Evaluator {
 public:
  explicit TableEvaluator(std::shared_ptr<const PredictionTable> table);

  CorrectnessVector evaluate(const Architecture& a) const override;
  std::size_t n_samples() const override { return table_->n_samples(); }
  nlohmann::json describe() const override;

 private:
  std::shared_ptr<const PredictionTable> table_;
};

/// Memoizes another evaluator by canonical encoding. Returned values are
/// identical to the wrapped evaluator's, so the cache is unobservable.
class CachingEvaluator final : public Evaluator {
 public:
  explicit CachingEvaluator(EvaluatorPtr inner);

  CorrectnessVector evaluate(const Architecture& a) const override;
  std::size_t n_samples() const override { return inner_->n_samples(); }
  nlohmann::json describe() const override { return inner_->describe(); }

  std::size_t cached() const;

 private:
  EvaluatorPtr inner_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<int>, CorrectnessVector> cache_;
};

/// Evaluates every architecture of an enumerable space into a table, labelled
/// by encoding. Used to produce fixtures for the table evaluator.
std::vector<NamedCorrectness> tabulate(const SpacePtr& space, const Evaluator& evaluator,
                                       std::uint64_t cap = 1'000'000);

}  // namespace regnas
