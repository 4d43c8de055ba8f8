// SPDX-License-Identifier: Apache-2.0
//
// Correctness-based model comparison metrics.
//
// Everything is computed from exact integer counts and divided by N once, so
// the flip accounting identity top1(t) - top1(r) == pfr(r, t) - nfr(r, t)
// holds exactly on the counts.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace regnas {

/// Per-sample correctness bitmap of one model on a fixed evaluation set.
class CorrectnessVector {
 public:
  CorrectnessVector() = default;
  /// All-wrong vector of n samples; n must be positive.
  explicit CorrectnessVector(std::size_t n);

  static CorrectnessVector from_bools(const std::vector<bool>& bits);
  /// "1101" style string; '1' correct, '0' wrong.
  static CorrectnessVector from_string(const std::string& bits);
  /// Packed LSB-first bytes of ceil(n / 8) length.
  static CorrectnessVector from_packed(std::size_t n, std::span<const std::uint8_t> bytes);

  std::size_t size() const noexcept { return n_; }
  bool get(std::size_t i) const;
  void set(std::size_t i, bool correct);

  std::uint64_t count_correct() const noexcept;
  std::vector<std::uint8_t> packed() const;
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const CorrectnessVector&, const CorrectnessVector&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// popcount / N. Throws ConfigError on an empty vector.
double top1(const CorrectnessVector& c);

/// Count of samples correct under ref and wrong under target.
std::uint64_t negative_flip_count(const CorrectnessVector& ref, const CorrectnessVector& target);
/// Count of samples wrong under ref and correct under target.
std::uint64_t positive_flip_count(const CorrectnessVector& ref, const CorrectnessVector& target);

/// Negative flip rate; asymmetric in its arguments. Throws EvaluatorError on
/// length mismatch.
double nfr(const CorrectnessVector& ref, const CorrectnessVector& target);
/// Positive flip rate, the dual of nfr.
double pfr(const CorrectnessVector& ref, const CorrectnessVector& target);

struct RewardConfig {
  double lambda1 = 1.0;  ///< weight on Top-1
  double lambda2 = 1.0;  ///< weight on NFR

  static RewardConfig r0() { return {1.0, 0.0}; }
  static RewardConfig r1() { return {0.0, 1.0}; }
  static RewardConfig r2() { return {1.0, 1.0}; }

  /// "r0", "r1", "r2" or "l1,l2". Throws ConfigError on invalid weights.
  static RewardConfig parse(const std::string& text);
  /// Throws ConfigError unless both weights are finite, >= 0 and not both 0.
  void validate() const;
  std::string to_string() const;

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

/// lambda1 * top1 - lambda2 * nfr.
double reward(double top1_value, double nfr_value, const RewardConfig& cfg);

/// Pairwise NFR over a model family. For each unordered pair the model with
/// the lower Top-1 is the first argument of nfr (the earlier model on ties);
/// the value is stored symmetrically. The diagonal of `nfr` is 0.
struct NfrMatrix {
  std::vector<std::string> names;
  std::vector<double> top1;
  std::vector<std::uint64_t> correct;
  std::vector<std::vector<double>> nfr;
  std::vector<std::vector<std::uint64_t>> flips;
  std::size_t n_samples = 0;

  /// Mean over unordered pairs.
  double mean_pairwise_nfr() const;
  /// CSV: header "model,<names...>", one row per model, Top-1 on the
  /// diagonal, NFR elsewhere.
  std::string to_csv() const;
};

NfrMatrix nfr_matrix(const std::vector<CorrectnessVector>& models,
                     std::vector<std::string> names = {});

/// NFR of a pair under the lower-Top-1-first convention (a first on ties).
double pairwise_nfr(const CorrectnessVector& a, const CorrectnessVector& b);

/// (m1 - m2) / m2. Throws ConfigError when m2 == 0.
double relative_change(double m1, double m2);

}  // namespace regnas
