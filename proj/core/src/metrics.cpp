// SPDX-License-Identifier: Apache-2.0
#include "regnas/metrics.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "regnas/errors.hpp"

namespace regnas {

namespace {

std::size_t word_count(std::size_t n) { return (n + 63) / 64; }

void require_same_length(const CorrectnessVector& a, const CorrectnessVector& b) {
  if (a.size() != b.size()) {
    throw EvaluatorError("correctness vectors differ in length (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() == 0) throw ConfigError("correctness vectors must be non-empty");
}

}  // namespace

CorrectnessVector::CorrectnessVector(std::size_t n) : n_(n), words_(word_count(n), 0) {
  if (n == 0) throw ConfigError("correctness vector needs at least one sample");
}

CorrectnessVector CorrectnessVector::from_bools(const std::vector<bool>& bits) {
  CorrectnessVector c(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) c.set(i, bits[i]);
  return c;
}

CorrectnessVector CorrectnessVector::from_string(const std::string& bits) {
  CorrectnessVector c(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') {
      throw ConfigError("correctness string may only contain 0 and 1");
    }
    c.set(i, bits[i] == '1');
  }
  return c;
}

CorrectnessVector CorrectnessVector::from_packed(std::size_t n,
                                                 std::span<const std::uint8_t> bytes) {
  if (bytes.size() != (n + 7) / 8) throw ConfigError("packed bitmap has wrong length");
  CorrectnessVector c(n);
  for (std::size_t i = 0; i < n; ++i) c.set(i, (bytes[i / 8] >> (i % 8)) & 1u);
  return c;
}

bool CorrectnessVector::get(std::size_t i) const {
  if (i >= n_) throw ConfigError("sample index out of range");
  return (words_[i / 64] >> (i % 64)) & 1u;
}

void CorrectnessVector::set(std::size_t i, bool correct) {
  if (i >= n_) throw ConfigError("sample index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (correct) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

std::uint64_t CorrectnessVector::count_correct() const noexcept {
  std::uint64_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
  return n;
}

std::vector<std::uint8_t> CorrectnessVector::packed() const {
  std::vector<std::uint8_t> out((n_ + 7) / 8, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (8 * (i % 8)));
  }
  return out;
}

double top1(const CorrectnessVector& c) {
  if (c.size() == 0) throw ConfigError("top1 of an empty correctness vector");
  return static_cast<double>(c.count_correct()) / static_cast<double>(c.size());
}

std::uint64_t negative_flip_count(const CorrectnessVector& ref, const CorrectnessVector& target) {
  require_same_length(ref, target);
  std::uint64_t n = 0;
  const auto& r = ref.words();
  const auto& t = target.words();
  for (std::size_t w = 0; w < r.size(); ++w) {
    n += static_cast<std::uint64_t>(std::popcount(r[w] & ~t[w]));
  }
  return n;
}

std::uint64_t positive_flip_count(const CorrectnessVector& ref, const CorrectnessVector& target) {
  require_same_length(ref, target);
  std::uint64_t n = 0;
  const auto& r = ref.words();
  const auto& t = target.words();
  for (std::size_t w = 0; w < r.size(); ++w) {
    n += static_cast<std::uint64_t>(std::popcount(~r[w] & t[w]));
  }
  return n;
}

double nfr(const CorrectnessVector& ref, const CorrectnessVector& target) {
  return static_cast<double>(negative_flip_count(ref, target)) / static_cast<double>(ref.size());
}

double pfr(const CorrectnessVector& ref, const CorrectnessVector& target) {
  return static_cast<double>(positive_flip_count(ref, target)) / static_cast<double>(ref.size());
}

// --- Reward --------------------------------------------------------------

RewardConfig RewardConfig::parse(const std::string& text) {
  RewardConfig cfg;
  if (text == "r0" || text == "R0") {
    cfg = r0();
  } else if (text == "r1" || text == "R1") {
    cfg = r1();
  } else if (text == "r2" || text == "R2") {
    cfg = r2();
  } else {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("reward must be r0, r1, r2 or 'lambda1,lambda2', got '" + text + "'");
    }
    try {
      std::size_t u1 = 0;
      std::size_t u2 = 0;
      const std::string a = text.substr(0, comma);
      const std::string b = text.substr(comma + 1);
      cfg.lambda1 = std::stod(a, &u1);
      cfg.lambda2 = std::stod(b, &u2);
      if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw ConfigError("bad reward weights '" + text + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void RewardConfig::validate() const {
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || lambda1 < 0.0 || lambda2 < 0.0) {
    throw ConfigError("reward weights must be finite and >= 0");
  }
  if (lambda1 == 0.0 && lambda2 == 0.0) throw ConfigError("reward weights cannot both be 0");
}

std::string RewardConfig::to_string() const {
  if (*this == r0()) return "r0";
  if (*this == r1()) return "r1";
  if (*this == r2()) return "r2";
  return fmt::format("{},{}", lambda1, lambda2);
}

double reward(double top1_value, double nfr_value, const RewardConfig& cfg) {
  return cfg.lambda1 * top1_value - cfg.lambda2 * nfr_value;
}

// --- Matrices ------------------------------------------------------------

double pairwise_nfr(const CorrectnessVector& a, const CorrectnessVector& b) {
  require_same_length(a, b);
  return a.count_correct() <= b.count_correct() ? nfr(a, b) : nfr(b, a);
}

NfrMatrix nfr_matrix(const std::vector<CorrectnessVector>& models, std::vector<std::string> names) {
  if (models.size() < 2) throw ConfigError("NFR matrix needs at least two models");
  if (names.empty()) {
    for (std::size_t i = 0; i < models.size(); ++i) names.push_back("m" + std::to_string(i));
  }
  if (names.size() != models.size()) throw ConfigError("one name per model required");
  for (const auto& m : models) require_same_length(models.front(), m);

  const std::size_t k = models.size();
  NfrMatrix out;
  out.names = std::move(names);
  out.n_samples = models.front().size();
  out.nfr.assign(k, std::vector<double>(k, 0.0));
  out.flips.assign(k, std::vector<std::uint64_t>(k, 0));
  for (const auto& m : models) {
    out.correct.push_back(m.count_correct());
    out.top1.push_back(top1(m));
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      // Lower Top-1 model plays the reference; ties keep input order.
      const bool i_first = out.correct[i] <= out.correct[j];
      const std::uint64_t f = i_first ? negative_flip_count(models[i], models[j])
                                      : negative_flip_count(models[j], models[i]);
      out.flips[i][j] = out.flips[j][i] = f;
      out.nfr[i][j] = out.nfr[j][i] = static_cast<double>(f) / static_cast<double>(out.n_samples);
    }
  }
  return out;
}

double NfrMatrix::mean_pairwise_nfr() const {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < nfr.size(); ++i) {
    for (std::size_t j = i + 1; j < nfr.size(); ++j) {
      sum += nfr[i][j];
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

std::string NfrMatrix::to_csv() const {
  std::string out = "model";
  for (const auto& n : names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += names[i];
    for (std::size_t j = 0; j < names.size(); ++j) {
      out += fmt::format(",{:.6f}", i == j ? top1[i] : nfr[i][j]);
    }
    out += "\n";
  }
  return out;
}

double relative_change(double m1, double m2) {
  if (m2 == 0.0) throw ConfigError("relative change is undefined for a zero baseline");
  return (m1 - m2) / m2;
}

}  // namespace regnas
