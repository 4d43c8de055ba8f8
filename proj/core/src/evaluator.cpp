// SPDX-License-Identifier: Apache-2.0
#include "regnas/evaluator.hpp"

#include <algorithm>
#include <cmath>

#include "regnas/errors.hpp"
#include "regnas/rng.hpp"
#include "regnas/serialization.hpp"

namespace regnas {

namespace {

constexpr std::uint64_t kDifficultyStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
// Precompute deviates while the table stays under 64 MiB.
constexpr std::size_t kMaxDeviateTable = std::size_t{1} << 23;

const double kSqrt12 = std::sqrt(12.0);

}  // namespace

// --- SyntheticParams -------------------------------------------------------

SyntheticParams SyntheticParams::from_json(const nlohmann::json& j) {
  return from_json(j, SyntheticParams{});
}

SyntheticParams SyntheticParams::from_json(const nlohmann::json& j, SyntheticParams base) {
  if (!j.is_object()) throw ConfigError("synthetic evaluator config must be a JSON object");
  try {
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_samples")) base.n_samples = j.at("n_samples").get<std::size_t>();
    if (j.contains("beta")) base.beta = j.at("beta").get<double>();
    if (j.contains("sigma")) base.sigma = j.at("sigma").get<double>();
    if (j.contains("channel_block")) base.channel_block = j.at("channel_block").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad synthetic evaluator config: ") + e.what());
  }
  base.validate();
  return base;
}

nlohmann::json SyntheticParams::to_json() const {
  return {{"seed", seed},
          {"n_samples", n_samples},
          {"beta", beta},
          {"sigma", sigma},
          {"channel_block", channel_block}};
}

void SyntheticParams::validate() const {
  if (n_samples == 0) throw ConfigError("synthetic evaluator needs n_samples > 0");
  if (!std::isfinite(beta) || beta < 0.0) throw ConfigError("beta must be finite and >= 0");
  if (!std::isfinite(sigma) || sigma < 0.0) throw ConfigError("sigma must be finite and >= 0");
  if (channel_block < 1) throw ConfigError("channel_block must be >= 1");
}

// --- SyntheticSupernet -----------------------------------------------------

double SyntheticSupernet::deviate(std::uint64_t seed, std::uint64_t sample,
                                  std::uint64_t unit_key) {
  const double u = to_unit_interval(hash_words(seed, {kNoiseStream, sample, unit_key}));
  return (u + 0x1.0p-54 - 0.5) * kSqrt12;
}

SyntheticSupernet::SyntheticSupernet(SpacePtr space, SyntheticParams params)
    : space_(std::move(space)), params_(params) {
  if (!space_) throw ConfigError("synthetic evaluator requires a search space");
  params_.validate();
  block_ = effective_channel_block(*space_, params_.channel_block);
  max_weights_ = static_cast<double>(weight_count(space_->maximal()));

  difficulty_.resize(params_.n_samples);
  for (std::size_t i = 0; i < params_.n_samples; ++i) {
    difficulty_[i] = to_unit_interval(hash_words(params_.seed, {kDifficultyStream, i}));
  }

  // Dense layout over every unit the maximal architecture owns; any other
  // architecture's units are a subset.
  const auto& def = space_->def();
  auto blocks = [&](int channels) {
    return static_cast<std::size_t>((channels + block_ - 1) / block_);
  };
  std::size_t offset = 0;
  layout_.resize(def.stages.size());
  for (std::size_t s = 0; s < def.stages.size(); ++s) {
    const StageDef& st = def.stages[s];
    const std::size_t rings = st.kernel_choices.size();
    const std::size_t out_blocks = blocks(st.width_choices.back());
    for (std::size_t j = 0; j < static_cast<std::size_t>(st.max_depth); ++j) {
      int max_in = st.width_choices.back();
      if (j == 0) max_in = s == 0 ? def.stem_channels : def.stages[s - 1].width_choices.back();
      SlotLayout l{offset, blocks(max_in), out_blocks};
      layout_[s].push_back(l);
      offset += rings * l.in_blocks * l.out_blocks;
    }
  }

  const std::size_t n = params_.n_samples;
  if (offset * n <= kMaxDeviateTable && params_.sigma > 0.0) {
    deviates_.resize(offset * n);
    for (std::size_t s = 0; s < layout_.size(); ++s) {
      const std::size_t rings = def.stages[s].kernel_choices.size();
      for (std::size_t j = 0; j < layout_[s].size(); ++j) {
        const SlotLayout& l = layout_[s][j];
        for (std::size_t r = 0; r < rings; ++r) {
          for (std::size_t ib = 0; ib < l.in_blocks; ++ib) {
            for (std::size_t ob = 0; ob < l.out_blocks; ++ob) {
              const WeightUnit u{static_cast<int>(s), static_cast<int>(j), static_cast<int>(r),
                                 static_cast<int>(ib), static_cast<int>(ob)};
              double* row = deviates_.data() + dense_index(u) * n;
              const std::uint64_t key = u.key();
              for (std::size_t i = 0; i < n; ++i) row[i] = deviate(params_.seed, i, key);
            }
          }
        }
      }
    }
  }
}

std::size_t SyntheticSupernet::dense_index(const WeightUnit& u) const {
  const SlotLayout& l = layout_[static_cast<std::size_t>(u.stage)][static_cast<std::size_t>(u.slot)];
  return l.offset + (static_cast<std::size_t>(u.ring) * l.in_blocks +
                     static_cast<std::size_t>(u.in_block)) * l.out_blocks +
         static_cast<std::size_t>(u.out_block);
}

void SyntheticSupernet::require_space(const Architecture& a) const {
  if (!a.space().same_as(*space_)) {
    throw ConfigError("architecture does not belong to the evaluator's search space");
  }
}

double SyntheticSupernet::difficulty(std::size_t i) const {
  if (i >= difficulty_.size()) throw ConfigError("sample index out of range");
  return difficulty_[i];
}

double SyntheticSupernet::capacity(const Architecture& a) const {
  require_space(a);
  return static_cast<double>(weight_count(a)) / max_weights_;
}

double SyntheticSupernet::noise_sum(const std::vector<WeightUnit>& units, std::size_t i) const {
  double sum = 0.0;
  if (!deviates_.empty()) {
    const std::size_t n = params_.n_samples;
    for (const WeightUnit& u : units) sum += deviates_[dense_index(u) * n + i];
  } else {
    for (const WeightUnit& u : units) sum += deviate(params_.seed, i, u.key());
  }
  return sum;
}

double SyntheticSupernet::margin(const Architecture& a, std::size_t i) const {
  if (i >= params_.n_samples) throw ConfigError("sample index out of range");
  const double cap = capacity(a);
  if (params_.sigma == 0.0) return params_.beta * cap - difficulty_[i];
  const auto units = weight_units(a, block_);
  const double scale = std::sqrt(static_cast<double>(units.size()));
  return params_.beta * cap - difficulty_[i] + params_.sigma * (noise_sum(units, i) / scale);
}

std::vector<double> SyntheticSupernet::margins(const Architecture& a) const {
  const double cap = capacity(a);
  const std::size_t n = params_.n_samples;
  std::vector<double> out(n);
  if (params_.sigma == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out[i] = params_.beta * cap - difficulty_[i];
    return out;
  }
  const auto units = weight_units(a, block_);
  const double scale = std::sqrt(static_cast<double>(units.size()));
  std::vector<double> sum(n, 0.0);
  if (!deviates_.empty()) {
    // Unit-major accumulation; each sample still adds units in the same order
    // as noise_sum, so results match margin() bit for bit.
    for (const WeightUnit& u : units) {
      const double* row = deviates_.data() + dense_index(u) * n;
      for (std::size_t i = 0; i < n; ++i) sum[i] += row[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) sum[i] = noise_sum(units, i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = params_.beta * cap - difficulty_[i] + params_.sigma * (sum[i] / scale);
  }
  return out;
}

CorrectnessVector SyntheticSupernet::evaluate(const Architecture& a) const {
  const auto m = margins(a);
  CorrectnessVector c(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] > 0.0) c.set(i, true);
  }
  return c;
}

nlohmann::json SyntheticSupernet::describe() const {
  nlohmann::json j = params_.to_json();
  j["kind"] = "synthetic";
  j["effective_channel_block"] = block_;
  return j;
}

// --- PredictionTable -------------------------------------------------------

PredictionTable::PredictionTable(SpacePtr space, const std::vector<NamedCorrectness>& models,
                                 nlohmann::json provenance)
    : space_(std::move(space)), provenance_(std::move(provenance)) {
  if (!space_) throw ConfigError("prediction table requires a search space");
  if (models.empty()) throw ConfigError("prediction table is empty");
  n_samples_ = models.front().bits.size();
  for (const auto& m : models) {
    if (m.bits.size() != n_samples_) {
      throw EvaluatorError("prediction table entries differ in sample count");
    }
    Architecture a = architecture_from_encoding_string(space_, m.name);
    Entry e{a.encode(), m.bits};
    const std::string digest = a.digest();
    auto [it, inserted] = entries_.emplace(digest, e);
    if (!inserted) {
      if (it->second.encoding == e.encoding) {
        throw ConfigError("prediction table lists architecture " + digest + " twice");
      }
      throw ConfigError("digest collision in prediction table at " + digest);
    }
  }
}

PredictionTable PredictionTable::load(SpacePtr space, const std::filesystem::path& path) {
  return PredictionTable(std::move(space), read_predictions(path),
                         {{"path", path.string()}});
}

const CorrectnessVector& PredictionTable::lookup(const Architecture& a) const {
  const std::string digest = a.digest();
  auto it = entries_.find(digest);
  if (it == entries_.end() || it->second.encoding != a.encode()) {
    throw EvaluatorError("prediction table has no entry for architecture " + digest + " [" +
                         encoding_string(a) + "]");
  }
  return it->second.bits;
}

bool PredictionTable::contains(const Architecture& a) const {
  auto it = entries_.find(a.digest());
  return it != entries_.end() && it->second.encoding == a.encode();
}

TableEvaluator::TableEvaluator(std::shared_ptr<const PredictionTable> table)
    : table_(std::move(table)) {
  if (!table_) throw ConfigError("table evaluator requires a table");
}

CorrectnessVector TableEvaluator::evaluate(const Architecture& a) const {
  return table_->lookup(a);
}

nlohmann::json TableEvaluator::describe() const {
  return {{"kind", "table"},
          {"entries", table_->size()},
          {"n_samples", table_->n_samples()},
          {"provenance", table_->provenance()}};
}

// --- CachingEvaluator ------------------------------------------------------

CachingEvaluator::CachingEvaluator(EvaluatorPtr inner) : inner_(std::move(inner)) {
  if (!inner_) throw ConfigError("caching evaluator requires an evaluator");
}

CorrectnessVector CachingEvaluator::evaluate(const Architecture& a) const {
  auto key = a.encode();
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  CorrectnessVector c = inner_->evaluate(a);
  std::lock_guard lock(mu_);
  return cache_.emplace(std::move(key), std::move(c)).first->second;
}

std::size_t CachingEvaluator::cached() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

std::vector<NamedCorrectness> tabulate(const SpacePtr& space, const Evaluator& evaluator,
                                       std::uint64_t cap) {
  std::vector<NamedCorrectness> out;
  for (const Architecture& a : enumerate_architectures(space, cap)) {
    out.push_back({encoding_string(a, '-'), evaluator.evaluate(a)});
  }
  return out;
}

}  // namespace regnas
