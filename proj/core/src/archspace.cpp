// SPDX-License-Identifier: Apache-2.0
#include "regnas/archspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "regnas/errors.hpp"

namespace regnas {

namespace {

bool strictly_ascending(const std::vector<int>& v) {
  return std::adjacent_find(v.begin(), v.end(),
                            [](int a, int b) { return a >= b; }) == v.end();
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b, bool& saturated) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r) || r > kSpaceSizeCap) {
    saturated = true;
    return kSpaceSizeCap;
  }
  return r;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b, bool& saturated) {
  std::uint64_t r = 0;
  if (__builtin_add_overflow(a, b, &r) || r > kSpaceSizeCap) {
    saturated = true;
    return kSpaceSizeCap;
  }
  return r;
}

void check_choices(std::vector<std::string>& out, std::size_t s, const char* name,
                   const std::vector<int>& v) {
  std::ostringstream msg;
  if (v.empty()) {
    msg << "stage " << s << ": " << name << " must be non-empty";
    out.push_back(msg.str());
    return;
  }
  if (!strictly_ascending(v)) {
    msg << "stage " << s << ": " << name << " must be strictly ascending";
    out.push_back(msg.str());
  }
  if (v.front() < 1) {
    std::ostringstream m;
    m << "stage " << s << ": " << name << " values must be >= 1";
    out.push_back(m.str());
  }
}

}  // namespace

ValidationReport validate_space(const SearchSpaceDef& def) {
  ValidationReport r;
  auto& v = r.violations;
  if (def.stages.empty()) v.emplace_back("space must have at least one stage");
  if (def.input_resolution < 1) v.emplace_back("input_resolution must be >= 1");
  if (def.stem_channels < 1) v.emplace_back("stem_channels must be >= 1");
  if (def.stages.size() > 255) v.emplace_back("at most 255 stages are supported");

  for (std::size_t s = 0; s < def.stages.size(); ++s) {
    const StageDef& st = def.stages[s];
    if (st.max_depth < 1 || st.max_depth > 255) {
      v.push_back("stage " + std::to_string(s) + ": max_depth must be in 1..255");
    }
    if (st.stride < 1) v.push_back("stage " + std::to_string(s) + ": stride must be >= 1");
    check_choices(v, s, "depth_choices", st.depth_choices);
    check_choices(v, s, "kernel_choices", st.kernel_choices);
    check_choices(v, s, "width_choices", st.width_choices);
    for (int k : st.kernel_choices) {
      if (k % 2 == 0) {
        v.push_back("stage " + std::to_string(s) + ": kernel must be odd (got " +
                    std::to_string(k) + ")");
      }
    }
    if (!st.depth_choices.empty()) {
      for (int d : st.depth_choices) {
        if (d > st.max_depth) {
          v.push_back("stage " + std::to_string(s) + ": depth choice " + std::to_string(d) +
                      " exceeds max_depth");
        }
      }
      if (st.depth_choices.back() != st.max_depth) {
        v.push_back("stage " + std::to_string(s) +
                    ": max(depth_choices) must equal max_depth");
      }
    }
  }
  r.ok = v.empty();
  if (!r.ok) return r;

  bool saturated = false;
  std::uint64_t total = 1;
  double log10_total = 0.0;
  for (const StageDef& st : def.stages) {
    const std::uint64_t per_slot =
        static_cast<std::uint64_t>(st.kernel_choices.size() * st.width_choices.size());
    std::uint64_t stage_sum = 0;
    double stage_sum_real = 0.0;
    for (int d : st.depth_choices) {
      std::uint64_t term = 1;
      for (int i = 0; i < d; ++i) term = saturating_mul(term, per_slot, saturated);
      stage_sum = saturating_add(stage_sum, term, saturated);
      stage_sum_real += std::pow(static_cast<double>(per_slot), d);
    }
    total = saturating_mul(total, stage_sum, saturated);
    log10_total += std::log10(stage_sum_real);
  }
  r.space_size = total;
  r.size_saturated = saturated;
  r.log10_size = log10_total;
  return r;
}

// --- SearchSpace ---------------------------------------------------------

SearchSpace::SearchSpace(SearchSpaceDef def, ValidationReport report)
    : def_(std::move(def)), report_(std::move(report)) {
  for (const StageDef& st : def_.stages) {
    encoding_length_ += 1 + 2 * static_cast<std::size_t>(st.max_depth);
  }
}

std::shared_ptr<const SearchSpace> SearchSpace::create(SearchSpaceDef def) {
  ValidationReport report = validate_space(def);
  if (!report.ok) {
    std::string msg = "invalid search space:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  return std::shared_ptr<const SearchSpace>(new SearchSpace(std::move(def), std::move(report)));
}

std::size_t SearchSpace::max_total_slots() const noexcept {
  std::size_t n = 0;
  for (const StageDef& st : def_.stages) n += static_cast<std::size_t>(st.max_depth);
  return n;
}

Architecture SearchSpace::maximal() const {
  std::vector<Architecture::StageGenes> stages;
  for (const StageDef& st : def_.stages) {
    stages.emplace_back(static_cast<std::size_t>(st.max_depth),
                        LayerChoice{st.kernel_choices.back(), st.width_choices.back()});
  }
  return Architecture(shared_from_this(), std::move(stages));
}

Architecture SearchSpace::minimal() const {
  std::vector<Architecture::StageGenes> stages;
  for (const StageDef& st : def_.stages) {
    stages.emplace_back(static_cast<std::size_t>(st.depth_choices.front()),
                        LayerChoice{st.kernel_choices.front(), st.width_choices.front()});
  }
  return Architecture(shared_from_this(), std::move(stages));
}

// --- Architecture --------------------------------------------------------

Architecture::Architecture(SpacePtr space, std::vector<StageGenes> stages)
    : space_(std::move(space)), stages_(std::move(stages)) {
  if (!space_) throw ConfigError("architecture requires a search space");
  const auto& def = space_->def();
  if (stages_.size() != def.stages.size()) {
    throw ConfigError("architecture has " + std::to_string(stages_.size()) +
                      " stages, space has " + std::to_string(def.stages.size()));
  }
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const StageDef& st = def.stages[s];
    const int d = static_cast<int>(stages_[s].size());
    if (!std::binary_search(st.depth_choices.begin(), st.depth_choices.end(), d)) {
      throw ConfigError("stage " + std::to_string(s) + ": depth " + std::to_string(d) +
                        " is not an allowed choice");
    }
    for (std::size_t j = 0; j < stages_[s].size(); ++j) {
      const LayerChoice& c = stages_[s][j];
      if (!std::binary_search(st.kernel_choices.begin(), st.kernel_choices.end(), c.kernel)) {
        throw ConfigError("stage " + std::to_string(s) + " slot " + std::to_string(j) +
                          ": kernel " + std::to_string(c.kernel) + " is not an allowed choice");
      }
      if (!std::binary_search(st.width_choices.begin(), st.width_choices.end(), c.width)) {
        throw ConfigError("stage " + std::to_string(s) + " slot " + std::to_string(j) +
                          ": width " + std::to_string(c.width) + " is not an allowed choice");
      }
    }
  }
}

int Architecture::input_channels(std::size_t s, std::size_t j) const {
  if (j > 0) return stages_.at(s).at(j - 1).width;
  if (s == 0) return space_->def().stem_channels;
  const StageGenes& prev = stages_.at(s - 1);
  int widest = 0;
  for (const LayerChoice& c : prev) widest = std::max(widest, c.width);
  return widest;
}

std::vector<int> Architecture::encode() const {
  std::vector<int> code;
  code.reserve(space_->encoding_length());
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const int max_depth = space_->stage(s).max_depth;
    code.push_back(static_cast<int>(stages_[s].size()));
    for (int j = 0; j < max_depth; ++j) {
      if (static_cast<std::size_t>(j) < stages_[s].size()) {
        code.push_back(stages_[s][j].kernel);
        code.push_back(stages_[s][j].width);
      } else {
        code.push_back(0);
        code.push_back(0);
      }
    }
  }
  return code;
}

Architecture Architecture::decode(SpacePtr space, const std::vector<int>& code) {
  if (!space) throw ConfigError("decode requires a search space");
  if (code.size() != space->encoding_length()) {
    throw ConfigError("encoding has length " + std::to_string(code.size()) + ", expected " +
                      std::to_string(space->encoding_length()));
  }
  std::vector<StageGenes> stages;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < space->num_stages(); ++s) {
    const int max_depth = space->stage(s).max_depth;
    const int depth = code[pos++];
    if (depth < 1 || depth > max_depth) {
      throw ConfigError("stage " + std::to_string(s) + ": encoded depth " +
                        std::to_string(depth) + " out of range");
    }
    StageGenes genes;
    for (int j = 0; j < max_depth; ++j) {
      const int k = code[pos++];
      const int w = code[pos++];
      if (j < depth) {
        genes.push_back({k, w});
      } else if (k != 0 || w != 0) {
        throw ConfigError("stage " + std::to_string(s) + " slot " + std::to_string(j) +
                          ": inactive slot must be encoded as 0");
      }
    }
    stages.push_back(std::move(genes));
  }
  return Architecture(std::move(space), std::move(stages));
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_hex64(std::uint64_t v) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string Architecture::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (int value : encode()) {
    const auto u = static_cast<std::uint32_t>(value);
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(u & 0xff), static_cast<unsigned char>((u >> 8) & 0xff),
        static_cast<unsigned char>((u >> 16) & 0xff), static_cast<unsigned char>(u >> 24)};
    h = fnv1a64(bytes, 4, h);
  }
  return to_hex64(h);
}

bool encoding_less(const Architecture& a, const Architecture& b) {
  const auto ea = a.encode();
  const auto eb = b.encode();
  return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end());
}

// --- Partial order and weight arithmetic ---------------------------------

namespace {

void require_same_space(const Architecture& a, const Architecture& b) {
  if (!a.space().same_as(b.space())) {
    throw ConfigError("architectures belong to different search spaces");
  }
}

}  // namespace

bool contains(const Architecture& ref, const Architecture& target) {
  require_same_space(ref, target);
  for (std::size_t s = 0; s < ref.num_stages(); ++s) {
    const int dr = ref.depth(s);
    if (target.depth(s) < dr) return false;
    for (int j = 0; j < dr; ++j) {
      const LayerChoice& r = ref.layer(s, static_cast<std::size_t>(j));
      const LayerChoice& t = target.layer(s, static_cast<std::size_t>(j));
      if (t.kernel < r.kernel || t.width < r.width) return false;
    }
  }
  return true;
}

std::uint64_t weight_count(const Architecture& a) {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < a.num_stages(); ++s) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(a.depth(s)); ++j) {
      const auto k = static_cast<std::uint64_t>(a.layer(s, j).kernel);
      const auto cin = static_cast<std::uint64_t>(a.input_channels(s, j));
      const auto cout = static_cast<std::uint64_t>(a.layer(s, j).width);
      total += k * k * cin * cout;
    }
  }
  return total;
}

std::uint64_t shared_weight_count(const Architecture& a, const Architecture& b) {
  require_same_space(a, b);
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < a.num_stages(); ++s) {
    const auto common = static_cast<std::size_t>(std::min(a.depth(s), b.depth(s)));
    for (std::size_t j = 0; j < common; ++j) {
      const auto k = static_cast<std::uint64_t>(std::min(a.layer(s, j).kernel, b.layer(s, j).kernel));
      const auto cin =
          static_cast<std::uint64_t>(std::min(a.input_channels(s, j), b.input_channels(s, j)));
      const auto cout =
          static_cast<std::uint64_t>(std::min(a.layer(s, j).width, b.layer(s, j).width));
      total += k * k * cin * cout;
    }
  }
  return total;
}

// --- Enumeration ---------------------------------------------------------

namespace {

// Walks encoding positions in order with ascending values, which yields
// architectures in lexicographic encoding order.
class Enumerator {
 public:
  Enumerator(const SpacePtr& space, const std::function<bool(const Architecture&)>& fn)
      : space_(space), fn_(fn), stages_(space->num_stages()) {}

  bool run() { return stage(0); }

 private:
  bool stage(std::size_t s) {
    if (s == stages_.size()) return fn_(Architecture(space_, stages_));
    for (int d : space_->stage(s).depth_choices) {
      stages_[s].assign(static_cast<std::size_t>(d), LayerChoice{});
      if (!slot(s, 0)) return false;
    }
    return true;
  }

  bool slot(std::size_t s, std::size_t j) {
    if (j == stages_[s].size()) return stage(s + 1);
    const StageDef& st = space_->stage(s);
    for (int k : st.kernel_choices) {
      for (int w : st.width_choices) {
        stages_[s][j] = {k, w};
        if (!slot(s, j + 1)) return false;
      }
    }
    return true;
  }

  const SpacePtr& space_;
  const std::function<bool(const Architecture&)>& fn_;
  std::vector<Architecture::StageGenes> stages_;
};

}  // namespace

void for_each_architecture(const SpacePtr& space,
                           const std::function<bool(const Architecture&)>& fn) {
  Enumerator(space, fn).run();
}

std::vector<Architecture> enumerate_architectures(const SpacePtr& space, std::uint64_t cap) {
  if (space->size_saturated() || space->size() > cap) {
    throw ConfigError("search space too large to enumerate (" +
                      std::to_string(space->size()) + " > cap " + std::to_string(cap) + ")");
  }
  std::vector<Architecture> out;
  out.reserve(static_cast<std::size_t>(space->size()));
  for_each_architecture(space, [&](const Architecture& a) {
    out.push_back(a);
    return true;
  });
  return out;
}

// --- Weight units --------------------------------------------------------

std::uint64_t WeightUnit::key() const noexcept {
  return (static_cast<std::uint64_t>(stage) << 48) | (static_cast<std::uint64_t>(slot) << 40) |
         (static_cast<std::uint64_t>(ring) << 32) |
         (static_cast<std::uint64_t>(in_block) << 16) | static_cast<std::uint64_t>(out_block);
}

int effective_channel_block(const SearchSpace& space, int requested_block) {
  if (requested_block < 1) throw ConfigError("channel block must be >= 1");
  int g = std::gcd(requested_block, space.def().stem_channels);
  for (const StageDef& st : space.def().stages) {
    for (int w : st.width_choices) g = std::gcd(g, w);
  }
  return g;
}

std::vector<WeightUnit> weight_units(const Architecture& a, int channel_block) {
  std::vector<WeightUnit> units;
  for (std::size_t s = 0; s < a.num_stages(); ++s) {
    const auto& kernels = a.space().stage(s).kernel_choices;
    for (std::size_t j = 0; j < static_cast<std::size_t>(a.depth(s)); ++j) {
      const LayerChoice& c = a.layer(s, j);
      const int rings = static_cast<int>(
          std::upper_bound(kernels.begin(), kernels.end(), c.kernel) - kernels.begin());
      const int in_blocks = (a.input_channels(s, j) + channel_block - 1) / channel_block;
      const int out_blocks = (c.width + channel_block - 1) / channel_block;
      for (int r = 0; r < rings; ++r) {
        for (int ib = 0; ib < in_blocks; ++ib) {
          for (int ob = 0; ob < out_blocks; ++ob) {
            units.push_back({static_cast<int>(s), static_cast<int>(j), r, ib, ob});
          }
        }
      }
    }
  }
  return units;
}

std::uint64_t unit_weight_count(const SearchSpace& space, const WeightUnit& u,
                                int channel_block) {
  const auto& kernels = space.stage(static_cast<std::size_t>(u.stage)).kernel_choices;
  const auto outer = static_cast<std::uint64_t>(kernels.at(static_cast<std::size_t>(u.ring)));
  const std::uint64_t inner =
      u.ring == 0 ? 0 : static_cast<std::uint64_t>(kernels.at(static_cast<std::size_t>(u.ring - 1)));
  const auto block = static_cast<std::uint64_t>(channel_block);
  return (outer * outer - inner * inner) * block * block;
}

}  // namespace regnas
