// SPDX-License-Identifier: Apache-2.0
#include "regnas/costmodel.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "regnas/errors.hpp"
#include "regnas/serialization.hpp"

namespace regnas {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

void check_threshold(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0) {
    throw ConfigError("constraint threshold must be finite and > 0");
  }
}

}  // namespace

int layer_input_size(const SearchSpace& space, std::size_t s, std::size_t j) {
  int hw = space.def().input_resolution;
  for (std::size_t t = 0; t < s; ++t) hw = ceil_div(hw, space.stage(t).stride);
  if (j > 0) hw = ceil_div(hw, space.stage(s).stride);
  return hw;
}

int layer_output_size(const SearchSpace& space, std::size_t s, std::size_t /*j*/) {
  int hw = space.def().input_resolution;
  for (std::size_t t = 0; t <= s; ++t) hw = ceil_div(hw, space.stage(t).stride);
  return hw;
}

std::uint64_t macs(const Architecture& a) {
  const SearchSpace& space = a.space();
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < a.num_stages(); ++s) {
    const auto hw = static_cast<std::uint64_t>(layer_output_size(space, s, 0));
    for (std::size_t j = 0; j < static_cast<std::size_t>(a.depth(s)); ++j) {
      const auto k = static_cast<std::uint64_t>(a.layer(s, j).kernel);
      total += k * k * static_cast<std::uint64_t>(a.input_channels(s, j)) *
               static_cast<std::uint64_t>(a.layer(s, j).width) * hw * hw;
    }
  }
  return total;
}

double flops(const Architecture& a) { return static_cast<double>(macs(a)) / 1e6; }

std::string LatencySignature::to_string() const {
  return "{stage=" + std::to_string(stage) + ", slot=" + std::to_string(slot) +
         ", kernel=" + std::to_string(kernel) + ", width=" + std::to_string(width) +
         ", c_in=" + std::to_string(c_in) + ", hw=" + std::to_string(hw) + "}";
}

std::vector<LatencySignature> required_signatures(const SearchSpace& space) {
  std::vector<LatencySignature> out;
  for (std::size_t s = 0; s < space.num_stages(); ++s) {
    const StageDef& st = space.stage(s);
    for (std::size_t j = 0; j < static_cast<std::size_t>(st.max_depth); ++j) {
      std::vector<int> inputs;
      if (j > 0) {
        inputs = st.width_choices;
      } else if (s > 0) {
        inputs = space.stage(s - 1).width_choices;
      } else {
        inputs = {space.def().stem_channels};
      }
      const int hw = layer_input_size(space, s, j);
      for (int k : st.kernel_choices) {
        for (int w : st.width_choices) {
          for (int c : inputs) {
            out.push_back({static_cast<int>(s), static_cast<int>(j), k, w, c, hw});
          }
        }
      }
    }
  }
  return out;
}

LatencyLUT::LatencyLUT(double overhead_ms, std::map<LatencySignature, double> entries)
    : overhead_ms_(overhead_ms), entries_(std::move(entries)) {
  if (!std::isfinite(overhead_ms_) || overhead_ms_ < 0.0) {
    throw ConfigError("latency table overhead must be finite and >= 0");
  }
  for (const auto& [sig, ms] : entries_) {
    if (!std::isfinite(ms) || ms < 0.0) {
      throw ConfigError("latency table entry " + sig.to_string() + " must be finite and >= 0");
    }
  }
}

LatencyLUT LatencyLUT::from_json(const nlohmann::json& j) {
  try {
    const double overhead = j.value("overhead_ms", 0.0);
    std::map<LatencySignature, double> entries;
    for (const auto& e : j.at("entries")) {
      LatencySignature sig{e.at("stage").get<int>(), e.at("slot").get<int>(),
                           e.at("kernel").get<int>(), e.at("width").get<int>(),
                           e.at("c_in").get<int>(),   e.at("hw").get<int>()};
      if (!entries.emplace(sig, e.at("ms").get<double>()).second) {
        throw ConfigError("duplicate latency table entry " + sig.to_string());
      }
    }
    return LatencyLUT(overhead, std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed latency table: ") + e.what());
  }
}

LatencyLUT LatencyLUT::load(const std::filesystem::path& path) {
  return from_json(load_json_file(path));
}

nlohmann::json LatencyLUT::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [sig, ms] : entries_) {
    entries.push_back({{"stage", sig.stage},
                       {"slot", sig.slot},
                       {"kernel", sig.kernel},
                       {"width", sig.width},
                       {"c_in", sig.c_in},
                       {"hw", sig.hw},
                       {"ms", ms}});
  }
  return {{"overhead_ms", overhead_ms_}, {"entries", entries}};
}

LatencyLUT LatencyLUT::synthesize(const SearchSpace& space, double ms_per_mmac,
                                  double per_layer_ms, double overhead_ms) {
  std::map<LatencySignature, double> entries;
  for (const LatencySignature& sig : required_signatures(space)) {
    const int out_hw = layer_output_size(space, static_cast<std::size_t>(sig.stage), 0);
    const double mmac = static_cast<double>(sig.kernel) * sig.kernel * sig.c_in * sig.width *
                        out_hw * out_hw / 1e6;
    entries.emplace(sig, per_layer_ms + ms_per_mmac * mmac);
  }
  return LatencyLUT(overhead_ms, std::move(entries));
}

double LatencyLUT::lookup(const LatencySignature& sig) const {
  auto it = entries_.find(sig);
  if (it == entries_.end()) {
    throw ConfigError("latency table has no entry for " + sig.to_string());
  }
  return it->second;
}

std::vector<std::string> LatencyLUT::validate(const SearchSpace& space) const {
  const auto required = required_signatures(space);
  std::string missing;
  std::size_t n_missing = 0;
  for (const auto& sig : required) {
    if (!entries_.count(sig)) {
      if (n_missing < 8) missing += "\n  - " + sig.to_string();
      ++n_missing;
    }
  }
  if (n_missing > 0) {
    throw ConfigError("latency table lacks " + std::to_string(n_missing) +
                      " signature(s) required by the space:" + missing);
  }

  std::vector<std::string> warnings;
  auto check = [&](const LatencySignature& lo, LatencySignature hi, const char* axis) {
    auto it = entries_.find(hi);
    if (it != entries_.end() && it->second < entries_.at(lo)) {
      warnings.push_back("latency decreases with " + std::string(axis) + ": " + lo.to_string() +
                         " -> " + hi.to_string());
    }
  };
  for (const auto& sig : required) {
    const StageDef& st = space.stage(static_cast<std::size_t>(sig.stage));
    auto next = [](const std::vector<int>& v, int x) {
      auto it = std::upper_bound(v.begin(), v.end(), x);
      return it == v.end() ? -1 : *it;
    };
    if (int k = next(st.kernel_choices, sig.kernel); k > 0) {
      LatencySignature hi = sig;
      hi.kernel = k;
      check(sig, hi, "kernel");
    }
    if (int w = next(st.width_choices, sig.width); w > 0) {
      LatencySignature hi = sig;
      hi.width = w;
      check(sig, hi, "width");
    }
    std::set<int> cins;
    for (const auto& other : required) {
      if (other.stage == sig.stage && other.slot == sig.slot) cins.insert(other.c_in);
    }
    auto it = cins.upper_bound(sig.c_in);
    if (it != cins.end()) {
      LatencySignature hi = sig;
      hi.c_in = *it;
      check(sig, hi, "c_in");
    }
  }
  return warnings;
}

double latency(const Architecture& a, const LatencyLUT& lut) {
  const SearchSpace& space = a.space();
  double total = lut.overhead_ms();
  for (std::size_t s = 0; s < a.num_stages(); ++s) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(a.depth(s)); ++j) {
      total += lut.lookup({static_cast<int>(s), static_cast<int>(j), a.layer(s, j).kernel,
                           a.layer(s, j).width, a.input_channels(s, j),
                           layer_input_size(space, s, j)});
    }
  }
  return total;
}

CostConstraint CostConstraint::flops_budget(double mflops) {
  check_threshold(mflops);
  return {CostKind::kFlops, mflops, nullptr};
}

CostConstraint CostConstraint::latency_budget(double ms, std::shared_ptr<const LatencyLUT> lut) {
  check_threshold(ms);
  if (!lut) throw ConfigError("latency constraint requires a latency table");
  return {CostKind::kLatency, ms, std::move(lut)};
}

CostConstraint CostConstraint::parse(const std::string& text,
                                     const std::filesystem::path& base_dir) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("constraint must look like flops:300 or latency:30@lut.json, got '" +
                      text + "'");
  }
  const std::string kind = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  std::string lut_path;
  if (const auto at = rest.find('@'); at != std::string::npos) {
    lut_path = rest.substr(at + 1);
    rest = rest.substr(0, at);
  }
  double tau = 0.0;
  try {
    std::size_t used = 0;
    tau = std::stod(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(rest);
  } catch (const std::exception&) {
    throw ConfigError("bad constraint threshold '" + rest + "'");
  }
  if (kind == "flops") {
    if (!lut_path.empty()) throw ConfigError("flops constraint takes no latency table");
    return flops_budget(tau);
  }
  if (kind == "latency") {
    if (lut_path.empty()) throw ConfigError("latency constraint needs @table.json");
    std::filesystem::path p(lut_path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return latency_budget(tau, std::make_shared<const LatencyLUT>(LatencyLUT::load(p)));
  }
  throw ConfigError("unknown constraint kind '" + kind + "'");
}

CostConstraint CostConstraint::with_threshold(double tau) const {
  check_threshold(tau);
  CostConstraint c = *this;
  c.threshold = tau;
  return c;
}

double CostConstraint::cost(const Architecture& a) const {
  if (kind == CostKind::kFlops) return flops(a);
  if (!lut) throw ConfigError("latency constraint requires a latency table");
  return latency(a, *lut);
}

std::string CostConstraint::describe() const {
  std::string t = std::to_string(threshold);
  return (kind == CostKind::kFlops ? "flops<" : "latency<") + t;
}

}  // namespace regnas
