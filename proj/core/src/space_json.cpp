// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <sstream>

#include "regnas/errors.hpp"
#include "regnas/serialization.hpp"

namespace regnas {

namespace {

using nlohmann::json;

std::vector<int> int_list(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  std::vector<int> out;
  for (const json& x : v) {
    if (!x.is_number_integer()) {
      throw ConfigError(std::string("'") + key + "' must contain integers");
    }
    out.push_back(x.get<int>());
  }
  return out;
}

int int_field(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) {
    throw ConfigError(std::string("'") + key + "' must be an integer");
  }
  return j.at(key).get<int>();
}

}  // namespace

SearchSpaceDef space_def_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("search space must be a JSON object");
  SearchSpaceDef def;
  def.input_resolution = int_field(j, "input_resolution", def.input_resolution);
  def.stem_channels = int_field(j, "stem_channels", def.stem_channels);
  def.num_classes = int_field(j, "num_classes", def.num_classes);
  if (!j.contains("stages") || !j.at("stages").is_array()) {
    throw ConfigError("search space needs a 'stages' array");
  }
  for (const json& js : j.at("stages")) {
    if (!js.is_object()) throw ConfigError("each stage must be a JSON object");
    StageDef st;
    st.depth_choices = int_list(js, "depth_choices");
    st.kernel_choices = int_list(js, "kernel_choices");
    st.width_choices = int_list(js, "width_choices");
    st.stride = int_field(js, "stride", 1);
    const int implied =
        st.depth_choices.empty()
            ? 0
            : *std::max_element(st.depth_choices.begin(), st.depth_choices.end());
    st.max_depth = int_field(js, "max_depth", implied);
    def.stages.push_back(std::move(st));
  }
  return def;
}

json space_def_to_json(const SearchSpaceDef& def) {
  json stages = json::array();
  for (const StageDef& st : def.stages) {
    stages.push_back({{"max_depth", st.max_depth},
                      {"depth_choices", st.depth_choices},
                      {"kernel_choices", st.kernel_choices},
                      {"width_choices", st.width_choices},
                      {"stride", st.stride}});
  }
  return {{"input_resolution", def.input_resolution},
          {"stem_channels", def.stem_channels},
          {"num_classes", def.num_classes},
          {"stages", stages}};
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SpacePtr load_space(const std::filesystem::path& path) {
  return SearchSpace::create(space_def_from_json(load_json_file(path)));
}

json architecture_to_json(const Architecture& a) { return a.encode(); }

Architecture architecture_from_json(const SpacePtr& space, const json& j) {
  const json* code = &j;
  if (j.is_object() && !j.contains("encoding") && j.contains("best")) {
    return architecture_from_json(space, j.at("best"));
  }
  if (j.is_object()) {
    if (!j.contains("encoding")) throw ConfigError("architecture object needs 'encoding'");
    code = &j.at("encoding");
  }
  if (!code->is_array()) throw ConfigError("architecture must be an integer array");
  std::vector<int> values;
  for (const json& x : *code) {
    if (!x.is_number_integer()) throw ConfigError("architecture must be an integer array");
    values.push_back(x.get<int>());
  }
  return Architecture::decode(space, values);
}

Architecture load_architecture(const SpacePtr& space, const std::filesystem::path& path) {
  return architecture_from_json(space, load_json_file(path));
}

std::string encoding_string(const Architecture& a, char sep) {
  std::string out;
  for (int v : a.encode()) {
    if (!out.empty()) out += sep;
    out += std::to_string(v);
  }
  return out;
}

Architecture architecture_from_encoding_string(const SpacePtr& space, const std::string& s) {
  std::vector<int> values;
  std::string normalized = s;
  std::replace(normalized.begin(), normalized.end(), '-', ',');
  std::stringstream ss(normalized);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad architecture encoding '" + s + "'");
    }
  }
  return Architecture::decode(space, values);
}

}  // namespace regnas
