// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "regnas/archspace.hpp"
#include "regnas/serialization.hpp"

#ifndef REGNAS_FIXTURE_DIR
#error "REGNAS_FIXTURE_DIR must be defined"
#endif

namespace regnas::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(REGNAS_FIXTURE_DIR) / name;
}

inline SpacePtr fixture_space(const std::string& name) { return load_space(fixture(name)); }

inline SpacePtr space_from_json(const std::string& text) {
  return SearchSpace::create(space_def_from_json(nlohmann::json::parse(text)));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace regnas::testing
