// SPDX-License-Identifier: Apache-2.0
//
// JSON forms of the search space and of architectures.
//
// Search space document:
//   {
//     "input_resolution": 224, "stem_channels": 16, "num_classes": 1000,
//     "stages": [
//       {"depth_choices": [2,3,4], "kernel_choices": [3,5,7],
//        "width_choices": [24,32], "stride": 2, "max_depth": 4},
//       ...
//     ]
//   }
// "max_depth" is optional and defaults to max(depth_choices); "stride"
// defaults to 1, "num_classes" to 1000. Unknown keys are ignored so a space
// file may carry extra blocks (e.g. "synthetic").
//
// Architectures are JSON arrays holding the canonical integer encoding.
#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "regnas/archspace.hpp"

namespace regnas {

SearchSpaceDef space_def_from_json(const nlohmann::json& j);
nlohmann::json space_def_to_json(const SearchSpaceDef& def);

/// Reads and validates a space file. Parse failures and invariant violations
/// both raise ConfigError.
SpacePtr load_space(const std::filesystem::path& path);
nlohmann::json load_json_file(const std::filesystem::path& path);

nlohmann::json architecture_to_json(const Architecture& a);
/// Accepts a bare encoding array, an object with an "encoding" array, or a
/// search summary (its "best" entry).
Architecture architecture_from_json(const SpacePtr& space, const nlohmann::json& j);
Architecture load_architecture(const SpacePtr& space, const std::filesystem::path& path);

/// Canonical encoding joined by sep, e.g. "2,3,16,5,24,0,0". Prediction
/// tables label architectures with sep = '-'.
std::string encoding_string(const Architecture& a, char sep = ',');
/// Parses values separated by ',' or '-'.
Architecture architecture_from_encoding_string(const SpacePtr& space, const std::string& s);

}  // namespace regnas
