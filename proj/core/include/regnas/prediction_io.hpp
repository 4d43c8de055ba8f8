// SPDX-License-Identifier: Apache-2.0
//
// Correctness files exchanged with external trainers.
//
// Binary layout, all integers little-endian:
//   bytes 0..7   magic "RGNSPRED"
//   u32          format version (1)
//   u32          model count M
//   u64          sample count N
//   M times:     u32 name length, name bytes (UTF-8),
//                ceil(N / 8) bytes of packed correctness, LSB first
//
// CSV alternative, first column "sample_id" (ids 0..N-1, each exactly once):
//   sample_id,correct            one model, named after the file stem
//   sample_id,<name1>,<name2>... one model per column
//   sample_id,label,pred         label-level export, reduced to label == pred
// Correctness cells are 0 or 1.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "regnas/metrics.hpp"

namespace regnas {

struct NamedCorrectness {
  std::string name;
  CorrectnessVector bits;
};

/// Detects the format from the magic bytes. Throws ConfigError on malformed
/// files and EvaluatorError when models within a file differ in length.
std::vector<NamedCorrectness> read_predictions(const std::filesystem::path& path);

void write_predictions_binary(const std::filesystem::path& path,
                              const std::vector<NamedCorrectness>& models);
void write_predictions_csv(const std::filesystem::path& path,
                           const std::vector<NamedCorrectness>& models);

}  // namespace regnas
