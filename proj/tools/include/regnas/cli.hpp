// SPDX-License-Identifier: Apache-2.0
//
// In-process entry point of the regnas command-line tool.
//
// Exit codes: 0 success, 1 generic failure (including rerun mismatches),
// 2 configuration or usage error, 3 infeasible constraint, 4 evaluator miss
// or sample-count mismatch.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace regnas {

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace regnas
