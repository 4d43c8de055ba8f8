// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace regnas::testing {

double mean(const std::vector<double>& v);

struct PairedTest {
  double mean_diff = 0.0;
  double t = 0.0;
  double p = 1.0;  ///< one-sided, H1: mean(x - y) > 0
};

/// One-sided paired t-test of x against y. A zero-variance difference gives
/// p = 0 when the mean is positive and p = 1 otherwise.
PairedTest paired_greater(const std::vector<double>& x, const std::vector<double>& y);

/// Ranks starting at 1, ties averaged.
std::vector<double> ranks(const std::vector<double>& v);

struct Correlation {
  double rho = 0.0;
  double t = 0.0;
  double p_negative = 1.0;  ///< one-sided, H1: rho < 0
  double p_two_sided = 1.0;
};

/// Spearman rank correlation with the Student-t approximation (n - 2 dof).
Correlation spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace regnas::testing
