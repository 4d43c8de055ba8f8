// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace regnas {

/// Thread count from REGNAS_THREADS, else the hardware concurrency (min 1).
unsigned default_threads();

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Each index is processed exactly once; if any call throws, the exception
/// from the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace regnas
