// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "regnas/errors.hpp"
#include "regnas/parallel.hpp"

namespace regnas {
namespace {

class EnvGuard {
 public:
  explicit EnvGuard(const char* value) {
    if (const char* old = std::getenv("REGNAS_THREADS")) saved_ = old;
    if (value) {
      ::setenv("REGNAS_THREADS", value, 1);
    } else {
      ::unsetenv("REGNAS_THREADS");
    }
  }
  ~EnvGuard() {
    if (saved_.empty()) {
      ::unsetenv("REGNAS_THREADS");
    } else {
      ::setenv("REGNAS_THREADS", saved_.c_str(), 1);
    }
  }

 private:
  std::string saved_;
};

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (unsigned threads : {1u, 2u, 5u}) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; }, threads);
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
}

TEST(ParallelFor, EmptyRangeIsANoOp) {
  parallel_for(0, [](std::size_t) { FAIL(); }, 4);
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    parallel_for(
        100,
        [](std::size_t i) {
          if (i == 70 || i == 30 || i == 90) throw std::runtime_error(std::to_string(i));
        },
        4);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "30");
  }
}

TEST(DefaultThreads, ReadsEnvironment) {
  {
    const EnvGuard env("3");
    EXPECT_EQ(default_threads(), 3u);
  }
  {
    const EnvGuard env(nullptr);
    EXPECT_GE(default_threads(), 1u);
  }
  for (const char* bad : {"0", "-2", "many", "4x"}) {
    const EnvGuard env(bad);
    EXPECT_THROW(default_threads(), ConfigError) << bad;
  }
}

}  // namespace
}  // namespace regnas
