#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "gradekit/statkit/hypothesis.hpp"

namespace gradekit::statkit {

struct BootstrapEstimate {
  double mean = 0.0;  // sample mean of the data
  double sd = 0.0;    // population SD (denominator: iterations) of the resampled means
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
};

/// Iterations are processed in blocks of this many draws-sets; block b uses
/// Xoshiro256(seed) advanced by b jumps. Results are identical for any
/// thread count.
inline constexpr std::size_t kBootstrapBlock = 1024;

BootstrapEstimate bootstrap_mean_sd(std::span<const double> x, std::size_t iterations, std::uint64_t seed,
                                    unsigned threads = 1);

/// Paired bootstrap test of mean(x) - mean(y) == 0. Indices are resampled
/// jointly; p = min(1, 2 * min(P*(d <= 0), P*(d >= 0))). statistic is the
/// observed mean difference.
TestResult bootstrap_diff_pvalue(std::span<const double> x, std::span<const double> y, std::size_t iterations,
                                 std::uint64_t seed, unsigned threads = 1);

}  // namespace gradekit::statkit
