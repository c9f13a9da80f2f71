#include "gradekit/statkit/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

#include "gradekit/error.hpp"
#include "gradekit/statkit/descriptive.hpp"
#include "gradekit/statkit/random.hpp"

namespace gradekit::statkit {
namespace {

// Runs body(rng, first, last) once per block, spreading blocks over up to
// `threads` workers. Each block's generator depends only on (seed, block).
template <typename Body>
void for_each_block(std::size_t iterations, std::uint64_t seed, unsigned threads, Body body) {
  const std::size_t blocks = (iterations + kBootstrapBlock - 1) / kBootstrapBlock;
  std::vector<Xoshiro256> streams;
  streams.reserve(blocks);
  Xoshiro256 base(seed);
  for (std::size_t b = 0; b < blocks; ++b) {
    streams.push_back(base);
    base.jump();
  }
  auto run_block = [&](std::size_t b) {
    const std::size_t first = b * kBootstrapBlock;
    const std::size_t last = std::min(iterations, first + kBootstrapBlock);
    body(streams[b], first, last);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(blocks)));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) run_block(b);
    });
  }
}

}  // namespace

BootstrapEstimate bootstrap_mean_sd(std::span<const double> x, std::size_t iterations, std::uint64_t seed,
                                    unsigned threads) {
  if (x.empty()) throw DomainError("bootstrap_mean_sd: empty sample");
  if (iterations < 1) throw DomainError("bootstrap_mean_sd: iterations must be >= 1");

  const std::size_t n = x.size();
  std::vector<double> means(iterations);
  for_each_block(iterations, seed, threads, [&](Xoshiro256& rng, std::size_t first, std::size_t last) {
    for (std::size_t it = first; it < last; ++it) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += x[rng.uniform_index(n)];
      means[it] = s / static_cast<double>(n);
    }
  });

  const double centre = mean(means);
  double ss = 0.0;
  for (double m : means) ss += (m - centre) * (m - centre);

  BootstrapEstimate est;
  est.mean = mean(x);
  est.sd = std::sqrt(ss / static_cast<double>(iterations));
  est.iterations = iterations;
  est.seed = seed;
  return est;
}

TestResult bootstrap_diff_pvalue(std::span<const double> x, std::span<const double> y, std::size_t iterations,
                                 std::uint64_t seed, unsigned threads) {
  if (x.empty() || y.empty()) throw DomainError("bootstrap_diff_pvalue: empty sample");
  if (x.size() != y.size()) throw DomainError("bootstrap_diff_pvalue: paired samples differ in length");
  if (x.size() < 2) throw DomainError("bootstrap_diff_pvalue: need at least 2 pairs");
  if (iterations < 1) throw DomainError("bootstrap_diff_pvalue: iterations must be >= 1");

  const std::size_t n = x.size();
  std::vector<unsigned char> at_or_below(iterations);
  std::vector<unsigned char> at_or_above(iterations);
  for_each_block(iterations, seed, threads, [&](Xoshiro256& rng, std::size_t first, std::size_t last) {
    for (std::size_t it = first; it < last; ++it) {
      double sx = 0.0;
      double sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pick = rng.uniform_index(n);
        sx += x[pick];
        sy += y[pick];
      }
      const double d = sx / static_cast<double>(n) - sy / static_cast<double>(n);
      at_or_below[it] = d <= 0.0;
      at_or_above[it] = d >= 0.0;
    }
  });

  std::size_t below = 0;
  std::size_t above = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    below += at_or_below[it];
    above += at_or_above[it];
  }
  const double iters = static_cast<double>(iterations);
  TestResult result;
  result.statistic = mean(x) - mean(y);
  result.p_value = std::min(1.0, 2.0 * std::min(static_cast<double>(below) / iters, static_cast<double>(above) / iters));
  result.method = "paired bootstrap (mean difference)";
  result.details["iterations"] = iters;
  result.details["fraction_at_or_below_zero"] = static_cast<double>(below) / iters;
  result.details["fraction_at_or_above_zero"] = static_cast<double>(above) / iters;
  return result;
}

}  // namespace gradekit::statkit
