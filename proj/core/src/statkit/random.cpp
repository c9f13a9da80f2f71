#include "gradekit/statkit/random.hpp"

#include <cmath>
#include <numbers>

namespace gradekit::statkit {

double Xoshiro256::normal() noexcept {
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return SplitMix64(seed ^ h).next();
}

}  // namespace gradekit::statkit
