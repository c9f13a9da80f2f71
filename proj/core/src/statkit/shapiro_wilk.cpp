// Royston's AS R94 algorithm for the Shapiro-Wilk W test (n in [3, 5000]).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gradekit/error.hpp"
#include "gradekit/statkit/distributions.hpp"
#include "gradekit/statkit/hypothesis.hpp"

namespace gradekit::statkit {
namespace {

template <std::size_t N>
double poly(const std::array<double, N>& cc, double x) {
  double result = cc[0];
  if constexpr (N > 1) {
    double p = x * cc[N - 1];
    for (std::size_t j = N - 2; j > 0; --j) p = (p + cc[j]) * x;
    result += p;
  }
  return result;
}

constexpr std::array<double, 2> kG = {-2.273, 0.459};
constexpr std::array<double, 6> kC1 = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr std::array<double, 6> kC2 = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr std::array<double, 4> kC3 = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr std::array<double, 4> kC4 = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr std::array<double, 4> kC5 = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr std::array<double, 3> kC6 = {-0.4803, -0.082676, 0.0030302};

constexpr double kSmall = 1e-19;

// Coefficients a[1..n/2] for the upper half of the order statistics.
std::vector<double> coefficients(std::size_t n) {
  const std::size_t half = n / 2;
  std::vector<double> a(half + 1, 0.0);
  const auto an = static_cast<double>(n);
  if (n == 3) {
    a[1] = std::numbers::sqrt2 / 2.0;
    return a;
  }
  const double an25 = an + 0.25;
  double summ2 = 0.0;
  for (std::size_t i = 1; i <= half; ++i) {
    a[i] = normal_quantile((static_cast<double>(i) - 0.375) / an25);
    summ2 += a[i] * a[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(kC1, rsn) - a[1] / ssumm2;

  std::size_t first;
  double fac;
  if (n > 5) {
    first = 3;
    const double a2 = -a[2] / ssumm2 + poly(kC2, rsn);
    fac = std::sqrt((summ2 - 2.0 * (a[1] * a[1]) - 2.0 * (a[2] * a[2])) / (1.0 - 2.0 * (a1 * a1) - 2.0 * (a2 * a2)));
    a[2] = a2;
  } else {
    first = 2;
    fac = std::sqrt((summ2 - 2.0 * (a[1] * a[1])) / (1.0 - 2.0 * (a1 * a1)));
  }
  a[1] = a1;
  for (std::size_t i = first; i <= half; ++i) a[i] /= -fac;
  return a;
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < 3 || n > 5000) {
    throw DomainError("shapiro_wilk: sample size " + std::to_string(n) + " outside [3, 5000]");
  }
  std::vector<double> x(sample.begin(), sample.end());
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("shapiro_wilk: sample holds a non-finite value");
  }
  std::sort(x.begin(), x.end());
  const double range = x.back() - x.front();
  if (range < kSmall) throw DomainError("shapiro_wilk: zero variance sample");

  const std::vector<double> a = coefficients(n);
  const auto an = static_cast<double>(n);

  // Antisymmetric weight for sorted position i (0-based): -a for the lower
  // half, +a for the upper half, 0 at the median of odd samples.
  auto weight = [&](std::size_t i) {
    const std::size_t j = n - 1 - i;
    if (i == j) return 0.0;
    return i < j ? -a[i + 1] : a[j + 1];
  };

  double sa = 0.0;
  double sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += weight(i);
    sx += x[i] / range;
  }
  sa /= an;
  sx /= an;
  double ssa = 0.0;
  double ssx = 0.0;
  double sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double asa = weight(i) - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  // 1 - W, formed directly to avoid cancellation when W is close to 1.
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  const double w = 1.0 - w1;

  TestResult result;
  result.statistic = w;
  result.method = "shapiro-wilk (AS R94)";
  result.details["n"] = an;

  if (n == 3) {
    constexpr double pi6 = 6.0 / std::numbers::pi;
    constexpr double stqr = std::numbers::pi / 3.0;
    result.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return result;
  }

  double y = std::log(w1);
  const double lxx = std::log(an);
  double m;
  double s;
  if (n <= 11) {
    const double gamma = poly(kG, an);
    if (y >= gamma) {
      result.p_value = 1e-99;
      return result;
    }
    y = -std::log(gamma - y);
    m = poly(kC3, an);
    s = std::exp(poly(kC4, an));
  } else {
    m = poly(kC5, lxx);
    s = std::exp(poly(kC6, lxx));
  }
  result.p_value = std::clamp(normal_cdf(-(y - m) / s), 0.0, 1.0);
  return result;
}

}  // namespace gradekit::statkit
