#include <benchmark/benchmark.h>

#include <vector>

#include "gradekit/statkit/bootstrap.hpp"
#include "gradekit/statkit/distributions.hpp"
#include "gradekit/statkit/hypothesis.hpp"
#include "gradekit/statkit/icc.hpp"
#include "gradekit/statkit/random.hpp"
#include "gradekit/statkit/special.hpp"

namespace sk = gradekit::statkit;

namespace {

sk::Matrix random_matrix(std::size_t n, std::size_t k, std::uint64_t seed) {
  sk::Xoshiro256 rng(seed);
  sk::Matrix m(n, k);
  for (std::size_t r = 0; r < n; ++r) {
    const double item = 70.0 + 10.0 * rng.normal();
    for (std::size_t c = 0; c < k; ++c) m.at(r, c) = item + 3.0 * static_cast<double>(c) + 4.0 * rng.normal();
  }
  return m;
}

void BM_RegIncBeta(benchmark::State& state) {
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-6;
    if (x >= 1.0) x = 1e-6;
    benchmark::DoNotOptimize(sk::reg_inc_beta(12.5, 3.25, x));
  }
}
BENCHMARK(BM_RegIncBeta);

void BM_TSf(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sk::t_sf(2.1, 476.0));
}
BENCHMARK(BM_TSf);

void BM_FriedmanExact(benchmark::State& state) {
  const auto m = random_matrix(static_cast<std::size_t>(state.range(0)), 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sk::friedman(m.view(), sk::FriedmanMethod::Exact));
}
BENCHMARK(BM_FriedmanExact)->Arg(4)->Arg(6)->Arg(8);

void BM_FriedmanConover120x5(benchmark::State& state) {
  const auto m = random_matrix(120, 5, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sk::friedman(m.view()));
    benchmark::DoNotOptimize(sk::conover_posthoc(m.view()));
  }
}
BENCHMARK(BM_FriedmanConover120x5);

void BM_ShapiroWilk(benchmark::State& state) {
  sk::Xoshiro256 rng(3);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (double& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(sk::shapiro_wilk(x));
}
BENCHMARK(BM_ShapiroWilk)->Arg(10)->Arg(120)->Arg(600);

void BM_BootstrapMean(benchmark::State& state) {
  const std::vector<double> x = {6.0, 7.5, 9.0, 4.0, 8.0, 10.0, 5.5, 7.0, 9.5, 3.0};
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sk::bootstrap_mean_sd(x, 10000, 42, threads));
}
BENCHMARK(BM_BootstrapMean)->Arg(1)->Arg(4);

void BM_Icc(benchmark::State& state) {
  const auto m = random_matrix(120, 5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(sk::icc(m.view(), sk::IccVariant::Icc2_1));
}
BENCHMARK(BM_Icc);

}  // namespace
