#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gradekit/error.hpp"
#include "gradekit/statkit/hypothesis.hpp"
#include "gradekit/statkit/random.hpp"
#include "oracles/shapiro_wilk_reference.hpp"

namespace sk = gradekit::statkit;

TEST_CASE("shapiro-wilk reference vectors") {
  for (const auto& c : oracles::shapiro_wilk_cases()) {
    CAPTURE(c.name);
    const auto res = sk::shapiro_wilk(c.sample);
    CHECK(std::fabs(res.statistic - c.w) <= 1e-3);
    CHECK(std::fabs(res.p_value - c.p) <= 1e-3);
  }
}

TEST_CASE("shapiro-wilk is order independent") {
  std::vector<double> a = {5.0, 1.0, 4.0, 2.0, 9.0, 3.0};
  std::vector<double> b = {1.0, 2.0, 3.0, 4.0, 5.0, 9.0};
  CHECK(sk::shapiro_wilk(a).statistic == sk::shapiro_wilk(b).statistic);
}

TEST_CASE("shapiro-wilk preconditions") {
  const std::vector<double> constant = {4.0, 4.0, 4.0, 4.0};
  CHECK_THROWS_AS(sk::shapiro_wilk(constant), gradekit::DomainError);
  const std::vector<double> short_sample = {1.0, 2.0};
  CHECK_THROWS_AS(sk::shapiro_wilk(short_sample), gradekit::DomainError);
}

TEST_CASE("levene median and mean centers") {
  const std::vector<std::vector<double>> g = {
      {8.2, 9.1, 7.7, 10.4, 9.9, 8.8}, {12.0, 6.1, 14.3, 5.2, 11.8, 9.0}, {9.5, 9.7, 9.4, 9.9, 9.6, 9.8}};
  const auto med = sk::levene(g);
  CHECK(med.statistic == doctest::Approx(12.32389214046822).epsilon(1e-12));
  CHECK(med.p_value == doctest::Approx(0.0006824055177277518).epsilon(1e-10));
  REQUIRE(med.df.size() == 2);
  CHECK(med.df[0] == 2.0);
  CHECK(med.df[1] == 15.0);
  const auto mean = sk::levene(g, sk::LeveneCenter::Mean);
  CHECK(mean.statistic == doctest::Approx(14.82834507042253).epsilon(1e-12));
  CHECK(mean.p_value == doctest::Approx(0.0002795989015303414).epsilon(1e-10));

  const std::vector<std::vector<double>> h = {{1, 2, 3, 4, 5}, {2, 4, 6, 8, 10, 12, 14}, {5, 5, 6, 6}};
  CHECK(sk::levene(h).statistic == doctest::Approx(5.29481546572935).epsilon(1e-12));
  CHECK(sk::levene(h).p_value == doctest::Approx(0.02079430163618362).epsilon(1e-10));
}

TEST_CASE("levene degenerate inputs") {
  const std::vector<std::vector<double>> flat = {{3, 3, 3}, {7, 7, 7}};
  const auto res = sk::levene(flat);
  CHECK(res.statistic == 0.0);
  CHECK(res.p_value == 1.0);
  const std::vector<std::vector<double>> one = {{1, 2, 3}};
  CHECK_THROWS_AS(sk::levene(one), gradekit::DomainError);
}

TEST_CASE("shapiro-wilk p is calibrated on large normal samples") {
  sk::Xoshiro256 rng(20240503);
  std::vector<double> ps;
  std::vector<double> x(5000);
  for (int rep = 0; rep < 200; ++rep) {
    for (double& v : x) v = rng.normal();
    ps.push_back(sk::shapiro_wilk(x).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double lo = static_cast<double>(i) / 200.0;
    const double hi = static_cast<double>(i + 1) / 200.0;
    ks = std::max({ks, std::fabs(ps[i] - lo), std::fabs(hi - ps[i])});
  }
  MESSAGE("Kolmogorov distance " << ks);
  CHECK(ks < 0.12);
}

TEST_CASE("levene hand-computed examples") {
  const std::vector<std::vector<double>> twin = {{1, 2, 3, 4}, {1, 2, 3, 4}};
  CHECK(sk::levene(twin).statistic == 0.0);
  CHECK(sk::levene(twin).p_value == 1.0);
  const std::vector<std::vector<double>> constant = {{5, 5, 5}, {5, 5, 5}};
  CHECK(sk::levene(constant).p_value == 1.0);
  const std::vector<std::vector<double>> tiny = {{1}, {2, 3}};
  CHECK_THROWS_AS(sk::levene(tiny), gradekit::DomainError);
}
