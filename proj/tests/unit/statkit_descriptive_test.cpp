#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gradekit/error.hpp"
#include "gradekit/statkit/descriptive.hpp"

namespace sk = gradekit::statkit;

TEST_CASE("mean, sd, median") {
  const std::vector<double> x = {2, 4, 4, 4, 5, 5, 7, 9};
  CHECK(sk::mean(x) == 5.0);
  CHECK(sk::sample_sd(x) == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(sk::median(x) == 4.5);
  CHECK(sk::median(std::vector<double>{3, 1, 2}) == 2.0);
  CHECK(sk::sample_sd(std::vector<double>{3.0}) == 0.0);
  CHECK(sk::mean_absolute_deviation(x) == 1.5);
}

TEST_CASE("rms difference per group") {
  const std::vector<double> a = {1, 2, 3, 4, 5, 6};
  const std::vector<double> b = {1, 4, 3, 4, 8, 2};
  const std::vector<std::string> g = {"q2", "q2", "q1", "q1", "q1", "q2"};
  const auto r = sk::rms_difference(a, b, g);
  REQUIRE(r.per_group.size() == 2);
  CHECK(r.per_group[0].first == "q2");
  CHECK(r.per_group[0].second == doctest::Approx(std::sqrt(20.0 / 3.0)));
  CHECK(r.per_group[1].first == "q1");
  CHECK(r.per_group[1].second == doctest::Approx(std::sqrt(3.0)));
  CHECK(r.mean == doctest::Approx((std::sqrt(20.0 / 3.0) + std::sqrt(3.0)) / 2.0));

  const auto same = sk::rms_difference(a, a, g);
  CHECK(same.mean == 0.0);
  const std::vector<double> shorter = {1, 2};
  CHECK_THROWS_AS(sk::rms_difference(a, shorter, g), gradekit::DomainError);
}

TEST_CASE("hand-computed arithmetic examples") {
  const std::vector<std::string> one = {"q", "q"};
  CHECK(sk::rms_difference(std::vector<double>{1, 2}, std::vector<double>{2, 4}, one).mean ==
        doctest::Approx(std::sqrt(2.5)));
  CHECK(sk::mean_absolute_deviation(std::vector<double>{5, 5, 5}) == 0.0);
  CHECK(sk::mean_absolute_deviation(std::vector<double>{0, 10}) == 5.0);
  CHECK(sk::mean_absolute_deviation(std::vector<double>{1, 2, 3, 4}) == 1.0);
  CHECK_THROWS_AS(sk::mean_absolute_deviation(std::vector<double>{}), gradekit::DomainError);
}
