#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gradekit/statkit/matrix.hpp"

namespace gradekit::statkit {

struct TestResult {
  double statistic = 0.0;
  std::vector<double> df;  // empty, one or two entries depending on the test
  double p_value = 1.0;
  std::string method;
  std::map<std::string, double> details;
};

/// Shapiro-Wilk W with Royston's AS R94 p-value. Requires 3 <= n <= 5000
/// and a sample that is not constant.
TestResult shapiro_wilk(std::span<const double> sample);

enum class LeveneCenter { Median, Mean };

/// One-way ANOVA on absolute deviations from each group's center. Median
/// center is the Brown-Forsythe variant. Zero deviations everywhere yield
/// F = 0, p = 1 instead of an error.
TestResult levene(std::span<const std::vector<double>> groups, LeveneCenter center = LeveneCenter::Median);

enum class FriedmanMethod { Auto, Exact, ChiSquare };

/// Friedman rank test over rows (blocks) of an n x k matrix.
///
/// The statistic is the tie-corrected chi-square form. The p-value is the
/// exact permutation tail (each row's ranks permuted uniformly and
/// independently) when the design is small enough to enumerate, otherwise
/// the chi-square(k-1) tail. `Auto` uses the exact tail when k <= 4 and n <= 8.
/// details: "tie_correction", "rank_sum_<j>".
TestResult friedman(const MatrixView& m, FriedmanMethod method = FriedmanMethod::Auto);

struct PosthocMatrix {
  std::vector<std::string> labels;
  std::size_t k = 0;
  std::vector<double> p;          // k*k Bonferroni-adjusted two-sided p-values
  std::vector<double> statistic;  // k*k |t| values (0 on the diagonal)
  double df = 0.0;
  std::size_t comparisons = 0;

  double at(std::size_t i, std::size_t j) const { return p[i * k + j]; }
};

/// Conover's all-pairs comparison after Friedman: differences of column rank
/// sums against the t distribution with (n-1)(k-1) df, Bonferroni-adjusted
/// over k(k-1)/2 pairs. `labels` defaults to column indices.
PosthocMatrix conover_posthoc(const MatrixView& m, std::vector<std::string> labels = {});

/// min(1, p*m) elementwise.
std::vector<double> bonferroni(std::span<const double> p, std::size_t m);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> values);

}  // namespace gradekit::statkit
