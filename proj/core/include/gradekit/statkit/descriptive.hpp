#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gradekit::statkit {

double mean(std::span<const double> x);

/// Standard deviation with denominator n - 1; 0 for a single value.
double sample_sd(std::span<const double> x);

/// Median; even counts average the two central order statistics.
double median(std::span<const double> x);

/// Mean of |x_i - mean(x)|.
double mean_absolute_deviation(std::span<const double> x);

struct RmsSummary {
  std::vector<std::pair<std::string, double>> per_group;  // first-appearance order
  double mean = 0.0;                                      // unweighted over groups
};

/// Root-mean-square gap between two columns, per group (e.g. per question),
/// plus the unweighted mean of the per-group values.
RmsSummary rms_difference(std::span<const double> a, std::span<const double> b,
                          std::span<const std::string> group_of_item);

}  // namespace gradekit::statkit
