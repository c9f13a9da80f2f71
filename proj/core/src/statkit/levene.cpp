#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gradekit/error.hpp"
#include "gradekit/statkit/descriptive.hpp"
#include "gradekit/statkit/distributions.hpp"
#include "gradekit/statkit/hypothesis.hpp"

namespace gradekit::statkit {

TestResult levene(std::span<const std::vector<double>> groups, LeveneCenter center) {
  if (groups.size() < 2) throw DomainError("levene: need at least 2 groups");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw DomainError("levene: group " + std::to_string(g) + " has fewer than 2 observations");
    }
  }

  std::vector<std::vector<double>> deviations;
  deviations.reserve(groups.size());
  std::size_t total = 0;
  double grand_sum = 0.0;
  for (const auto& group : groups) {
    const double c = center == LeveneCenter::Median ? median(group) : mean(group);
    auto& z = deviations.emplace_back();
    z.reserve(group.size());
    for (double v : group) {
      z.push_back(std::fabs(v - c));
      grand_sum += z.back();
    }
    total += group.size();
  }
  const double grand_mean = grand_sum / static_cast<double>(total);

  double between = 0.0;
  double within = 0.0;
  for (const auto& z : deviations) {
    const double zm = mean(z);
    between += static_cast<double>(z.size()) * (zm - grand_mean) * (zm - grand_mean);
    for (double v : z) within += (v - zm) * (v - zm);
  }

  const double df1 = static_cast<double>(groups.size() - 1);
  const double df2 = static_cast<double>(total - groups.size());
  TestResult result;
  result.df = {df1, df2};
  result.method = center == LeveneCenter::Median ? "levene (median center, Brown-Forsythe)" : "levene (mean center)";
  if (between == 0.0) {
    result.statistic = 0.0;
    result.p_value = 1.0;
    result.details["degenerate"] = within == 0.0 ? 1.0 : 0.0;
    return result;
  }
  if (within == 0.0) {
    result.statistic = std::numeric_limits<double>::infinity();
    result.p_value = 0.0;
    return result;
  }
  result.statistic = (between / df1) / (within / df2);
  result.p_value = f_sf(result.statistic, df1, df2);
  return result;
}

}  // namespace gradekit::statkit
