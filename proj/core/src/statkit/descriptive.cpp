#include "gradekit/statkit/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "gradekit/error.hpp"

namespace gradekit::statkit {

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.empty()) throw DomainError("sample_sd: empty sample");
  if (x.size() == 1) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::span<const double> x) {
  if (x.empty()) throw DomainError("median: empty sample");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const std::size_t mid = s.size() / 2;
  if (s.size() % 2 == 1) return s[mid];
  return 0.5 * (s[mid - 1] + s[mid]);
}

double mean_absolute_deviation(std::span<const double> x) {
  if (x.empty()) throw DomainError("mean_absolute_deviation: empty sample");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += std::fabs(v - m);
  return s / static_cast<double>(x.size());
}

RmsSummary rms_difference(std::span<const double> a, std::span<const double> b,
                          std::span<const std::string> group_of_item) {
  if (a.size() != b.size() || a.size() != group_of_item.size()) {
    throw DomainError("rms_difference: column and grouping lengths differ");
  }
  if (a.empty()) throw DomainError("rms_difference: empty columns");

  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it, inserted] = acc.try_emplace(group_of_item[i], 0.0, 0);
    if (inserted) order.push_back(group_of_item[i]);
    const double d = a[i] - b[i];
    it->second.first += d * d;
    it->second.second += 1;
  }
  RmsSummary out;
  double total = 0.0;
  for (const auto& g : order) {
    const auto& [ss, count] = acc.at(g);
    const double rms = std::sqrt(ss / static_cast<double>(count));
    out.per_group.emplace_back(g, rms);
    total += rms;
  }
  out.mean = total / static_cast<double>(order.size());
  return out;
}

}  // namespace gradekit::statkit
