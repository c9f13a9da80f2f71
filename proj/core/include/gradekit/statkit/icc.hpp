#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "gradekit/statkit/matrix.hpp"

namespace gradekit::statkit {

/// Shrout-Fleiss forms. The first index is the model (1: one-way random,
/// 2: two-way random / absolute agreement, 3: two-way mixed / consistency);
/// the second is the unit (single rater or the mean of k raters).
enum class IccVariant { Icc1_1, Icc2_1, Icc3_1, Icc1_k, Icc2_k, Icc3_k };

inline constexpr std::array<IccVariant, 6> kAllIccVariants = {IccVariant::Icc1_1, IccVariant::Icc2_1,
                                                             IccVariant::Icc3_1, IccVariant::Icc1_k,
                                                             IccVariant::Icc2_k, IccVariant::Icc3_k};

/// "ICC(2,1)" etc.
std::string to_string(IccVariant v);
/// Accepts "ICC(2,1)" / "ICC(2,k)" and the underscore spellings "ICC2_1" / "ICC2_k".
std::optional<IccVariant> parse_icc_variant(std::string_view text);

struct IccAnova {
  double ms_rows = 0.0;    // between items (BMS)
  double ms_cols = 0.0;    // between raters (JMS)
  double ms_error = 0.0;   // two-way residual (EMS)
  double ms_within = 0.0;  // one-way within items (WMS)
  double df_rows = 0.0;
  double df_cols = 0.0;
  double df_error = 0.0;
  double df_within = 0.0;
};

struct IccResult {
  IccVariant variant = IccVariant::Icc2_1;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  IccAnova anova;
  /// "degenerate" = 1 when the residual variance is zero (CI collapses onto
  /// the estimate) or when the whole matrix is constant (value reported as 0).
  std::map<std::string, double> details;
};

IccResult icc(const MatrixView& m, IccVariant variant = IccVariant::Icc2_1, double level = 0.95);

IccAnova icc_anova(const MatrixView& m);

}  // namespace gradekit::statkit
