#include "gradekit/statkit/icc.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "gradekit/error.hpp"
#include "gradekit/statkit/distributions.hpp"

namespace gradekit::statkit {

std::string to_string(IccVariant v) {
  switch (v) {
    case IccVariant::Icc1_1: return "ICC(1,1)";
    case IccVariant::Icc2_1: return "ICC(2,1)";
    case IccVariant::Icc3_1: return "ICC(3,1)";
    case IccVariant::Icc1_k: return "ICC(1,k)";
    case IccVariant::Icc2_k: return "ICC(2,k)";
    case IccVariant::Icc3_k: return "ICC(3,k)";
  }
  return "ICC(?)";
}

std::optional<IccVariant> parse_icc_variant(std::string_view text) {
  for (IccVariant v : kAllIccVariants) {
    const std::string canonical = to_string(v);  // ICC(m,u)
    std::string underscored = "ICC";
    underscored += canonical[4];
    underscored += '_';
    underscored += canonical[6];
    if (text == canonical || text == underscored) return v;
  }
  return std::nullopt;
}

IccAnova icc_anova(const MatrixView& m) {
  const std::size_t n = m.rows();
  const std::size_t k = m.cols();
  if (n < 2 || k < 2) throw DomainError("icc: need at least 2 items and 2 raters");
  for (double v : m.values()) {
    if (!std::isfinite(v)) throw DomainError("icc: matrix holds a non-finite value");
  }
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);

  // Between-row sum of squares from the raw values.
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (double v : m.row(r)) row_mean[r] += v;
    grand += row_mean[r];
    row_mean[r] /= kd;
  }
  grand /= nd * kd;
  double ss_rows = 0.0;
  for (double rm : row_mean) ss_rows += kd * (rm - grand) * (rm - grand);

  // Column and residual sums of squares are invariant to per-row shifts;
  // anchoring each row at its first value makes identical columns give
  // exactly zero.
  std::vector<double> y(n * k);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) y[r * k + c] = m(r, c) - m(r, 0);
  }
  std::vector<double> yr(n, 0.0);
  std::vector<double> yc(k, 0.0);
  double yg = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      yr[r] += y[r * k + c];
      yc[c] += y[r * k + c];
    }
    yg += yr[r];
    yr[r] /= kd;
  }
  for (double& v : yc) v /= nd;
  yg /= nd * kd;

  double ss_cols = 0.0;
  for (double cm : yc) ss_cols += nd * (cm - yg) * (cm - yg);
  double ss_error = 0.0;
  double ss_within = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      const double e = y[r * k + c] - yr[r] - yc[c] + yg;
      const double w = y[r * k + c] - yr[r];
      ss_error += e * e;
      ss_within += w * w;
    }
  }

  IccAnova a;
  a.df_rows = nd - 1.0;
  a.df_cols = kd - 1.0;
  a.df_error = (nd - 1.0) * (kd - 1.0);
  a.df_within = nd * (kd - 1.0);
  a.ms_rows = ss_rows / a.df_rows;
  a.ms_cols = ss_cols / a.df_cols;
  a.ms_error = ss_error / a.df_error;
  a.ms_within = ss_within / a.df_within;
  return a;
}

IccResult icc(const MatrixView& m, IccVariant variant, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("icc: confidence level must lie in (0, 1)");
  const IccAnova a = icc_anova(m);
  const auto n = static_cast<double>(m.rows());
  const auto k = static_cast<double>(m.cols());
  const double q = 1.0 - (1.0 - level) / 2.0;
  const double bms = a.ms_rows;
  const double jms = a.ms_cols;
  const double ems = a.ms_error;
  const double wms = a.ms_within;

  IccResult out;
  out.variant = variant;
  out.level = level;
  out.anova = a;
  out.details["degenerate"] = 0.0;

  auto collapse = [&](double value) {
    out.value = value;
    out.ci_low = out.ci_high = value;
    out.details["degenerate"] = 1.0;
    return out;
  };

  if (bms == 0.0 && jms == 0.0 && ems == 0.0) return collapse(0.0);

  const bool one_way = variant == IccVariant::Icc1_1 || variant == IccVariant::Icc1_k;
  const bool single = variant == IccVariant::Icc1_1 || variant == IccVariant::Icc2_1 || variant == IccVariant::Icc3_1;
  const double noise = one_way ? wms : ems;

  double numerator = bms - noise;
  double denominator = 0.0;
  switch (variant) {
    case IccVariant::Icc1_1: denominator = bms + (k - 1.0) * wms; break;
    case IccVariant::Icc2_1: denominator = bms + (k - 1.0) * ems + k * (jms - ems) / n; break;
    case IccVariant::Icc3_1: denominator = bms + (k - 1.0) * ems; break;
    case IccVariant::Icc1_k: denominator = bms; break;
    case IccVariant::Icc2_k: denominator = bms + (jms - ems) / n; break;
    case IccVariant::Icc3_k: denominator = bms; break;
  }
  if (denominator <= 0.0) return collapse(0.0);
  const double value = numerator / denominator;
  if (noise == 0.0) return collapse(value);
  out.value = value;

  if (variant == IccVariant::Icc2_1 || variant == IccVariant::Icc2_k) {
    // Satterthwaite-approximated interval for the absolute-agreement form.
    const double icc21 = (bms - ems) / (bms + (k - 1.0) * ems + k * (jms - ems) / n);
    const double fj = jms / ems;
    const double base = n * (1.0 + (k - 1.0) * icc21) - k * icc21;
    const double vn = (k - 1.0) * (n - 1.0) * std::pow(k * icc21 * fj + base, 2.0);
    const double vd = (n - 1.0) * k * k * icc21 * icc21 * fj * fj + base * base;
    const double v = vn / vd;
    const double f_upper = f_quantile(q, n - 1.0, v);
    const double f_lower = f_quantile(q, v, n - 1.0);
    const double spread = k * jms + (k * n - k - n) * ems;
    double lo = n * (bms - f_upper * ems) / (f_upper * spread + n * bms);
    double hi = n * (f_lower * bms - ems) / (spread + n * f_lower * bms);
    if (!single) {
      lo = lo * k / (1.0 + lo * (k - 1.0));
      hi = hi * k / (1.0 + hi * (k - 1.0));
    }
    out.ci_low = lo;
    out.ci_high = hi;
    out.details["satterthwaite_df"] = v;
    return out;
  }

  const double df_noise = one_way ? a.df_within : a.df_error;
  const double f0 = bms / noise;
  const double fl = f0 / f_quantile(q, a.df_rows, df_noise);
  const double fu = f0 * f_quantile(q, df_noise, a.df_rows);
  if (single) {
    out.ci_low = (fl - 1.0) / (fl + k - 1.0);
    out.ci_high = (fu - 1.0) / (fu + k - 1.0);
  } else {
    out.ci_low = 1.0 - 1.0 / fl;
    out.ci_high = 1.0 - 1.0 / fu;
  }
  out.details["f"] = f0;
  return out;
}

}  // namespace gradekit::statkit
