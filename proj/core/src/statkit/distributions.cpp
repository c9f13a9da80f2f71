#include "gradekit/statkit/distributions.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gradekit/error.hpp"
#include "gradekit/statkit/special.hpp"

namespace gradekit::statkit {
namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw DomainError(std::string(what) + " must be > 0");
}

}  // namespace

double chi2_sf(double x, double k) {
  require_positive(k, "chi2_sf: degrees of freedom");
  if (std::isnan(x)) throw DomainError("chi2_sf: x is NaN");
  if (x <= 0.0) return 1.0;
  return reg_inc_gamma_upper(0.5 * k, 0.5 * x);
}

double t_sf(double x, double df) {
  require_positive(df, "t_sf: degrees of freedom");
  if (std::isnan(x)) throw DomainError("t_sf: x is NaN");
  if (x == 0.0) return 0.5;
  if (std::isinf(x)) return x > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, df / (df + x * x));
  return x > 0.0 ? tail : 1.0 - tail;
}

double f_sf(double x, double d1, double d2) {
  require_positive(d1, "f_sf: numerator degrees of freedom");
  require_positive(d2, "f_sf: denominator degrees of freedom");
  if (std::isnan(x)) throw DomainError("f_sf: x is NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return reg_inc_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("normal_quantile: p must lie in [0, 1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double f_quantile(double p, double d1, double d2) {
  require_positive(d1, "f_quantile: numerator degrees of freedom");
  require_positive(d2, "f_quantile: denominator degrees of freedom");
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("f_quantile: p must lie in [0, 1)");
  const double x = inv_reg_inc_beta(0.5 * d1, 0.5 * d2, p);
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  return d2 * x / (d1 * (1.0 - x));
}

}  // namespace gradekit::statkit
