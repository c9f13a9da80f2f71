#pragma once

namespace gradekit::statkit {

/// Regularized lower incomplete gamma P(a, x). Requires a > 0, x >= 0.
double reg_inc_gamma(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed
/// directly so small tails keep their relative accuracy.
double reg_inc_gamma_upper(double a, double x);

/// Regularized incomplete beta I_x(a, b). Requires a, b > 0, 0 <= x <= 1.
double reg_inc_beta(double a, double b, double x);

/// Inverse of I_x(a, b) in x: the x with I_x(a, b) == p.
double inv_reg_inc_beta(double a, double b, double p);

double log_beta(double a, double b);

}  // namespace gradekit::statkit
