#pragma once

namespace gradekit::statkit {

// Survival functions P(X > x). Degrees of freedom must be positive.
double chi2_sf(double x, double k);
double t_sf(double x, double df);
double f_sf(double x, double d1, double d2);

double normal_cdf(double z);

/// Standard normal quantile (Wichura's AS 241, ~1e-16 relative accuracy).
double normal_quantile(double p);

/// Quantile of the F(d1, d2) distribution: the x with P(F <= x) == p.
double f_quantile(double p, double d1, double d2);

}  // namespace gradekit::statkit
