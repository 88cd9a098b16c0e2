#pragma once

namespace sqrtreg {

/// Standard normal CDF.
double norm_cdf(double x);

/// Inverse standard normal CDF. Rational-approximation seed refined by two
/// Halley steps against an erfc-based CDF; accurate to ~1e-15 relative for
/// q in (0, 1).
double norm_quantile(double q);

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation.
double incomplete_beta(double a, double b, double x);

/// CDF of the F distribution with degrees of freedom (d1, d2).
double f_cdf(double d1, double d2, double x);

/// Quantile of the F distribution, by bisection on f_cdf.
double f_quantile(double d1, double d2, double q);

} // namespace sqrtreg
