#pragma once

namespace dq {

/// Regularized incomplete beta I_x(a, b), absolute accuracy ~1e-13.
double incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

/// P(F <= f) for the F(d1, d2) law.
double f_cdf(double f, double d1, double d2);

/// Standard normal cdf.
double normal_cdf(double x);

/// Standard normal quantile; DomainError unless 0 < p < 1.
double normal_quantile(double p);

/// Quantile of the exponential law with the given rate.
double exp_quantile(double p, double rate);

}  // namespace dq
