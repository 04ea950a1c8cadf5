#pragma once

// Scalar special functions backing the exact statistics: log-binomial,
// regularized incomplete beta (continued fraction), beta quantiles by
// bisection, and the Student-t two-sided tail.

namespace granbench {

double log_choose(int n, int k);

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// Inverse of I_x(a, b) in x for a given probability p.
double beta_quantile(double p, double a, double b);

// Two-sided p-value for a t statistic with df degrees of freedom.
double student_t_two_sided(double t, int df);

}  // namespace granbench
