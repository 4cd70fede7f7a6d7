#pragma once

namespace tailrisk {

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately keeps precision when x is close to 1.
double regularized_beta(double a, double b, double x, double y);
double regularized_beta(double a, double b, double x);

/// Student-t CDF with nu > 0 degrees of freedom.
double student_t_cdf(double x, double nu);

/// Upper tail 1 - F(x; nu), accurate far into the tail.
double student_t_sf(double x, double nu);

/// Student-t density.
double student_t_pdf(double x, double nu);

}  // namespace tailrisk
