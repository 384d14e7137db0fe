#pragma once

namespace randbal {

// Standard normal CDF Phi(z). Absolute error well inside 1e-10 (erfc-based).
double normal_cdf(double z);

// Upper tail 1 - Phi(z), computed without cancellation for large z.
double normal_sf(double z);

// Two-sided normal p-value 2(1 - Phi(|z|)).
double two_sided_normal_p(double z);

// Upper-tail probability of the chi-square distribution with df degrees of
// freedom: Q(df/2, x/2) via the regularized incomplete gamma function
// (series for small x, Lentz continued fraction otherwise). Absolute error
// well inside 1e-8. Throws InputError on df < 1 or x < 0.
double chi2_sf(double x, int df);

namespace detail {
// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double gamma_q(double a, double x);
}  // namespace detail

}  // namespace randbal
