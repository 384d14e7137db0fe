#include "randbal/stats.hpp"

#include <cmath>
#include <string>

#include "randbal/common.hpp"

namespace randbal {

namespace {
constexpr double inv_sqrt2 = 0.70710678118654752440;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * inv_sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z * inv_sqrt2); }

double two_sided_normal_p(double z) {
  const double p = 2.0 * normal_sf(std::fabs(z));
  return p > 1.0 ? 1.0 : p;
}

namespace detail {

namespace {

// Lower regularized incomplete gamma P(a, x) by power series; converges
// quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by modified Lentz continued
// fraction; converges quickly for x > a + 1.
double gamma_q_lentz(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double f = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return f * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) {
    const double p = gamma_p_series(a, x);
    return p >= 1.0 ? 0.0 : 1.0 - p;
  }
  return gamma_q_lentz(a, x);
}

}  // namespace detail

double chi2_sf(double x, int df) {
  if (df < 1) {
    throw InputError("chi2_sf: degrees of freedom must be >= 1, got " +
                     std::to_string(df));
  }
  if (!(x >= 0.0)) {
    throw InputError("chi2_sf: statistic must be >= 0");
  }
  return detail::gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace randbal
