#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace coverplan {

/// Standard normal CDF.
double normal_cdf(double x);

/**
 * Inverse standard normal CDF. Rational initial approximation refined by one
 * Halley step; absolute error is well below 1e-9 across (0, 1).
 */
double normal_quantile(double prob);

/// log C(n, k) via lgamma.
double log_choose(long long n, long long k);

/// log of the Binomial(n, q) pmf at k.
double log_binom_pmf(long long n, long long k, double q);

/**
 * Exact upper tail P(Binomial(n, q) >= m).
 *
 * The sum is anchored at the boundary m and extended away from the mode with
 * the pmf ratio recurrence, so the cost is proportional to the distribution
 * spread rather than n. Absolute error is at the level of double rounding.
 */
double binomial_tail_at_least(long long n, double q, long long m);

/// Dense pmf of Binomial(n, q) over 0..n, anchored at the mode.
std::vector<double> binomial_pmf_row(long long n, double q);

/// Wilson 95% score interval for `successes` out of `trials`.
std::pair<double, double> wilson_interval(long long successes, long long trials);

}  // namespace coverplan
