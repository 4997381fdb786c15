#include "coverplan/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace coverplan {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Rational approximation for the inverse normal CDF (Acklam form).
double inverse_cdf_seed(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double s = q * q;
    return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * q /
           (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
}

}  // namespace

double normal_quantile(double prob) {
    if (!(prob > 0.0) || !(prob < 1.0))
        throw std::invalid_argument("normal_quantile: prob must be in (0, 1)");
    double x = inverse_cdf_seed(prob);
    // Halley refinement against the exact CDF.
    const double sqrt2pi = 2.506628274631000502;
    double e = normal_cdf(x) - prob;
    double u = e * sqrt2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double log_choose(long long n, long long k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

double log_binom_pmf(long long n, long long k, double q) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    if (q <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (q >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    return log_choose(n, k) + double(k) * std::log(q) + double(n - k) * std::log1p(-q);
}

double binomial_tail_at_least(long long n, double q, long long m) {
    if (m <= 0) return 1.0;
    if (m > n) return 0.0;
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return 1.0;

    const double mean = double(n) * q;
    const double rel_tol = 1e-18;

    if (double(m) > mean) {
        // Sum upward from m; terms decay away from the mode.
        double lp = log_binom_pmf(n, m, q);
        double term = std::exp(lp);
        double acc = term;
        for (long long k = m; k < n; ++k) {
            term *= double(n - k) / double(k + 1) * q / (1.0 - q);
            acc += term;
            if (term < acc * rel_tol) break;
        }
        return acc > 1.0 ? 1.0 : acc;
    }
    // Sum the complement downward from m - 1.
    double lp = log_binom_pmf(n, m - 1, q);
    double term = std::exp(lp);
    double acc = term;
    for (long long k = m - 1; k > 0; --k) {
        term *= double(k) / double(n - k + 1) * (1.0 - q) / q;
        acc += term;
        if (term < acc * rel_tol) break;
    }
    double tail = 1.0 - acc;
    return tail < 0.0 ? 0.0 : tail;
}

std::vector<double> binomial_pmf_row(long long n, double q) {
    std::vector<double> pmf(static_cast<size_t>(n) + 1, 0.0);
    if (q <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (q >= 1.0) {
        pmf[static_cast<size_t>(n)] = 1.0;
        return pmf;
    }
    long long mode = static_cast<long long>(std::floor(double(n + 1) * q));
    if (mode > n) mode = n;
    double center = std::exp(log_binom_pmf(n, mode, q));
    pmf[static_cast<size_t>(mode)] = center;
    const double odds = q / (1.0 - q);
    double v = center;
    for (long long k = mode; k < n; ++k) {
        v *= double(n - k) / double(k + 1) * odds;
        pmf[static_cast<size_t>(k + 1)] = v;
        if (v < 1e-320) break;
    }
    v = center;
    for (long long k = mode; k > 0; --k) {
        v *= double(k) / double(n - k + 1) / odds;
        pmf[static_cast<size_t>(k - 1)] = v;
        if (v < 1e-320) break;
    }
    return pmf;
}

std::pair<double, double> wilson_interval(long long successes, long long trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = double(trials);
    const double phat = double(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    double lo = center - half;
    double hi = center + half;
    if (lo < 0.0) lo = 0.0;
    if (hi > 1.0) hi = 1.0;
    return {lo, hi};
}

}  // namespace coverplan
