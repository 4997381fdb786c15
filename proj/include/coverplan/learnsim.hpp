#pragma once

#include <cstdint>
#include <ostream>
#include <utility>
#include <vector>

#include "coverplan/types.hpp"

namespace coverplan {

/**
 * Logistic generative model over a fixed facility pool: facility i succeeds
 * with probability 1 / (1 + exp(-<x_i, theta0>)), and the whitelist threshold
 * is tau on that probability.
 */
struct GenerativeModel {
    std::vector<std::vector<double>> features;  // M x dim
    std::vector<double> theta0;
    double tau = 0.5;

    void validate() const;
    std::vector<double> success_probs() const;
    /// Error of the true-parameter whitelist, 1 - mean eta over {eta > tau}.
    double bayes_error() const;
};

struct LogisticFit {
    std::vector<double> theta;
    bool penalized = false;
    bool converged = false;
};

/**
 * Bernoulli maximum likelihood by damped Newton iterations; converged when
 * the gradient max-norm drops below 1e-8 (at most 100 iterations). Singular
 * or separable data falls back to an L2 penalty of 1e-6 * |theta|^2 with the
 * penalized flag set.
 */
LogisticFit logistic_mle(const std::vector<std::vector<double>>& xs,
                         const std::vector<int>& ys);

struct TracePoint {
    int period = 0;
    long long accrued_n = 0;       // samples available when the period began
    double whitelist_error = 0.0;  // 1 - mean eta over the whitelist
    long long whitelist_size = 0;
    long long selected = 0;
    long long realized_failures = 0;
};

struct LearnTrace {
    std::vector<TracePoint> points;
    double bayes_error = 0.0;
};

/**
 * Forward simulation of the learning process. Period 1 whitelists the whole
 * pool; later periods refit the logistic model on all accrued samples and
 * whitelist unexplored facilities scoring above tau, plus a uniformly drawn
 * exploration subset of the unexplored pool whose size vanishes like
 * floor(exploration_fraction * M / sqrt(N + 1)). Facilities are sampled with
 * replacement from the whitelist and leave the pool once sampled.
 */
LearnTrace run_learning_process(const GenerativeModel& model,
                                const std::vector<long long>& schedule,
                                double exploration_fraction, uint64_t seed);

struct ErrorCurveFit {
    double gamma = 0.0;
    double r_hat = 0.0;
    double beta = 0.0;
    double rmse = 0.0;
};

/**
 * Best fit of gamma / n^r + beta over (n, error) points with n >= 1:
 * r searched on the grid 0.05, 0.10, ..., 2.00, gamma and beta by linear
 * least squares per grid point, both clipped at zero (with the remaining
 * coefficient refit). Needs at least 3 distinct n values.
 */
ErrorCurveFit fit_error_curve(const std::vector<std::pair<double, double>>& points);

/// Pool with dim features (leading intercept, the rest iid standard normal)
/// and theta0 scaled so that roughly 30% of the pool clears tau = 1/2.
GenerativeModel make_default_model(long long n_facilities, int dim, uint64_t seed);

/**
 * Separated pool: the signal feature is sign(v) (|v| + margin_gap) with
 * v ~ N(-0.5244, 1), so no facility sits within the gap around the decision
 * boundary while about 30% of the pool is positive. Remaining dims are
 * standard normal noise.
 */
GenerativeModel make_separated_model(long long n_facilities, int dim, double scale,
                                     double margin_gap, uint64_t seed);

/// Trace CSV (schema: period, accrued_n, whitelist_size, whitelist_error,
/// realized_failures, selected).
void write_trace_csv(const LearnTrace& trace, std::ostream& out);

}  // namespace coverplan
