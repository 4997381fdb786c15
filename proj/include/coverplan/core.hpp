#pragma once

#include <utility>
#include <vector>

#include "coverplan/types.hpp"

namespace coverplan {

/// Single-period benchmark totals. Regret is measured against fully_learned.
struct BenchmarkPair {
    long long fully_learned = 0;
    long long no_learning = 0;
};

namespace detail {

/// r clamped away from 1 so the closed forms stay finite; the exact r = 1
/// expressions are the limits of the clamped ones.
double effective_rate(double r);

/**
 * Per-period decomposition of the analytic schedule: period t opens
 * coef[t] * ell^expo[t] facilities, and ell solves
 * sum_t coef[t], ell^expo[t] = rhs. gamma and beta describe an offline sample
 * of size gamma * m^beta; gamma = 1, beta = 0 recovers the no-offline form.
 */
struct TermSet {
    std::vector<double> coef;
    std::vector<double> expo;
    double rhs = 0.0;
    double buffer = 0.0;
};

TermSet policy_term_set(const LearningCurve& curve, int T, double delta, double m,
                        double gamma, double beta);

/// Root of sum_t coef[t] * x^expo[t] = rhs by bracketed bisection plus Newton
/// polish; relative residual tolerance 1e-10, at most 200 bisection steps.
double solve_term_root(const TermSet& terms);

}  // namespace detail

/// Closed-form constants c0, alpha_T, zeta_T, the regret exponent, and the
/// coverage buffer for the given instance.
RegretConstants regret_constants(const LearningCurve& curve, const PlanSpec& spec);

/// The positive root coupling the analytic schedule to the buffered coverage
/// requirement.
double solve_ell(const LearningCurve& curve, const PlanSpec& spec);

/// Bounds m - m^{alpha_T (1-r)} <= ell <= m + buffer, valid for large m.
std::pair<double, double> remark1_bounds(const LearningCurve& curve,
                                         const PlanSpec& spec);

/// The buffered analytic schedule (exploration ramp plus bulk final period).
/// Requires spec.n0_offline == 0; the offline variant lives in adaptive.hpp.
Policy static_policy(const LearningCurve& curve, const PlanSpec& spec);

/// Closed-form solution of the deterministic relaxation (no buffer, ell = m).
/// With p = 0 every split of c0 * m is optimal; the whole amount is placed in
/// the final period.
Policy deterministic_policy(const LearningCurve& curve, const PlanSpec& spec);

/// Objective estimate of the deterministic relaxation,
/// c0 * (m + eps * p * zeta_T * m^{alpha_T (1-r)}).
double deterministic_objective(const LearningCurve& curve, const PlanSpec& spec);

/**
 * Exact solution of the deterministic relaxation via its stationarity
 * recurrence
 *
 *     u_{t+1} + (1/r - 1) u_t = u_t^{r+1} / (r u_{t-1}^r),  u_0 = 1,
 *
 * solved by shooting on u_1 so the coverage equality holds to relative
 * tolerance 1e-9. Serves as the independent oracle for
 * deterministic_policy.
 */
Policy deterministic_oracle(const LearningCurve& curve, const PlanSpec& spec,
                            double m_target);

/**
 * Smallest n with P(Binomial(n, q) >= m) >= 1 - delta. Exact binomial tails;
 * the search starts from the normal-approximation quantile and brackets the
 * boundary, so minimality holds: the tail at n - 1 is below 1 - delta.
 */
long long min_trials(double q, long long m, double delta,
                     long long cap = 100000000LL);

/// Fully-learned (error eps (1-p)) and no-learning (error eps) single-period
/// totals, both by exact quantile search.
BenchmarkPair benchmarks(const LearningCurve& curve, const PlanSpec& spec);

}  // namespace coverplan
