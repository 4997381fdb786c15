#pragma once

#include <cstdint>
#include <vector>

#include "coverplan/types.hpp"

namespace coverplan {

/// One forward run of a schedule through the binomial success model.
struct SimOutcome {
    std::vector<long long> per_period_successes;
    long long total_opened = 0;
    long long total_succeeded = 0;
    bool met_target = false;
};

struct SimReport {
    long long replications = 0;
    double feasibility_estimate = 0.0;
    double feasibility_ci95_lo = 0.0;
    double feasibility_ci95_hi = 1.0;
    double mean_openings = 0.0;
    double mean_regret = 0.0;
    uint64_t seed = 0;
};

/**
 * Draw B_t ~ Binomial(A_t, q_t) sequentially, with q_t evaluated at the
 * accrued count of tentative openings (spec.n0_offline plus all previous
 * A_s). Deterministic given the seed.
 */
SimOutcome simulate_policy(const Policy& policy, const LearningCurve& curve,
                           const PlanSpec& spec, uint64_t seed);

/**
 * Independent replications of simulate_policy on substreams derived from
 * (seed, replication index); reports the empirical feasibility with a Wilson
 * 95% interval and the mean regret against the fully-learned benchmark.
 */
SimReport estimate_feasibility(const Policy& policy, const LearningCurve& curve,
                               const PlanSpec& spec, long long replications,
                               uint64_t seed);

}  // namespace coverplan
