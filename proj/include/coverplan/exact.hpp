#pragma once

#include <vector>

#include "coverplan/types.hpp"

namespace coverplan {

/**
 * Exact probability that cumulative successes reach spec.m under the given
 * schedule. Per-period success probabilities follow the learning curve at the
 * accrued count of tentative openings (plus spec.n0_offline); the T binomial
 * laws are convolved with cumulative mass truncated at m, which is absorbing
 * since only the event {sum >= m} matters.
 */
double chance_prob(const std::vector<long long>& openings,
                   const LearningCurve& curve, const PlanSpec& spec);

struct ExactOptions {
    /// Half-width of the search box around the analytic schedule; <= 0 selects
    /// the default (max(10, 2 A_t) per coordinate, shrunk to 5 for T >= 5).
    long long window = 0;
    long long m_cap = 2000;
    int threads = 0;
};

/**
 * Exact solution of the chance-constrained problem by pruned enumeration.
 * The first T-1 coordinates range over a box centered at the analytic
 * schedule; the final period is the minimal feasible count found by monotone
 * binary search on chance_prob. Returns the feasible schedule minimizing the
 * total, ties broken by lexicographically smallest vector.
 */
Policy exact_policy(const LearningCurve& curve, const PlanSpec& spec,
                    const ExactOptions& opts = {});

}  // namespace coverplan
