#pragma once

#include <cstdint>
#include <vector>

#include "coverplan/types.hpp"

namespace coverplan {

/// Offline-data description: N0 = gamma * m^beta samples available up front,
/// acquired at unit cost acquisition_cost in the warm-start setting.
struct OfflineSpec {
    double gamma = 1.0;
    double beta = 0.0;
    double acquisition_cost = 1.0;

    void validate() const;
};

struct WarmStart {
    long long n0 = 0;
    double gamma_star = 0.0;
    double beta_star = 0.0;
};

/// One period of a realized trajectory.
struct PeriodRecord {
    long long planned = 0;
    long long realized = 0;
    long long remaining_after = 0;
    long long accrued_after = 0;
};

struct Trajectory {
    std::vector<PeriodRecord> per_period;
    long long total_opened = 0;
    bool met_target = false;
};

/**
 * Analytic schedule adjusted for an offline sample of size gamma * m^beta.
 * With gamma = 1, beta = 0 this reduces to static_policy. When
 * spec.n0_offline is nonzero it must match gamma * m^beta.
 */
Policy offline_policy(const LearningCurve& curve, const PlanSpec& spec,
                      const OfflineSpec& offline);

/// Optimal offline-acquisition size when data costs `cost` per sample:
/// beta* = (1 - r) * alpha_{T+1} and the closed-form gamma*.
WarmStart warmstart_acquisition(const LearningCurve& curve, const PlanSpec& spec,
                                double cost);

/// Single-period close-out: minimal final-period openings meeting the
/// remaining target at risk delta given the accrued sample.
long long last_period_exact(const LearningCurve& curve, long long remaining,
                            long long accrued_n, double delta);

/**
 * Re-optimizing loop: each period solves the remaining-horizon problem with
 * the accrued sample treated as offline data (gamma, beta inferred from the
 * realized counts), commits the first decision, and closes out the final
 * period with the exact single-period quantile.
 */
Trajectory adaptive_run(const LearningCurve& curve, const PlanSpec& spec,
                        uint64_t seed);

/// Static schedule for the first T-1 periods, exact close-out in period T.
Trajectory semi_adaptive_run(const LearningCurve& curve, const PlanSpec& spec,
                             uint64_t seed);

}  // namespace coverplan
